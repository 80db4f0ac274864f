use pmap::concentration::{exp_moment_bound, gumbel_denominator_infimum, gumbel_poincare_constant, BoundParams};
use pmap::gumbel::EULER_GAMMA;
use pmap::perturbation::VjSampler;
use pmap::{ModelBuilder, RngStream, SolverKind};

/// Grid minimum of `phi'' + eta phi'^2` for the Gumbel potential.
fn numeric_infimum(eta: f64) -> f64 {
    (0..=200_000)
        .map(|k| -15.0 + k as f64 * 50.0 / 200_000.0)
        .map(|y| {
            let e = (-(y + EULER_GAMMA)).exp();
            e + eta * (1.0 - e).powi(2)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn eta_sweep_confirms_constant_four() {
    let mut best = (f64::INFINITY, 0.0);
    for k in 1..100 {
        let eta = k as f64 / 100.0;
        let numeric = numeric_infimum(eta);
        let closed = gumbel_denominator_infimum(eta);
        // the grid cannot reach y -> inf where the infimum is approached for eta <= 1/2
        assert!(numeric >= closed - 1e-12 && numeric - closed < 1e-4, "eta {eta}: {numeric} vs {closed}");
        let c = gumbel_poincare_constant(eta).unwrap();
        let proof_form =
            if eta <= 0.5 { 1.0 / (eta * (1.0 - eta)) } else { 4.0 * eta / ((4.0 * eta - 1.0) * (1.0 - eta)) };
        assert!((c - proof_form).abs() <= 1e-12 * proof_form);
        assert!(c >= 4.0 - 1e-12);
        if c < best.0 {
            best = (c, eta);
        }
    }
    assert_eq!(best.1, 0.5);
    assert!((best.0 - 4.0).abs() < 1e-12);
}

#[test]
fn exp_moment_bound_holds_empirically() {
    let model = ModelBuilder::with_domain_sizes(&[2, 2])
        .unary_scores(0, &[0.3, -0.2])
        .unary_scores(1, &[0.0, 0.7])
        .pairwise_table(0, 1, &[0.5, -0.1, 0.2, 0.9])
        .build()
        .unwrap();
    let mut sampler = VjSampler::new(&model, &[], SolverKind::Brute).unwrap();
    let mut rng = RngStream::new(71, 0);
    let draws: Vec<f64> = (0..1_000_000).map(|_| sampler.draw(&mut rng).unwrap()).collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let lambda = 1.0 / 20.0;
    let mgf = draws.iter().map(|f| (lambda * (f - mean)).exp()).sum::<f64>() / draws.len() as f64;
    let bound = exp_moment_bound(&BoundParams::new(2.0, 1.0, 1, 0.5).unwrap(), lambda).unwrap();
    assert!((bound - (5.0 * 2.0 * lambda * lambda).exp()).abs() < 1e-15);
    assert!(mgf <= bound * 1.01, "{mgf} > {bound}");
}
