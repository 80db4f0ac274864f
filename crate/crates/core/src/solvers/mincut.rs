//! MAP for binary submodular pairwise models via a single s-t minimum cut.
//!
//! Maximizing `theta + gamma` is minimizing the energy `E = -(theta + gamma)`.
//! Each pairwise energy table `(A, B; C, D)` is split as
//! `A + (C - A) x_i + (D - C) x_j + (B + C - A - D)(1 - x_i) x_j`;
//! the last term becomes the edge `i -> j`, linear terms become terminal
//! edges and everything else is a tracked constant. A node on the sink side
//! of the cut takes label index 1.

use super::flow::{max_flow, FlowNetwork};
use super::{MapResult, SolverKind};
use crate::error::{Error, Result};
use crate::model::{Configuration, DiscreteModel};
use crate::perturbation::{PerturbationKind, PerturbationTable};

pub fn map_mincut(model: &DiscreteModel, perturb: Option<&PerturbationTable>) -> Result<MapResult> {
    if let Some(var) = (0..model.n()).find(|&i| model.domain_size(i) != 2) {
        return Err(Error::Unsupported(format!(
            "min-cut solver needs binary variables; variable {var} has {} labels",
            model.domain_size(var)
        )));
    }
    if !model.forbidden().is_empty() {
        return Err(Error::Unsupported("min-cut solver does not support forbidden configurations".into()));
    }
    if let Some(t) = perturb {
        if t.kind() != PerturbationKind::LowDim {
            return Err(Error::Unsupported("min-cut solver accepts low-dimensional perturbations only".into()));
        }
        t.check_compatible(model)?;
    }

    let n = model.n();
    let (source, sink) = (n, n + 1);
    let mut linear = vec![0.0; n];
    for (i, lin) in linear.iter_mut().enumerate() {
        let u = model.unary(i);
        let g = |l: usize| perturb.map_or(0.0, |t| t.low_dim_entry(i, l));
        let e0 = -(u[0] + g(0));
        let e1 = -(u[1] + g(1));
        *lin = e1 - e0;
    }
    let mut net = FlowNetwork::new(n + 2, source, sink)?;
    for f in model.pairwise() {
        let t = f.table();
        let (a, b, c, d) = (-t[0], -t[1], -t[2], -t[3]);
        let w = b + c - a - d;
        let tol = 1e-12 * (a.abs() + b.abs() + c.abs() + d.abs() + 1.0);
        if w < -tol {
            return Err(Error::Unsupported(format!(
                "pairwise factor ({}, {}) is not submodular (B + C - A - D = {w})",
                f.i, f.j
            )));
        }
        linear[f.i] += c - a;
        linear[f.j] += d - c;
        if w > 0.0 {
            net.add_edge(f.i, f.j, w)?;
        }
    }
    for (i, &lin) in linear.iter().enumerate() {
        if lin > 0.0 {
            net.add_edge(source, i, lin)?;
        } else if lin < 0.0 {
            net.add_edge(i, sink, -lin)?;
        }
    }
    let flow = max_flow(&net);
    // Largest source side = fewest ones = lexicographically smallest optimum.
    let argmax: Vec<usize> = (0..n).map(|i| usize::from(!flow.max_source_side[i])).collect();
    let value = model.factor_sum(&argmax) + perturb.map_or(0.0, |t| t.gamma_unchecked(model, &argmax));
    Ok(MapResult { argmax: Configuration(argmax), value, solver: SolverKind::Mincut })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gumbel::RngStream;
    use crate::model::ModelBuilder;
    use crate::perturbation::draw_perturbation;
    use crate::solvers::map_bruteforce;

    fn grid3(rng: &mut RngStream, c: f64) -> DiscreteModel {
        let mut b = ModelBuilder::spins(9);
        for i in 0..9 {
            let h = rng.uniform(-1.0, 1.0);
            b = b.unary_scores(i, &[-h, h]);
        }
        for r in 0..3 {
            for k in 0..3 {
                let i = 3 * r + k;
                if k + 1 < 3 {
                    let w = rng.uniform(0.0, c);
                    b = b.pairwise_table(i, i + 1, &[w, -w, -w, w]);
                }
                if r + 1 < 3 {
                    let w = rng.uniform(0.0, c);
                    b = b.pairwise_table(i, i + 3, &[w, -w, -w, w]);
                }
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn attractive_pair_tie_breaks_to_first() {
        let m = ModelBuilder::spins(2).pairwise_table(0, 1, &[1.0, -1.0, -1.0, 1.0]).build().unwrap();
        let r = map_mincut(&m, None).unwrap();
        assert_eq!(r.argmax.0, vec![0, 0]);
        assert_eq!(r.value, 1.0);
        assert_eq!(r.solver, SolverKind::Mincut);
    }

    #[test]
    fn agrees_with_bruteforce_on_grids() {
        let mut rng = RngStream::new(5, 0);
        for _ in 0..100 {
            let m = grid3(&mut rng, 4.0);
            let t = draw_perturbation(&m, PerturbationKind::LowDim, &mut rng).unwrap();
            let a = map_mincut(&m, Some(&t)).unwrap();
            let b = map_bruteforce(&m, Some(&t)).unwrap();
            assert!((a.value - b.value).abs() < 1e-9);
            assert_eq!(a.argmax, b.argmax);
        }
    }

    #[test]
    fn unperturbed_grid_matches_bruteforce() {
        let mut rng = RngStream::new(6, 0);
        let m = grid3(&mut rng, 2.0);
        assert!((map_mincut(&m, None).unwrap().value - map_bruteforce(&m, None).unwrap().value).abs() < 1e-9);
    }

    #[test]
    fn rejects_unsupported_models() {
        let m = ModelBuilder::with_domain_sizes(&[3]).build().unwrap();
        assert!(matches!(map_mincut(&m, None), Err(Error::Unsupported(_))));
        let m = ModelBuilder::spins(2).pairwise_table(0, 1, &[-1.0, 1.0, 1.0, -1.0]).build().unwrap();
        assert!(matches!(map_mincut(&m, None), Err(Error::Unsupported(_))));
        let m = ModelBuilder::spins(2).build().unwrap();
        let mut rng = RngStream::new(0, 0);
        let t = draw_perturbation(&m, PerturbationKind::Full, &mut rng).unwrap();
        assert!(matches!(map_mincut(&m, Some(&t)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn general_submodular_tables_are_handled() {
        // asymmetric but submodular table: A + D <= B + C in energy form
        let m = ModelBuilder::spins(3)
            .unary_scores(0, &[0.2, -0.4])
            .unary_scores(2, &[0.0, 0.9])
            .pairwise_table(0, 1, &[1.0, 0.3, -0.5, 2.0])
            .pairwise_table(1, 2, &[0.0, -1.0, 0.5, 0.7])
            .build()
            .unwrap();
        let a = map_mincut(&m, None).unwrap();
        let b = map_bruteforce(&m, None).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
        assert_eq!(a.argmax, b.argmax);
    }
}
