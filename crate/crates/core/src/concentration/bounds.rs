use crate::error::{Error, Result};

/// Gradient bounds `||grad F||_2^2 <= a2`, `||grad F||_inf <= b`, together
/// with a sample count and a confidence parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub a2: f64,
    pub b: f64,
    pub samples: usize,
    pub delta: f64,
}

impl BoundParams {
    pub fn new(a2: f64, b: f64, samples: usize, delta: f64) -> Result<Self> {
        let p = BoundParams { a2, b, samples, delta };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.a2 >= 0.0 && self.a2.is_finite()) {
            return Err(Error::invalid(format!("a^2 must be finite and >= 0, got {}", self.a2)));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::invalid(format!("b must be finite and > 0, got {}", self.b)));
        }
        if self.samples == 0 {
            return Err(Error::invalid("sample count must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }
}

/// One-sided deviation radius of an `M`-sample mean holding with probability
/// at least `1 - delta`:
/// `max(20 b / M * ln(1/delta), sqrt(20 a^2 / M * ln(1/delta)))`.
pub fn corollary2_bound(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    let log_term = (1.0 / p.delta).ln();
    let m = p.samples as f64;
    let linear = 20.0 * p.b / m * log_term;
    let sqrt = (20.0 * p.a2 / m * log_term).sqrt();
    Ok(linear.max(sqrt))
}

/// Two-sided radius for a perturbed MAP value over `n_dims` variables
/// (`a^2 = n_dims`, `b = 1`, confidence split as `delta / 2` per side).
pub fn two_sided_bound(n_dims: usize, samples: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    corollary2_bound(&BoundParams::new(n_dims as f64, 1.0, samples, delta / 2.0)?)
}

/// `exp(5 a^2 lambda^2)`, valid for `|lambda| <= 1 / (10 b)`.
pub fn exp_moment_bound(p: &BoundParams, lambda: f64) -> Result<f64> {
    p.validate()?;
    let limit = 1.0 / (10.0 * p.b);
    if lambda.is_nan() || lambda.abs() > limit {
        return Err(Error::Domain(format!("|lambda| = {} exceeds 1/(10 b) = {limit}", lambda.abs())));
    }
    Ok((5.0 * p.a2 * lambda * lambda).exp())
}

/// Per-coordinate sample counts `M_j` for sequential sampling over variables
/// with the given domain sizes: the smallest `M_j` whose two-sided radius
/// (`a^2 = n - j + 1`, per-step confidence `delta_total / n`) is at most
/// `epsilon`.
pub fn epsilon_delta_plan(domain_sizes: &[usize], epsilon: f64, delta_total: f64) -> Result<Vec<usize>> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta_total > 0.0 && delta_total < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta_total}")));
    }
    let n = domain_sizes.len();
    let per_step = delta_total / n.max(1) as f64;
    let log_term = (2.0 / per_step).ln();
    (1..=n)
        .map(|j| {
            let a2 = (n - j + 1) as f64;
            let guess = (20.0 * log_term / epsilon).max(20.0 * a2 * log_term / (epsilon * epsilon));
            let mut m = (guess.ceil() as usize).max(1);
            let fits = |m: usize| two_sided_bound(n - j + 1, m, per_step).map(|r| r <= epsilon);
            while m > 1 && fits(m - 1)? {
                m -= 1;
            }
            while !fits(m)? {
                m += 1;
            }
            Ok(m)
        })
        .collect()
}

/// Multiplicative band `(exp(-2 eps), exp(2 eps))` on estimated step
/// probabilities when every expectation estimate is within `eps`.
pub fn ratio_guarantee(epsilon: f64) -> (f64, f64) {
    ((-2.0 * epsilon).exp(), (2.0 * epsilon).exp())
}

/// `2 ((1 + rho) / (1 - rho))^2 exp(2 sqrt(5) rho)`.
pub fn log_sobolev_prefactor(rho: f64) -> f64 {
    2.0 * ((1.0 + rho) / (1.0 - rho)).powi(2) * (2.0 * 5f64.sqrt() * rho).exp()
}

/// `inf_y phi''(y) + eta phi'(y)^2` for the Gumbel potential
/// `phi(y) = y + c + exp(-(y + c))`.
pub fn gumbel_denominator_infimum(eta: f64) -> f64 {
    if eta <= 0.5 {
        eta
    } else {
        (4.0 * eta - 1.0) / (4.0 * eta)
    }
}

/// Poincaré constant for the Gumbel measure obtained from the log-concave
/// inequality at a given `eta`: `1 / ((1 - eta) * inf(phi'' + eta phi'^2))`.
/// Infinite at `eta = 0`.
pub fn gumbel_poincare_constant(eta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::Domain(format!("eta must lie in [0, 1), got {eta}")));
    }
    let inf = gumbel_denominator_infimum(eta);
    Ok(if inf <= 0.0 { f64::INFINITY } else { 1.0 / ((1.0 - eta) * inf) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bound(a2: f64, b: f64, m: usize, delta: f64) -> f64 {
        corollary2_bound(&BoundParams::new(a2, b, m, delta).unwrap()).unwrap()
    }

    #[test]
    fn reference_value() {
        let r = bound(4.0, 1.0, 20, 0.05);
        assert!((r - 3.461_636_765_204_571).abs() < 1e-12);
        assert!((r - 3.4617).abs() < 1e-4);
    }

    #[test]
    fn vanishes_as_delta_tends_to_one() {
        assert!(bound(4.0, 1.0, 20, 1.0 - 1e-12) < 1e-5);
    }

    #[test]
    fn monotonicity() {
        let base = bound(4.0, 1.0, 20, 0.05);
        assert!(bound(4.0, 1.0, 40, 0.05) < base);
        assert!(bound(8.0, 1.0, 20, 0.05) > base);
        assert!(bound(4.0, 3.0, 20, 0.05) > base);
        assert!(bound(4.0, 1.0, 20, 0.01) > base);
        assert!(bound(0.0, 1.0, 20, 0.05) >= 0.0);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(BoundParams::new(-1.0, 1.0, 10, 0.1).is_err());
        assert!(BoundParams::new(1.0, 0.0, 10, 0.1).is_err());
        assert!(BoundParams::new(1.0, 1.0, 0, 0.1).is_err());
        assert!(BoundParams::new(1.0, 1.0, 10, 1.0).is_err());
        assert!(two_sided_bound(1, 10, 0.0).is_err());
    }

    #[test]
    fn two_sided_is_halved_delta() {
        for (n, m, d) in [(1, 5, 0.1f64), (100, 10, 0.05), (7, 1000, 0.3)] {
            let direct = (20.0 / m as f64 * (2.0 / d).ln()).max((20.0 * n as f64 / m as f64 * (2.0 / d).ln()).sqrt());
            assert!((two_sided_bound(n, m, d).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn two_sided_branch_crossover() {
        // branches meet where 20/M L = sqrt(20 n / M L), i.e. M* = 20 L / n
        let (n, delta) = (1usize, 0.05f64);
        let l = (2.0 / delta).ln();
        let linear = |m: f64| 20.0 / m * l;
        let sqrt = |m: f64| (20.0 * n as f64 / m * l).sqrt();
        let (mut lo, mut hi) = (1e-3, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if linear(mid) > sqrt(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 20.0 * l / n as f64).abs() < 1e-6);
        assert!((linear(lo) - sqrt(lo)).abs() < 1e-6);
    }

    #[test]
    fn two_sided_large_model_is_loose() {
        let r = two_sided_bound(10_000, 10, 0.05).unwrap();
        assert!((r - 271.620_303_148_123_9).abs() < 1e-9);
        assert!(two_sided_bound(1, 1 << 40, 0.05).unwrap() < 1e-4);
    }

    #[test]
    fn exp_moment_values_and_domain() {
        let p = BoundParams::new(1.0, 1.0, 1, 0.5).unwrap();
        assert_eq!(exp_moment_bound(&p, 0.0).unwrap(), 1.0);
        assert!((exp_moment_bound(&p, 0.1).unwrap() - 0.05f64.exp()).abs() < 1e-15);
        assert!(matches!(exp_moment_bound(&p, 0.11), Err(Error::Domain(_))));
    }

    #[test]
    fn plan_large_epsilon_needs_one_sample() {
        assert_eq!(epsilon_delta_plan(&[2, 2, 2], 1e6, 0.1).unwrap(), vec![1, 1, 1]);
    }

    #[test]
    fn plan_matches_linear_scan() {
        for eps in [0.1, 0.5, 2.0] {
            let plan = epsilon_delta_plan(&[3], eps, 0.05).unwrap();
            let scan = (1..).find(|&m| two_sided_bound(1, m, 0.05).unwrap() <= eps).unwrap();
            assert_eq!(plan, vec![scan]);
        }
    }

    #[test]
    fn plan_is_nonincreasing_in_j() {
        let plan = epsilon_delta_plan(&[2; 12], 0.3, 0.1).unwrap();
        assert!(plan.windows(2).all(|w| w[0] >= w[1]));
        for (k, &m) in plan.iter().enumerate() {
            assert!(two_sided_bound(12 - k, m, 0.1 / 12.0).unwrap() <= 0.3);
        }
    }

    #[test]
    fn prefactor_at_one_tenth() {
        let c = log_sobolev_prefactor(0.1);
        assert!((c - 4.672).abs() < 1e-3);
        assert!(c < 5.0);
    }

    #[test]
    fn gumbel_constant_minimized_at_one_half() {
        assert!((gumbel_poincare_constant(0.5).unwrap() - 4.0).abs() < 1e-12);
        assert!(gumbel_poincare_constant(0.0).unwrap().is_infinite());
        assert!(gumbel_poincare_constant(1.0).is_err());
    }

    #[test]
    fn ratio_band() {
        let (lo, hi) = ratio_guarantee(0.1);
        assert!((lo * hi - 1.0).abs() < 1e-15);
        assert!((hi - 0.2f64.exp()).abs() < 1e-15);
    }
}
