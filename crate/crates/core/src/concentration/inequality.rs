use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::bounds::log_sobolev_prefactor;
use crate::error::{Error, Result};
use crate::gumbel::{EULER_GAMMA, GUMBEL_DOMAIN};
use crate::quadrature::{integrate_with_breaks, QuadratureOptions};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A test function `h` with its derivative.
///
/// `grad_bound` is the caller's certificate for `sup |h'|`; it is trusted,
/// never estimated. `decays` certifies `h(y) q(y) -> 0` in both tails.
#[derive(Clone)]
pub struct ScalarFunction {
    pub name: String,
    value: RealFn,
    derivative: RealFn,
    pub grad_bound: Option<f64>,
    pub decays: bool,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction").field("name", &self.name).field("grad_bound", &self.grad_bound).finish()
    }
}

impl ScalarFunction {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        grad_bound: Option<f64>,
    ) -> Self {
        ScalarFunction {
            name: name.into(),
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            grad_bound,
            decays: true,
        }
    }

    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        (self.value)(y)
    }

    #[inline]
    pub fn deriv(&self, y: f64) -> f64 {
        (self.derivative)(y)
    }
}

/// Density `q = exp(-phi)` with `phi` convex and uniquely minimized at
/// `minimizer`, where `phi''` may be discontinuous.
#[derive(Clone)]
pub struct LogConcaveDensity {
    pub name: String,
    phi: RealFn,
    dphi: RealFn,
    d2phi: RealFn,
    pub minimizer: f64,
    /// Truncated integration domain.
    pub domain: (f64, f64),
}

impl fmt::Debug for LogConcaveDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LogConcaveDensity")
            .field("name", &self.name)
            .field("minimizer", &self.minimizer)
            .field("domain", &self.domain)
            .finish()
    }
}

impl LogConcaveDensity {
    pub fn new(
        name: impl Into<String>,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        minimizer: f64,
        domain: (f64, f64),
    ) -> Self {
        LogConcaveDensity {
            name: name.into(),
            phi: Arc::new(phi),
            dphi: Arc::new(dphi),
            d2phi: Arc::new(d2phi),
            minimizer,
            domain,
        }
    }

    /// Standard normal, `phi = y^2 / 2 + ln sqrt(2 pi)`.
    pub fn gaussian() -> Self {
        let log_norm = 0.5 * (2.0 * std::f64::consts::PI).ln();
        Self::new("gaussian", move |y| 0.5 * y * y + log_norm, |y| y, |_| 1.0, 0.0, (-12.0, 12.0))
    }

    /// Standard Laplace, `phi = |y| + ln 2`. The domain is wide enough that
    /// the truncated tail mass is below `1e-17`.
    pub fn laplace() -> Self {
        Self::new(
            "laplace",
            |y: f64| y.abs() + std::f64::consts::LN_2,
            |y: f64| {
                if y > 0.0 {
                    1.0
                } else if y < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            },
            |_| 0.0,
            0.0,
            (-40.0, 40.0),
        )
    }

    /// Zero-mean Gumbel, `phi = y + c + exp(-(y + c))`.
    pub fn gumbel() -> Self {
        Self::new(
            "gumbel",
            |y| {
                let t = y + EULER_GAMMA;
                t + (-t).exp()
            },
            |y| 1.0 - (-(y + EULER_GAMMA)).exp(),
            |y| (-(y + EULER_GAMMA)).exp(),
            -EULER_GAMMA,
            GUMBEL_DOMAIN,
        )
    }

    #[inline]
    pub fn density(&self, y: f64) -> f64 {
        (-(self.phi)(y)).exp()
    }

    pub fn dphi(&self, y: f64) -> f64 {
        (self.dphi)(y)
    }

    pub fn d2phi(&self, y: f64) -> f64 {
        (self.d2phi)(y)
    }

    fn breaks(&self) -> Vec<f64> {
        let (lo, hi) = self.domain;
        if self.minimizer > lo && self.minimizer < hi {
            vec![lo, self.minimizer, hi]
        } else {
            vec![lo, hi]
        }
    }

    /// `int f(y) q(y) dy` over the truncated domain, split at the minimizer.
    fn expect(&self, f: impl Fn(f64) -> f64, opts: &QuadratureOptions) -> (f64, f64, bool) {
        let r = integrate_with_breaks(|y| f(y) * self.density(y), &self.breaks(), opts);
        (r.value, r.error, r.converged)
    }

    /// Total mass over the truncated domain; should be 1 within `1e-6`.
    pub fn mass(&self) -> f64 {
        self.expect(|_| 1.0, &QuadratureOptions::default()).0
    }

    /// Spot-checks the hypotheses that can be checked numerically: unit
    /// mass, `phi'` nonzero away from the minimizer, and nonvanishing
    /// one-sided limits of `phi'` or `phi''` at the minimizer.
    pub fn check_hypotheses(&self) -> Result<()> {
        let mass = self.mass();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::Domain(format!("{} density has mass {mass} on its domain", self.name)));
        }
        let (lo, hi) = self.domain;
        for k in 0..=400 {
            let y = lo + (hi - lo) * k as f64 / 400.0;
            if (y - self.minimizer).abs() > 1e-9 && self.dphi(y) == 0.0 {
                return Err(Error::Domain(format!("phi' vanishes at {y} away from the minimizer")));
            }
        }
        for side in [-1.0, 1.0] {
            let y = self.minimizer + side * 1e-7;
            if self.dphi(y).abs() < 1e-12 && self.d2phi(y).abs() < 1e-12 {
                return Err(Error::Domain("phi' and phi'' both vanish next to the minimizer".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

/// Numerically evaluated sides of a functional inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub inequality: String,
    pub parameters: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, or 0 when both sides vanish to quadrature accuracy.
    pub ratio: f64,
    pub quadrature_error: f64,
    pub verdict: Verdict,
}

impl InequalityReport {
    fn new(
        inequality: &str,
        parameters: BTreeMap<String, f64>,
        lhs: f64,
        rhs: f64,
        quadrature_error: f64,
        converged: bool,
        tol: f64,
    ) -> Self {
        let ratio = if rhs.abs() <= tol && lhs.abs() <= tol { 0.0 } else { lhs / rhs };
        let verdict = if !converged || quadrature_error > 10.0 * tol {
            Verdict::Inconclusive
        } else if lhs <= rhs + quadrature_error + tol {
            Verdict::Holds
        } else {
            Verdict::Violated
        };
        InequalityReport { inequality: inequality.to_string(), parameters, lhs, rhs, ratio, quadrature_error, verdict }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `Var(h)` under the (renormalized) truncated density.
fn variance(dens: &LogConcaveDensity, h: &ScalarFunction, opts: &QuadratureOptions) -> (f64, f64, bool) {
    let (mass, e0, c0) = dens.expect(|_| 1.0, opts);
    let (first, e1, c1) = dens.expect(|y| h.eval(y), opts);
    let mean = first / mass;
    let (second, e2, c2) = dens.expect(|y| (h.eval(y) - mean).powi(2), opts);
    (second / mass, e0 + e1 + e2, c0 && c1 && c2)
}

/// Checks `Var(h) <= 1/(1 - eta) * int h'^2 / (phi'' + eta phi'^2) dmu`.
pub fn check_poincare(dens: &LogConcaveDensity, h: &ScalarFunction, eta: f64) -> Result<InequalityReport> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::Domain(format!("eta must lie in [0, 1), got {eta}")));
    }
    if !h.decays {
        return Err(Error::invalid(format!("{} lacks the tail-decay certificate", h.name)));
    }
    let opts = QuadratureOptions::default();
    let (lhs, err_l, conv_l) = variance(dens, h, &opts);
    let bad_point = Cell::new(None);
    let (mass, _, _) = dens.expect(|_| 1.0, &opts);
    let (integral, err_r, conv_r) = dens.expect(
        |y| {
            let d = h.deriv(y);
            if d == 0.0 {
                return 0.0;
            }
            let denom = dens.d2phi(y) + eta * dens.dphi(y).powi(2);
            if denom <= 0.0 {
                bad_point.set(Some(y));
                return 0.0;
            }
            d * d / denom
        },
        &opts,
    );
    if let Some(y) = bad_point.get() {
        return Err(Error::Domain(format!("phi'' + eta phi'^2 vanishes at y = {y}")));
    }
    let rhs = integral / mass / (1.0 - eta);
    let params = BTreeMap::from([("eta".to_string(), eta)]);
    Ok(InequalityReport::new(
        &format!("poincare[{}; {}]", dens.name, h.name),
        params,
        lhs,
        rhs,
        err_l + err_r,
        conv_l && conv_r,
        opts.abs_tol,
    ))
}

/// Checks `Var(h) <= 4 int h'^2 dmu` under the Gumbel measure.
pub fn check_gumbel_poincare(h: &ScalarFunction) -> Result<InequalityReport> {
    if !h.decays {
        return Err(Error::invalid(format!("{} lacks the tail-decay certificate", h.name)));
    }
    let dens = LogConcaveDensity::gumbel();
    let opts = QuadratureOptions::default();
    let (lhs, err_l, conv_l) = variance(&dens, h, &opts);
    let (mass, _, _) = dens.expect(|_| 1.0, &opts);
    let (integral, err_r, conv_r) = dens.expect(|y| h.deriv(y).powi(2), &opts);
    Ok(InequalityReport::new(
        &format!("gumbel-poincare[{}]", h.name),
        BTreeMap::new(),
        lhs,
        4.0 * integral / mass,
        err_l + 4.0 * err_r,
        conv_l && conv_r,
        opts.abs_tol,
    ))
}

/// Checks the scalar modified log-Sobolev inequality under the Gumbel measure:
/// `Ent(exp(lambda h)) <= C(rho) lambda^2 int h'^2 exp(lambda h) dmu` with
/// `C(rho) = 2 ((1+rho)/(1-rho))^2 exp(2 sqrt(5) rho)`, for
/// `|lambda| * sup|h'| <= rho < 1`.
pub fn check_modified_log_sobolev(h: &ScalarFunction, lambda: f64, rho: f64) -> Result<InequalityReport> {
    let b = h.grad_bound.ok_or_else(|| Error::invalid(format!("{} has no declared bound on |h'|", h.name)))?;
    if !(rho < 1.0 && lambda.abs() * b <= rho) {
        return Err(Error::Domain(format!(
            "need |lambda| * b <= rho < 1, got |lambda| = {}, b = {b}, rho = {rho}",
            lambda.abs()
        )));
    }
    let dens = LogConcaveDensity::gumbel();
    let opts = QuadratureOptions::default();
    let (mass, e0, c0) = dens.expect(|_| 1.0, &opts);
    let (m_raw, e1, c1) = dens.expect(|y| (lambda * h.eval(y)).exp(), &opts);
    let m = m_raw / mass;
    let log_m = m.ln();
    // Ent(f) = E[f ln(f / m) - f + m]; the integrand is nonnegative.
    let (ent_raw, e2, c2) = dens.expect(
        |y| {
            let lh = lambda * h.eval(y);
            let f = lh.exp();
            f * (lh - log_m) - f + m
        },
        &opts,
    );
    let (grad_raw, e3, c3) = dens.expect(|y| h.deriv(y).powi(2) * (lambda * h.eval(y)).exp(), &opts);
    let lhs = ent_raw / mass;
    let rhs = log_sobolev_prefactor(rho) * lambda * lambda * grad_raw / mass;
    let params = BTreeMap::from([("lambda".to_string(), lambda), ("rho".to_string(), rho), ("b".to_string(), b)]);
    Ok(InequalityReport::new(
        &format!("modified-log-sobolev[{}]", h.name),
        params,
        lhs,
        rhs,
        e0 + e1 + e2 + e3,
        c0 && c1 && c2 && c3,
        opts.abs_tol,
    ))
}
