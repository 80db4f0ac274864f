//! Fixed suite of bounded smooth test functions with closed-form
//! derivatives and declared `sup |h'|` bounds.
//!
//! Suite version 1. Adding, removing or changing a function changes every
//! inequality report built on the suite; bump [`SUITE_VERSION`] if you do.

use super::inequality::ScalarFunction;

pub const SUITE_VERSION: u32 = 1;

fn sech2(y: f64) -> f64 {
    let c = y.cosh();
    1.0 / (c * c)
}

fn bump(center: f64) -> ScalarFunction {
    ScalarFunction::new(
        format!("bump({center})"),
        move |y: f64| (-(y - center).powi(2) / 2.0).exp(),
        move |y: f64| -(y - center) * (-(y - center).powi(2) / 2.0).exp(),
        // max of |t| exp(-t^2/2) is at t = 1
        Some((-0.5f64).exp()),
    )
}

/// The ten suite functions, in a fixed order.
pub fn standard_suite() -> Vec<ScalarFunction> {
    vec![
        ScalarFunction::new("tanh", f64::tanh, sech2, Some(1.0)),
        ScalarFunction::new("tanh(y/2)", |y: f64| (y / 2.0).tanh(), |y: f64| 0.5 * sech2(y / 2.0), Some(0.5)),
        ScalarFunction::new("arctan", f64::atan, |y: f64| 1.0 / (1.0 + y * y), Some(1.0)),
        ScalarFunction::new(
            "arctan(y-2)",
            |y: f64| (y - 2.0).atan(),
            |y: f64| 1.0 / (1.0 + (y - 2.0).powi(2)),
            Some(1.0),
        ),
        ScalarFunction::new("sin", f64::sin, f64::cos, Some(1.0)),
        bump(-2.0),
        bump(-1.0),
        bump(0.0),
        bump(1.0),
        bump(3.0),
    ]
}

pub fn by_name(name: &str) -> Option<ScalarFunction> {
    match name {
        "linear" => Some(linear()),
        _ => standard_suite().into_iter().find(|f| f.name == name),
    }
}

/// `h(y) = y`.
pub fn linear() -> ScalarFunction {
    ScalarFunction::new("linear", |y| y, |_| 1.0, Some(1.0))
}

pub fn constant(value: f64) -> ScalarFunction {
    ScalarFunction::new(format!("constant({value})"), move |_| value, |_| 0.0, Some(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_has_ten_distinct_functions() {
        let s = standard_suite();
        assert_eq!(s.len(), 10);
        let mut names: Vec<&str> = s.iter().map(|f| f.name.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 10);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for f in standard_suite() {
            for k in -40..=40 {
                let y = k as f64 * 0.25;
                let fd = (f.eval(y + h) - f.eval(y - h)) / (2.0 * h);
                assert!((fd - f.deriv(y)).abs() < 1e-7, "{} at {y}", f.name);
                assert!(f.deriv(y).abs() <= f.grad_bound.unwrap() + 1e-12, "{} bound", f.name);
            }
        }
    }
}
