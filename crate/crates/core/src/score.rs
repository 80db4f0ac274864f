//! Extended-real scores: a finite value or the explicit `-inf` sentinel used
//! for configurations outside the model's support.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Score {
    Finite(f64),
    NegInf,
}

impl Score {
    pub const ZERO: Score = Score::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, Score::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Score::Finite(v) => Some(v),
            Score::NegInf => None,
        }
    }

    /// Lossy view as `f64`; the sentinel maps to `f64::NEG_INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            Score::Finite(v) => v,
            Score::NegInf => f64::NEG_INFINITY,
        }
    }
}

impl From<f64> for Score {
    fn from(v: f64) -> Self {
        Score::Finite(v)
    }
}

impl Add for Score {
    type Output = Score;

    fn add(self, rhs: Score) -> Score {
        match (self, rhs) {
            (Score::Finite(a), Score::Finite(b)) => Score::Finite(a + b),
            _ => Score::NegInf,
        }
    }
}

impl Add<f64> for Score {
    type Output = Score;

    fn add(self, rhs: f64) -> Score {
        self + Score::Finite(rhs)
    }
}

impl AddAssign for Score {
    fn add_assign(&mut self, rhs: Score) {
        *self = *self + rhs;
    }
}

impl AddAssign<f64> for Score {
    fn add_assign(&mut self, rhs: f64) {
        *self = *self + rhs;
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Score::NegInf, Score::NegInf) => Some(Ordering::Equal),
            (Score::NegInf, Score::Finite(_)) => Some(Ordering::Less),
            (Score::Finite(_), Score::NegInf) => Some(Ordering::Greater),
            (Score::Finite(a), Score::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Finite(v) => write!(f, "{v}"),
            Score::NegInf => f.write_str("-inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentinel_absorbs_finite_values() {
        assert_eq!(Score::NegInf + 3.0, Score::NegInf);
        assert_eq!(Score::Finite(1.0) + Score::NegInf, Score::NegInf);
        assert_eq!(Score::Finite(1.0) + Score::Finite(2.5), Score::Finite(3.5));
    }

    #[test]
    fn ordering_puts_sentinel_below_everything() {
        assert!(Score::NegInf < Score::Finite(-1e300));
        assert!(Score::Finite(0.0) > Score::NegInf);
        assert_eq!(Score::NegInf.to_f64(), f64::NEG_INFINITY);
    }
}
