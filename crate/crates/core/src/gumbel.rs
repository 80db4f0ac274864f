//! Zero-mean Gumbel distribution primitives and seedable random streams.
//!
//! The distribution used throughout is the standard Gumbel shifted by the
//! Euler-Mascheroni constant so that its mean is zero:
//! `G(y) = exp(-exp(-(y + c)))`, variance `pi^2 / 6`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::score::Score;

/// Euler-Mascheroni constant, the location shift making the Gumbel mean zero.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512;

/// Variance of the zero-mean Gumbel distribution, `pi^2 / 6`.
pub const GUMBEL_VARIANCE: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// Truncated support used for all scalar Gumbel integrals.
pub const GUMBEL_DOMAIN: (f64, f64) = (-15.0, 35.0);

pub fn gumbel_cdf(y: f64) -> f64 {
    (-(-(y + EULER_GAMMA)).exp()).exp()
}

pub fn gumbel_pdf(y: f64) -> f64 {
    let t = y + EULER_GAMMA;
    (-(t + (-t).exp())).exp()
}

/// Deterministic random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id selecting an independent keystream,
/// so streams for different ids never overlap.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream sharing this stream's seed.
    pub fn fork(&self, stream_id: u64) -> RngStream {
        RngStream::new(self.seed, stream_id)
    }

    /// Uniform on the open interval (0, 1): `(k + 0.5) / 2^53` for a 53-bit `k`.
    #[inline]
    pub fn open_unit(&mut self) -> f64 {
        let k = self.rng.next_u64() >> 11;
        (k as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// One zero-mean Gumbel draw by inverse CDF.
#[inline]
pub fn sample_gumbel(rng: &mut RngStream) -> f64 {
    let u = rng.open_unit();
    -(-u.ln()).ln() - EULER_GAMMA
}

/// Online max-shifted log-sum-exp accumulator over extended-real scores.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
    any_finite: bool,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, sum: 0.0, any_finite: false }
    }

    #[inline]
    pub fn push(&mut self, s: Score) {
        let Score::Finite(v) = s else { return };
        if !self.any_finite {
            self.max = v;
            self.sum = 1.0;
            self.any_finite = true;
        } else if v > self.max {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.sum += (v - self.max).exp();
        }
    }

    /// `None` when no finite score has been pushed.
    pub fn value(&self) -> Option<f64> {
        self.any_finite.then(|| self.max + self.sum.ln())
    }
}

/// Numerically stable `log sum exp(scores)`; `-inf` entries contribute zero.
pub fn logsumexp(scores: &[Score]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::invalid("logsumexp of an empty list"));
    }
    let mut acc = LogSumExp::new();
    for &s in scores {
        acc.push(s);
    }
    acc.value().ok_or(Error::Infeasible)
}

/// Convenience wrapper over plain finite values.
pub fn logsumexp_f64(values: &[f64]) -> Result<f64> {
    let scores: Vec<Score> = values.iter().map(|&v| Score::Finite(v)).collect();
    logsumexp(&scores)
}
