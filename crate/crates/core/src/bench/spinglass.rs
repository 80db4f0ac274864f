//! Grid Ising spin glasses with random local fields and attractive couplings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gumbel::RngStream;
use crate::model::{DiscreteModel, ModelBuilder};

/// Local fields are drawn from `[-FIELD_RANGE, FIELD_RANGE]`.
pub const FIELD_RANGE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinGlassConfig {
    pub rows: usize,
    pub cols: usize,
    /// Upper bound `c` of the uniform coupling distribution `[0, c]`.
    pub coupling: f64,
    pub seed: u64,
}

impl SpinGlassConfig {
    pub fn new(rows: usize, cols: usize, coupling: f64, seed: u64) -> Self {
        SpinGlassConfig { rows, cols, coupling, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::invalid("spin glass grid needs at least one row and column"));
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(Error::invalid(format!(
                "coupling bound must be finite and nonnegative, got {}",
                self.coupling
            )));
        }
        Ok(())
    }

    pub fn variables(&self) -> usize {
        self.rows * self.cols
    }

    /// 4-neighbour edges `(i, j)` with `i < j`, row-major variable order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(2 * self.variables());
        for r in 0..self.rows {
            for c in 0..self.cols {
                let i = r * self.cols + c;
                if c + 1 < self.cols {
                    edges.push((i, i + 1));
                }
                if r + 1 < self.rows {
                    edges.push((i, i + self.cols));
                }
            }
        }
        edges
    }

    /// Generates the instance from the stream `(seed, 0)`.
    pub fn generate(&self) -> Result<DiscreteModel> {
        generate_spin_glass(self, &mut RngStream::new(self.seed, 0))
    }
}

/// `theta(x) = sum_i theta_i x_i + sum_{ij} theta_ij x_i x_j` over spins
/// `x in {-1, +1}` (label indices 0 and 1), with `theta_i ~ U[-1, 1]` and
/// `theta_ij ~ U[0, c]`. All fields are drawn before any coupling, so models
/// sharing a seed differ across `c` only by the scale of their couplings.
pub fn generate_spin_glass(cfg: &SpinGlassConfig, rng: &mut RngStream) -> Result<DiscreteModel> {
    cfg.validate()?;
    let n = cfg.variables();
    let mut b = ModelBuilder::spins(n);
    for i in 0..n {
        let field = rng.uniform(-FIELD_RANGE, FIELD_RANGE);
        b = b.unary_scores(i, &[-field, field]);
    }
    for (i, j) in cfg.edges() {
        let w = cfg.coupling * rng.unit();
        b = b.pairwise_table(i, j, &[w, -w, -w, w]);
    }
    b.build()
}
