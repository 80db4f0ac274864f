//! Exact MAP solvers for (optionally perturbed) discrete models.

mod flow;
mod mincut;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use flow::{max_flow, FlowNetwork, FlowResult};
pub use mincut::map_mincut;

use crate::error::{Error, Result};
use crate::model::{Configuration, DiscreteModel};
use crate::perturbation::PerturbationTable;
use crate::score::Score;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Brute,
    Mincut,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Brute => "brute",
            SolverKind::Mincut => "mincut",
        })
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" | "bruteforce" => Ok(SolverKind::Brute),
            "mincut" | "graphcut" => Ok(SolverKind::Mincut),
            other => Err(Error::invalid(format!("unknown solver '{other}'"))),
        }
    }
}

/// Maximizing configuration and value of `theta + gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapResult {
    pub argmax: Configuration,
    pub value: f64,
    pub solver: SolverKind,
}

/// Calls `visit` on every configuration in lexicographic order, reusing one buffer.
pub(crate) fn for_each_config(sizes: &[usize], mut visit: impl FnMut(&[usize])) {
    let mut x = vec![0usize; sizes.len()];
    loop {
        visit(&x);
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            x[i] += 1;
            if x[i] < sizes[i] {
                break;
            }
            x[i] = 0;
        }
    }
}

/// Exhaustive maximization of `theta(x) + gamma(x)`. Ties go to the
/// lexicographically smallest configuration.
pub fn map_bruteforce(model: &DiscreteModel, perturb: Option<&PerturbationTable>) -> Result<MapResult> {
    model.check_enumerable()?;
    if let Some(t) = perturb {
        t.check_compatible(model)?;
    }
    let sizes = model.domain_sizes();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_config(&sizes, |x| {
        let Score::Finite(s) = model.score_unchecked(x) else { return };
        let v = s + perturb.map_or(0.0, |t| t.gamma_unchecked(model, x));
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((x.to_vec(), v));
        }
    });
    let (argmax, value) = best.ok_or(Error::Infeasible)?;
    Ok(MapResult { argmax: Configuration(argmax), value, solver: SolverKind::Brute })
}

pub fn solve_map(model: &DiscreteModel, perturb: Option<&PerturbationTable>, solver: SolverKind) -> Result<MapResult> {
    match solver {
        SolverKind::Brute => map_bruteforce(model, perturb),
        SolverKind::Mincut => map_mincut(model, perturb),
    }
}
