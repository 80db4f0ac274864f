//! Gibbs samplers built on MAP perturbations.
//!
//! [`ExactSampler`] perturbs every configuration with its own Gumbel draw and
//! returns the argmax, which is distributed exactly by the Gibbs law.
//! [`sample_sequential`] assigns one variable at a time from ratios of
//! estimated low-dimensional perturbed MAP expectations, restarting from the
//! first variable whenever the leftover restart outcome is drawn.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gumbel::{sample_gumbel, RngStream};
use crate::model::{Configuration, DiscreteModel};
use crate::perturbation::{estimate_expected_vj, EstimateOptions, EstimateReport};
use crate::score::Score;
use crate::solvers::SolverKind;

pub const DEFAULT_MAX_RESTARTS: usize = 1000;

/// Gumbel-max sampler with a full perturbation table; scores are cached.
#[derive(Debug, Clone)]
pub struct ExactSampler {
    model: DiscreteModel,
    scores: Vec<f64>,
}

impl ExactSampler {
    pub fn new(model: &DiscreteModel) -> Result<Self> {
        let scores: Vec<f64> = model.configurations()?.map(|x| model.score_unchecked(&x).to_f64()).collect();
        if scores.iter().all(|s| *s == f64::NEG_INFINITY) {
            return Err(Error::Infeasible);
        }
        Ok(ExactSampler { model: model.clone(), scores })
    }

    /// Rank of the sampled configuration.
    pub fn draw_rank(&self, rng: &mut RngStream) -> usize {
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for (rank, &s) in self.scores.iter().enumerate() {
            // every configuration consumes a draw so the table is always full
            let v = s + sample_gumbel(rng);
            if v > best {
                best = v;
                arg = rank;
            }
        }
        arg
    }

    pub fn draw(&self, rng: &mut RngStream) -> Configuration {
        self.model.config_from_rank(self.draw_rank(rng))
    }
}

/// One exact Gibbs sample via `argmax_x theta(x) + gamma(x)` with a full table.
pub fn sample_exact(model: &DiscreteModel, rng: &mut RngStream) -> Result<Configuration> {
    Ok(ExactSampler::new(model)?.draw(rng))
}

/// Source of `E[V_j]` estimates for the sequential sampler.
pub trait ExpectationEstimator {
    /// Estimate `E[V_j]` for `j = prefix.len() + 1` from `samples` draws.
    fn estimate(
        &mut self,
        model: &DiscreteModel,
        prefix: &[usize],
        samples: usize,
        rng: &mut RngStream,
    ) -> Result<EstimateReport>;
}

/// Sample-mean estimator backed by a MAP solver.
#[derive(Debug, Clone, Copy)]
pub struct SampleMeanEstimator {
    pub delta: f64,
    pub solver: SolverKind,
}

impl ExpectationEstimator for SampleMeanEstimator {
    fn estimate(
        &mut self,
        model: &DiscreteModel,
        prefix: &[usize],
        samples: usize,
        rng: &mut RngStream,
    ) -> Result<EstimateReport> {
        estimate_expected_vj(model, prefix, &EstimateOptions::new(samples, self.delta, self.solver), rng)
    }
}

/// Distribution over `X_j` plus the restart outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequentialStepDistribution {
    /// 1-based coordinate being assigned.
    pub j: usize,
    pub probs: Vec<f64>,
    pub restart_prob: f64,
    /// Set when any raw ratio exceeded 1 or the ratios summed above 1.
    pub clamped: bool,
    /// Unclamped `exp(E[V_{j+1}] - E[V_j])` per label.
    pub raw_ratios: Vec<f64>,
}

impl SequentialStepDistribution {
    /// Builds the step distribution from (estimated) expectations of `V_j`
    /// and of `V_{j+1}` for each label of `x_j`.
    ///
    /// Ratios are clamped to `[0, 1]`; if they then sum above 1 they are
    /// rescaled to sum to 1 and the restart probability is 0.
    pub fn from_expectations(j: usize, expected_vj: f64, expected_next: &[f64]) -> Self {
        let raw_ratios: Vec<f64> = expected_next.iter().map(|e| (e - expected_vj).exp()).collect();
        let mut clamped = raw_ratios.iter().any(|&r| r > 1.0);
        let mut probs: Vec<f64> = raw_ratios.iter().map(|r| r.clamp(0.0, 1.0)).collect();
        let total: f64 = probs.iter().sum();
        let restart_prob = if total > 1.0 {
            clamped = true;
            for p in &mut probs {
                *p /= total;
            }
            0.0
        } else {
            1.0 - total
        };
        SequentialStepDistribution { j, probs, restart_prob, clamped, raw_ratios }
    }

    /// Index of the drawn label, or `None` for a restart.
    pub fn draw(&self, rng: &mut RngStream) -> Option<usize> {
        let u = rng.unit();
        let mut acc = 0.0;
        for (k, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return Some(k);
            }
        }
        None
    }
}

/// Estimates the step distribution for coordinate `j = prefix.len() + 1`.
/// Returns the distribution and the estimator reports (`E[V_j]` first).
pub fn step_distribution(
    model: &DiscreteModel,
    prefix: &[usize],
    samples: usize,
    estimator: &mut dyn ExpectationEstimator,
    rng: &mut RngStream,
) -> Result<(SequentialStepDistribution, Vec<EstimateReport>)> {
    let j = prefix.len() + 1;
    if j > model.n() {
        return Err(Error::invalid("prefix already assigns every variable"));
    }
    let current = estimator.estimate(model, prefix, samples, rng)?;
    let mut reports = vec![current];
    let mut extended = prefix.to_vec();
    extended.push(0);
    for label in 0..model.domain_size(j - 1) {
        *extended.last_mut().expect("nonempty") = label;
        reports.push(estimator.estimate(model, &extended, samples, rng)?);
    }
    let next: Vec<f64> = reports[1..].iter().map(|r| r.sample_mean).collect();
    Ok((SequentialStepDistribution::from_expectations(j, reports[0].sample_mean, &next), reports))
}

/// Per-coordinate sample counts `M_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MjSchedule(Vec<usize>);

impl MjSchedule {
    pub fn constant(samples: usize) -> Self {
        MjSchedule(vec![samples])
    }

    /// Explicit counts for `j = 1..=n`; a single value is broadcast.
    pub fn per_step(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() || counts.contains(&0) {
            return Err(Error::invalid("M_j schedule needs positive counts"));
        }
        Ok(MjSchedule(counts))
    }

    /// `M_j` for 1-based `j`.
    pub fn get(&self, j: usize) -> usize {
        if self.0.len() == 1 {
            self.0[0]
        } else {
            self.0[j - 1]
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.0.len() != 1 && self.0.len() != n {
            return Err(Error::invalid(format!("M_j schedule has {} entries for {n} variables", self.0.len())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisitedStep {
    pub distribution: SequentialStepDistribution,
    pub estimates: Vec<EstimateReport>,
    /// Label index drawn, or `None` if the step restarted.
    pub outcome: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerTrace {
    pub accepted: Option<Configuration>,
    pub restarts: usize,
    pub steps: Vec<VisitedStep>,
    /// Total `V` evaluations across all estimates.
    pub solver_calls: usize,
    /// True when the restart budget ran out before acceptance.
    pub exhausted: bool,
}

/// Runs the sequential sampler until a full configuration is accepted or
/// more than `max_restarts` restarts have been drawn.
pub fn sample_sequential(
    model: &DiscreteModel,
    schedule: &MjSchedule,
    estimator: &mut dyn ExpectationEstimator,
    rng: &mut RngStream,
    max_restarts: usize,
) -> Result<SamplerTrace> {
    schedule.check(model.n())?;
    let mut trace = SamplerTrace { accepted: None, restarts: 0, steps: Vec::new(), solver_calls: 0, exhausted: false };
    'attempt: loop {
        let mut prefix = Vec::with_capacity(model.n());
        for j in 1..=model.n() {
            let (dist, estimates) = step_distribution(model, &prefix, schedule.get(j), estimator, rng)?;
            trace.solver_calls += estimates.iter().map(|r| r.samples).sum::<usize>();
            let outcome = dist.draw(rng);
            trace.steps.push(VisitedStep { distribution: dist, estimates, outcome });
            match outcome {
                Some(label) => prefix.push(label),
                None => {
                    trace.restarts += 1;
                    if trace.restarts > max_restarts {
                        trace.exhausted = true;
                        return Ok(trace);
                    }
                    continue 'attempt;
                }
            }
        }
        if model.score_unchecked(&prefix) == Score::NegInf {
            // only reachable with forbidden configurations and noisy estimates
            return Err(Error::Internal("sequential sampler accepted a forbidden configuration".into()));
        }
        trace.accepted = Some(Configuration(prefix));
        return Ok(trace);
    }
}
