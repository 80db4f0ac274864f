//! Gumbel perturbation tables, perturbed MAP values `V_j`, and sample-mean
//! estimation of their expectations.
//!
//! Coordinates in this module follow the 1-based convention of `V_j`: for a
//! prefix of length `j - 1`, `V_j` maximizes over the remaining `n - j + 1`
//! variables with only their low-dimensional perturbations added. `V_{n+1}`
//! is the unperturbed score of the full prefix.

use serde::{Deserialize, Serialize};

use crate::concentration::{corollary2_bound, BoundParams};
use crate::error::{Error, Result};
use crate::gumbel::{sample_gumbel, RngStream};
use crate::model::{Configuration, DiscreteModel};
use crate::score::Score;
use crate::solvers::{for_each_config, map_mincut, solve_map, MapResult, SolverKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    /// One draw per full configuration.
    Full,
    /// One draw per `(variable, label)` pair.
    LowDim,
}

/// A collection of i.i.d. zero-mean Gumbel draws.
///
/// Full tables are indexed by configuration rank; low-dimensional tables by
/// the flat `(i, x_i)` offset, variables in order.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationTable {
    kind: PerturbationKind,
    values: Vec<f64>,
    offsets: Vec<usize>,
}

fn label_offsets(model: &DiscreteModel) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(model.n());
    let mut acc = 0;
    for i in 0..model.n() {
        offsets.push(acc);
        acc += model.domain_size(i);
    }
    offsets
}

impl PerturbationTable {
    /// Wraps explicit low-dimensional values (`sum_i |X_i|` entries).
    pub fn low_dim(model: &DiscreteModel, values: Vec<f64>) -> Result<Self> {
        if values.len() != model.total_labels() {
            return Err(Error::invalid(format!(
                "low-dimensional table needs {} entries, got {}",
                model.total_labels(),
                values.len()
            )));
        }
        Ok(PerturbationTable { kind: PerturbationKind::LowDim, values, offsets: label_offsets(model) })
    }

    /// Wraps explicit full values (`|X|` entries in configuration-rank order).
    pub fn full(model: &DiscreteModel, values: Vec<f64>) -> Result<Self> {
        let count = model.check_enumerable()?;
        if values.len() as u128 != count {
            return Err(Error::invalid(format!("full table needs {count} entries, got {}", values.len())));
        }
        Ok(PerturbationTable { kind: PerturbationKind::Full, values, offsets: Vec::new() })
    }

    pub fn kind(&self) -> PerturbationKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Flat index of `gamma_i(x_i)` in a low-dimensional table.
    pub fn low_dim_index(&self, var: usize, label: usize) -> usize {
        self.offsets[var] + label
    }

    #[inline]
    pub fn low_dim_entry(&self, var: usize, label: usize) -> f64 {
        self.values[self.offsets[var] + label]
    }

    /// Errors with an internal error if the table does not fit the model.
    pub fn check_compatible(&self, model: &DiscreteModel) -> Result<()> {
        let ok = match self.kind {
            PerturbationKind::LowDim => {
                self.values.len() == model.total_labels() && self.offsets == label_offsets(model)
            }
            PerturbationKind::Full => model.config_count() == Some(self.values.len() as u128),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Internal("perturbation table does not match the model's index set".into()))
        }
    }

    /// `gamma(x)` for a valid configuration of a compatible model.
    #[inline]
    pub(crate) fn gamma_unchecked(&self, model: &DiscreteModel, x: &[usize]) -> f64 {
        match self.kind {
            PerturbationKind::Full => self.values[model.config_rank(x)],
            PerturbationKind::LowDim => x.iter().zip(&self.offsets).map(|(&xi, &o)| self.values[o + xi]).sum(),
        }
    }

    /// The entries for variables `first_var..n` as a table over the slice
    /// that fixes the first `first_var` variables.
    pub fn low_dim_suffix(&self, slice: &DiscreteModel, first_var: usize) -> Result<PerturbationTable> {
        if self.kind != PerturbationKind::LowDim {
            return Err(Error::invalid("only low-dimensional tables can be restricted to a suffix"));
        }
        let start = self.offsets.get(first_var).copied().unwrap_or(self.values.len());
        PerturbationTable::low_dim(slice, self.values[start..].to_vec())
            .map_err(|_| Error::Internal("perturbation table does not match the model's suffix".into()))
    }
}

/// Fills a table of the requested kind with independent Gumbel draws.
pub fn draw_perturbation(
    model: &DiscreteModel,
    kind: PerturbationKind,
    rng: &mut RngStream,
) -> Result<PerturbationTable> {
    let len = match kind {
        PerturbationKind::LowDim => model.total_labels(),
        PerturbationKind::Full => model.check_enumerable()? as usize,
    };
    let values = (0..len).map(|_| sample_gumbel(rng)).collect();
    Ok(PerturbationTable {
        kind,
        values,
        offsets: match kind {
            PerturbationKind::LowDim => label_offsets(model),
            PerturbationKind::Full => Vec::new(),
        },
    })
}

/// `theta(x) + gamma(x)`.
pub fn perturbed_value(model: &DiscreteModel, table: &PerturbationTable, x: &[usize]) -> Result<Score> {
    model.validate(x)?;
    table.check_compatible(model)?;
    Ok(model.score_unchecked(x) + table.gamma_unchecked(model, x))
}

/// `V_j` for the given prefix (`j = prefix.len() + 1`) and a low-dimensional
/// table over the full model; entries of prefix variables are ignored. The
/// returned argmax covers the suffix variables only.
pub fn v_j(
    model: &DiscreteModel,
    prefix: &[usize],
    table: &PerturbationTable,
    solver: SolverKind,
) -> Result<MapResult> {
    table.check_compatible(model)?;
    let slice = model.conditional_slice(prefix)?;
    if slice.n() == 0 {
        return match slice.score_unchecked(&[]) {
            Score::Finite(v) => Ok(MapResult { argmax: Configuration::default(), value: v, solver }),
            Score::NegInf => Err(Error::Infeasible),
        };
    }
    let sub = table.low_dim_suffix(&slice, prefix.len())?;
    solve_map(&slice, Some(&sub), solver)
}

/// Indicator (sub)gradient of `V_1` with respect to a low-dimensional table:
/// 1 at every `(i, x_i)` of the maximizing configuration, 0 elsewhere.
pub fn indicator_gradient(model: &DiscreteModel, argmax: &[usize]) -> Vec<f64> {
    let offsets = label_offsets(model);
    let mut grad = vec![0.0; model.total_labels()];
    for (i, &xi) in argmax.iter().enumerate() {
        grad[offsets[i] + xi] = 1.0;
    }
    grad
}

/// Repeated independent draws of `V_j` for one fixed prefix.
///
/// The conditional slice is built once; with the brute-force solver its
/// feasible suffix scores are cached as well.
#[derive(Debug, Clone)]
pub struct VjSampler {
    slice: DiscreteModel,
    solver: SolverKind,
    gamma: Vec<f64>,
    offsets: Vec<usize>,
    cached: Option<(Vec<usize>, Vec<f64>)>,
}

impl VjSampler {
    pub fn new(model: &DiscreteModel, prefix: &[usize], solver: SolverKind) -> Result<Self> {
        let slice = model.conditional_slice(prefix)?;
        let cached = if solver == SolverKind::Brute || slice.n() == 0 {
            slice.check_enumerable()?;
            let mut configs = Vec::new();
            let mut scores = Vec::new();
            for_each_config(&slice.domain_sizes(), |x| {
                if let Score::Finite(s) = slice.score_unchecked(x) {
                    configs.extend_from_slice(x);
                    scores.push(s);
                }
            });
            if scores.is_empty() {
                return Err(Error::Infeasible);
            }
            Some((configs, scores))
        } else {
            // surface unsupported models before any sampling
            map_mincut(&slice, None)?;
            None
        };
        Ok(VjSampler { gamma: vec![0.0; slice.total_labels()], offsets: label_offsets(&slice), slice, solver, cached })
    }

    /// Number of free (suffix) variables.
    pub fn free_vars(&self) -> usize {
        self.slice.n()
    }

    /// One realization of `V_j` with fresh perturbations.
    pub fn draw(&mut self, rng: &mut RngStream) -> Result<f64> {
        for g in &mut self.gamma {
            *g = sample_gumbel(rng);
        }
        match &self.cached {
            Some((configs, scores)) => {
                let k = self.slice.n();
                let mut best = f64::NEG_INFINITY;
                for (c, &s) in scores.iter().enumerate() {
                    let x = &configs[c * k..(c + 1) * k];
                    let v = s + x.iter().zip(&self.offsets).map(|(&xi, &o)| self.gamma[o + xi]).sum::<f64>();
                    if v > best {
                        best = v;
                    }
                }
                Ok(best)
            }
            None => {
                let table = PerturbationTable {
                    kind: PerturbationKind::LowDim,
                    values: self.gamma.clone(),
                    offsets: self.offsets.clone(),
                };
                Ok(solve_map(&self.slice, Some(&table), self.solver)?.value)
            }
        }
    }
}

/// Sample-mean estimate of `E[V_j]` with its deviation radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    /// 1-based coordinate of `V_j`.
    pub j: usize,
    pub prefix: Vec<usize>,
    pub sample_mean: f64,
    /// Number of samples `M`.
    pub samples: usize,
    pub delta: f64,
    /// One-sided deviation radius at confidence `1 - delta` with
    /// `a^2 = n - j + 1`, `b = 1`.
    pub radius: f64,
    /// Sample standard deviation divided by `sqrt(M)` (0 when `M = 1`).
    pub std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_samples: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub samples: usize,
    pub delta: f64,
    pub solver: SolverKind,
    pub keep_samples: bool,
}

impl EstimateOptions {
    pub fn new(samples: usize, delta: f64, solver: SolverKind) -> Self {
        EstimateOptions { samples, delta, solver, keep_samples: false }
    }
}

/// Mean and standard error of a sample; the error is 0 for a single value.
pub(crate) fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Draws `M` independent realizations of `V_j` (`j = prefix.len() + 1`) and
/// reports their mean.
pub fn estimate_expected_vj(
    model: &DiscreteModel,
    prefix: &[usize],
    opts: &EstimateOptions,
    rng: &mut RngStream,
) -> Result<EstimateReport> {
    let mut sampler = VjSampler::new(model, prefix, opts.solver)?;
    estimate_with(&mut sampler, model.n(), prefix, opts, rng)
}

pub(crate) fn estimate_with(
    sampler: &mut VjSampler,
    n: usize,
    prefix: &[usize],
    opts: &EstimateOptions,
    rng: &mut RngStream,
) -> Result<EstimateReport> {
    if opts.samples == 0 {
        return Err(Error::invalid("sample count M must be at least 1"));
    }
    let j = prefix.len() + 1;
    let radius = corollary2_bound(&BoundParams::new((n + 1 - j) as f64, 1.0, opts.samples, opts.delta)?)?;
    let samples = (0..opts.samples).map(|_| sampler.draw(rng)).collect::<Result<Vec<f64>>>()?;
    let (sample_mean, std_error) = mean_and_std_error(&samples);
    Ok(EstimateReport {
        j,
        prefix: prefix.to_vec(),
        sample_mean,
        samples: opts.samples,
        delta: opts.delta,
        radius,
        std_error,
        raw_samples: opts.keep_samples.then_some(samples),
    })
}

/// A centered sample mean `mean_M(V_1) - reference`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationSample {
    pub value: f64,
    pub reference_mean: f64,
}

/// High-sample estimate of `E[V_1]` used to center deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMean {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationExperiment {
    pub reference: ReferenceMean,
    /// `(M, centered sample means)` in the order the sample sizes were given.
    pub per_m: Vec<(usize, Vec<DeviationSample>)>,
}

/// Stream id reserved for the reference run.
pub const REFERENCE_STREAM: u64 = u64::MAX;

/// Stream id for replicate `replicate` of the `m_index`-th sample size.
pub fn replicate_stream(m_index: usize, replicate: usize) -> u64 {
    ((m_index as u64) << 32) | replicate as u64
}

pub fn reference_mean(model: &DiscreteModel, samples: usize, seed: u64, solver: SolverKind) -> Result<ReferenceMean> {
    let mut rng = RngStream::new(seed, REFERENCE_STREAM);
    let r = estimate_expected_vj(model, &[], &EstimateOptions::new(samples, 0.5, solver), &mut rng)?;
    Ok(ReferenceMean { mean: r.sample_mean, std_error: r.std_error, samples })
}

/// For each `M`, `replicates` independent `M`-sample means of `V_1`, each
/// centered on a `reference_samples`-sample reference mean.
pub fn deviation_experiment(
    model: &DiscreteModel,
    m_values: &[usize],
    replicates: usize,
    reference_samples: usize,
    seed: u64,
    solver: SolverKind,
) -> Result<DeviationExperiment> {
    if replicates == 0 || reference_samples == 0 || m_values.contains(&0) {
        return Err(Error::invalid("sample sizes and replicate counts must be at least 1"));
    }
    let reference = reference_mean(model, reference_samples, seed, solver)?;
    let mut sampler = VjSampler::new(model, &[], solver)?;
    let mut per_m = Vec::with_capacity(m_values.len());
    for (k, &m) in m_values.iter().enumerate() {
        let mut devs = Vec::with_capacity(replicates);
        for r in 0..replicates {
            let mut rng = RngStream::new(seed, replicate_stream(k, r));
            let mut sum = 0.0;
            for _ in 0..m {
                sum += sampler.draw(&mut rng)?;
            }
            devs.push(DeviationSample { value: sum / m as f64 - reference.mean, reference_mean: reference.mean });
        }
        per_m.push((m, devs));
    }
    Ok(DeviationExperiment { reference, per_m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gumbel::{logsumexp_f64, GUMBEL_VARIANCE};
    use crate::model::ModelBuilder;
    use crate::solvers::map_bruteforce;

    fn three_var(rng: &mut RngStream) -> DiscreteModel {
        let mut b = ModelBuilder::with_domain_sizes(&[2, 3, 2]);
        for (i, k) in [2, 3, 2].into_iter().enumerate() {
            for l in 0..k {
                b = b.unary(i, l, rng.uniform(-1.0, 1.0));
            }
        }
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            for a in 0..[2, 3, 2][i] {
                for c in 0..[2, 3, 2][j] {
                    b = b.pairwise(i, j, a, c, rng.uniform(-1.0, 1.0));
                }
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn table_sizes() {
        let m = ModelBuilder::spins(2).build().unwrap();
        let mut rng = RngStream::new(1, 0);
        assert_eq!(draw_perturbation(&m, PerturbationKind::LowDim, &mut rng).unwrap().len(), 4);
        assert_eq!(draw_perturbation(&m, PerturbationKind::Full, &mut rng).unwrap().len(), 4);
        let big = ModelBuilder::spins(30).build().unwrap();
        assert!(matches!(draw_perturbation(&big, PerturbationKind::Full, &mut rng), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn grid_low_dim_table_mean_is_small() {
        let m = ModelBuilder::spins(100).build().unwrap();
        let mut rng = RngStream::new(2, 0);
        let t = draw_perturbation(&m, PerturbationKind::LowDim, &mut rng).unwrap();
        assert_eq!(t.len(), 200);
        let mean = t.values().iter().sum::<f64>() / 200.0;
        assert!(mean.abs() <= 0.3, "mean {mean}");
    }

    #[test]
    fn perturbed_value_cases() {
        let m = ModelBuilder::spins(2).build().unwrap();
        let zero = PerturbationTable::low_dim(&m, vec![0.0; 4]).unwrap();
        assert_eq!(perturbed_value(&m, &zero, &[1, 0]).unwrap(), Score::Finite(0.0));

        let m = ModelBuilder::spins(2).offset(1.0).build().unwrap();
        let t = PerturbationTable::low_dim(&m, vec![0.0, 0.2, -0.1, 0.0]).unwrap();
        let v = perturbed_value(&m, &t, &[1, 0]).unwrap().finite().unwrap();
        assert!((v - 1.1).abs() < 1e-15);
    }

    #[test]
    fn perturbed_value_matches_recomputation() {
        let mut rng = RngStream::new(3, 0);
        let m = three_var(&mut rng);
        let low = draw_perturbation(&m, PerturbationKind::LowDim, &mut rng).unwrap();
        let full = draw_perturbation(&m, PerturbationKind::Full, &mut rng).unwrap();
        for (rank, x) in m.configurations().unwrap().enumerate() {
            let theta = m.potential(&x).unwrap().finite().unwrap();
            let g: f64 = (0..3).map(|i| low.low_dim_entry(i, x[i])).sum();
            let a = perturbed_value(&m, &low, &x).unwrap().finite().unwrap();
            assert!((a - theta - g).abs() < 1e-12);
            let b = perturbed_value(&m, &full, &x).unwrap().finite().unwrap();
            assert!((b - theta - full.values()[rank]).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_table_is_internal_error() {
        let m2 = ModelBuilder::spins(2).build().unwrap();
        let m3 = ModelBuilder::spins(3).build().unwrap();
        let t = PerturbationTable::low_dim(&m2, vec![0.0; 4]).unwrap();
        assert!(matches!(perturbed_value(&m3, &t, &[0, 0, 0]), Err(Error::Internal(_))));
    }

    #[test]
    fn v1_with_zero_perturbation_is_map() {
        let mut rng = RngStream::new(4, 0);
        let m = three_var(&mut rng);
        let zero = PerturbationTable::low_dim(&m, vec![0.0; m.total_labels()]).unwrap();
        let v = v_j(&m, &[], &zero, SolverKind::Brute).unwrap();
        assert_eq!(v.value, map_bruteforce(&m, None).unwrap().value);
    }

    #[test]
    fn v_last_is_prefix_score() {
        let mut rng = RngStream::new(5, 0);
        let m = three_var(&mut rng);
        let t = draw_perturbation(&m, PerturbationKind::LowDim, &mut rng).unwrap();
        let v = v_j(&m, &[1, 2, 0], &t, SolverKind::Brute).unwrap();
        assert_eq!(v.value, m.potential(&[1, 2, 0]).unwrap().finite().unwrap());
        assert!(v.argmax.is_empty());
    }

    #[test]
    fn v2_matches_suffix_enumeration() {
        let mut rng = RngStream::new(6, 0);
        let m = three_var(&mut rng);
        let t = draw_perturbation(&m, PerturbationKind::LowDim, &mut rng).unwrap();
        for x1 in 0..2 {
            let mut best = f64::NEG_INFINITY;
            for x2 in 0..3 {
                for x3 in 0..2 {
                    let v = m.potential(&[x1, x2, x3]).unwrap().finite().unwrap()
                        + t.low_dim_entry(1, x2)
                        + t.low_dim_entry(2, x3);
                    best = best.max(v);
                }
            }
            let got = v_j(&m, &[x1], &t, SolverKind::Brute).unwrap().value;
            assert!((got - best).abs() < 1e-12);
        }
    }

    #[test]
    fn estimate_single_sample_is_the_draw() {
        let mut rng = RngStream::new(7, 0);
        let m = three_var(&mut rng);
        let r =
            estimate_expected_vj(&m, &[0], &EstimateOptions::new(1, 0.1, SolverKind::Brute), &mut RngStream::new(8, 0))
                .unwrap();
        let mut again = VjSampler::new(&m, &[0], SolverKind::Brute).unwrap();
        let draw = again.draw(&mut RngStream::new(8, 0)).unwrap();
        assert_eq!(r.sample_mean, draw);
        assert_eq!(r.j, 2);
        assert_eq!(r.std_error, 0.0);
        assert!(estimate_expected_vj(&m, &[], &EstimateOptions::new(0, 0.1, SolverKind::Brute), &mut rng).is_err());
    }

    #[test]
    fn estimate_single_variable_recovers_log2() {
        let m = ModelBuilder::spins(1).build().unwrap();
        let r = estimate_expected_vj(
            &m,
            &[],
            &EstimateOptions::new(100_000, 0.05, SolverKind::Brute),
            &mut RngStream::new(9, 0),
        )
        .unwrap();
        assert!((r.sample_mean - 2f64.ln()).abs() < 0.02, "{}", r.sample_mean);
        assert_eq!(r.radius, corollary2_bound(&BoundParams::new(1.0, 1.0, 100_000, 0.05).unwrap()).unwrap());
    }

    #[test]
    fn estimate_agrees_with_high_sample_reference() {
        let mut rng = RngStream::new(10, 0);
        let m = three_var(&mut rng);
        let low = estimate_expected_vj(
            &m,
            &[],
            &EstimateOptions::new(100_000, 0.05, SolverKind::Brute),
            &mut RngStream::new(11, 0),
        )
        .unwrap();
        let high = estimate_expected_vj(
            &m,
            &[],
            &EstimateOptions::new(1_000_000, 0.05, SolverKind::Brute),
            &mut RngStream::new(12, 0),
        )
        .unwrap();
        let se = (low.std_error.powi(2) + high.std_error.powi(2)).sqrt();
        assert!((low.sample_mean - high.sample_mean).abs() < 3.0 * se);
    }

    #[test]
    fn mincut_sampler_matches_brute_sampler() {
        let m = ModelBuilder::spins(3)
            .unary_scores(0, &[-0.3, 0.3])
            .pairwise_table(0, 1, &[0.5, -0.5, -0.5, 0.5])
            .pairwise_table(1, 2, &[1.0, -1.0, -1.0, 1.0])
            .build()
            .unwrap();
        let mut a = VjSampler::new(&m, &[1], SolverKind::Brute).unwrap();
        let mut b = VjSampler::new(&m, &[1], SolverKind::Mincut).unwrap();
        for s in 0..50 {
            let va = a.draw(&mut RngStream::new(13, s)).unwrap();
            let vb = b.draw(&mut RngStream::new(13, s)).unwrap();
            assert!((va - vb).abs() < 1e-9);
        }
    }

    #[test]
    fn full_perturbation_mean_is_log_partition() {
        let m = ModelBuilder::spins(4)
            .unary_scores(0, &[0.2, -0.2])
            .unary_scores(3, &[-0.5, 0.5])
            .pairwise_table(0, 1, &[0.7, -0.7, -0.7, 0.7])
            .pairwise_table(2, 3, &[0.4, -0.4, -0.4, 0.4])
            .pairwise_table(0, 2, &[0.9, -0.9, -0.9, 0.9])
            .pairwise_table(1, 3, &[0.3, -0.3, -0.3, 0.3])
            .build()
            .unwrap();
        let mut rng = RngStream::new(14, 0);
        let scores: Vec<f64> = m.configurations().unwrap().map(|x| m.potential(&x).unwrap().to_f64()).collect();
        let mut total = 0.0;
        let n = 100_000;
        for _ in 0..n {
            let t = draw_perturbation(&m, PerturbationKind::Full, &mut rng).unwrap();
            total += scores.iter().zip(t.values()).map(|(s, g)| s + g).fold(f64::NEG_INFINITY, f64::max);
        }
        let log_z = m.log_partition_exact().unwrap();
        assert!((total / n as f64 - log_z).abs() < 0.03);
        assert!((log_z - logsumexp_f64(&scores).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn gradient_is_indicator_of_argmax() {
        let mut rng = RngStream::new(15, 0);
        let m = three_var(&mut rng);
        let eps = 1e-6;
        for _ in 0..20 {
            let t = draw_perturbation(&m, PerturbationKind::LowDim, &mut rng).unwrap();
            let base = v_j(&m, &[], &t, SolverKind::Brute).unwrap();
            let grad = indicator_gradient(&m, &base.argmax);
            assert_eq!(grad.iter().sum::<f64>(), 3.0);
            for (k, g) in grad.iter().enumerate() {
                let mut bumped = t.clone();
                bumped.values_mut()[k] += eps;
                let v = v_j(&m, &[], &bumped, SolverKind::Brute).unwrap();
                if v.argmax != base.argmax {
                    continue;
                }
                assert!(((v.value - base.value) / eps - g).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn v_j_is_monotone_in_perturbations_and_unary_scores() {
        let mut rng = RngStream::new(16, 0);
        let m = three_var(&mut rng);
        let t = draw_perturbation(&m, PerturbationKind::LowDim, &mut rng).unwrap();
        let base = v_j(&m, &[1], &t, SolverKind::Brute).unwrap().value;
        for k in 0..t.len() {
            for eps in [-0.1, 0.1] {
                let mut b = t.clone();
                b.values_mut()[k] += eps;
                let v = v_j(&m, &[1], &b, SolverKind::Brute).unwrap().value;
                assert!(if eps > 0.0 { v >= base } else { v <= base });
            }
        }
        for var in 0..3 {
            let mut shifted = m.clone();
            shifted.unary_mut()[var][0] += 0.1;
            assert!(v_j(&shifted, &[1], &t, SolverKind::Brute).unwrap().value >= base);
        }
    }

    #[test]
    fn deviation_experiment_shapes_and_scaling() {
        let m = ModelBuilder::spins(4)
            .unary_scores(0, &[0.5, -0.5])
            .pairwise_table(0, 1, &[1.0, -1.0, -1.0, 1.0])
            .pairwise_table(2, 3, &[0.5, -0.5, -0.5, 0.5])
            .build()
            .unwrap();
        let exp = deviation_experiment(&m, &[1, 10], 100, 20_000, 21, SolverKind::Brute).unwrap();
        assert_eq!(exp.per_m.len(), 2);
        let stats = |d: &[DeviationSample]| {
            let vals: Vec<f64> = d.iter().map(|s| s.value).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
            (mean, var)
        };
        let (mean1, var1) = stats(&exp.per_m[0].1);
        let (_, var10) = stats(&exp.per_m[1].1);
        assert_eq!(exp.per_m[0].1.len(), 100);
        let band = 3.0 * (4.0 * GUMBEL_VARIANCE).sqrt() / 10.0;
        assert!(mean1.abs() < band, "{mean1} vs {band}");
        assert!(var10 < var1);
        assert!(exp.per_m[0].1.iter().all(|s| s.reference_mean == exp.reference.mean));
    }
}
