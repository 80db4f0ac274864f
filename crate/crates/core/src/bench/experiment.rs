//! Desk-scale reproductions of the error-versus-coupling and deviation
//! histogram experiments on grid spin glasses.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::spinglass::SpinGlassConfig;
use crate::concentration::two_sided_bound;
use crate::error::{Error, Result};
use crate::model::DiscreteModel;
use crate::perturbation::{deviation_experiment, DeviationExperiment, ReferenceMean};
use crate::solvers::SolverKind;

pub const ERROR_VS_COUPLING_COLUMNS: [&str; 6] = ["c", "M", "mean_abs_error", "std_error", "replicates", "seed"];
pub const DEVIATION_HISTOGRAM_COLUMNS: [&str; 4] = ["M", "r", "exceed_count", "replicates"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    Generated(SpinGlassConfig),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    pub model: ModelSource,
    pub m_values: Vec<usize>,
    pub replicates: usize,
    pub delta: f64,
    pub output_dir: PathBuf,
    pub solver: SolverKind,
    /// Sample count of the reference mean every deviation is centered on.
    pub reference_samples: usize,
    /// Seed of the Gumbel streams; the model seed lives in the model source.
    pub seed: u64,
    /// Coupling bounds swept by the error-versus-coupling experiment.
    pub couplings: Vec<f64>,
    /// Number of `r` grid points per sample size in the histogram.
    pub r_points: usize,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            model: ModelSource::Generated(SpinGlassConfig::new(10, 10, 1.0, 0)),
            m_values: vec![1, 5, 10],
            replicates: 100,
            delta: 0.05,
            output_dir: PathBuf::from("results"),
            solver: SolverKind::Mincut,
            reference_samples: 1000,
            seed: 0,
            couplings: (0..=8).map(|k| k as f64 * 0.5).collect(),
            r_points: 40,
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return Err(Error::invalid("m_values must be a nonempty list of positive counts"));
        }
        if self.replicates == 0 || self.reference_samples == 0 {
            return Err(Error::invalid("replicates and reference_samples must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.r_points < 2 {
            return Err(Error::invalid("r_points must be at least 2"));
        }
        if let ModelSource::Generated(cfg) = &self.model {
            cfg.validate()?;
        }
        for &c in &self.couplings {
            SpinGlassConfig { coupling: c, ..SpinGlassConfig::new(1, 1, 0.0, 0) }.validate()?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: ExperimentPlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    /// Reads a plan; relative model and output paths resolve against the plan's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut plan = Self::from_json(&std::fs::read_to_string(path)?)?;
        if let Some(dir) = path.parent() {
            if let ModelSource::File(p) = &mut plan.model {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
            if plan.output_dir.is_relative() {
                plan.output_dir = dir.join(&plan.output_dir);
            }
        }
        Ok(plan)
    }

    pub fn load_model(&self) -> Result<DiscreteModel> {
        match &self.model {
            ModelSource::Generated(cfg) => cfg.generate(),
            ModelSource::File(path) => DiscreteModel::load(path),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CouplingCell {
    pub coupling: f64,
    pub experiment: DeviationExperiment,
}

#[derive(Debug, Clone)]
pub struct ErrorVsCoupling {
    pub dataset: Dataset,
    pub cells: Vec<CouplingCell>,
}

impl ErrorVsCoupling {
    /// Mean absolute deviation for coupling `c` and sample size `m`.
    pub fn mean_abs_error(&self, c: f64, m: usize) -> Option<f64> {
        let (ci, mi) = (self.dataset.column_index("c").ok()?, self.dataset.column_index("M").ok()?);
        let ei = self.dataset.column_index("mean_abs_error").ok()?;
        self.dataset.rows.iter().find(|r| r[ci] == c && r[mi] == m as f64).map(|r| r[ei])
    }
}

fn abs_error_stats(devs: &[f64]) -> (f64, f64) {
    let n = devs.len() as f64;
    let mean = devs.iter().map(|d| d.abs()).sum::<f64>() / n;
    if devs.len() < 2 {
        return (mean, 0.0);
    }
    let var = devs.iter().map(|d| (d.abs() - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// For every coupling bound, regenerates the plan's spin glass with that bound
/// and records the mean absolute error of `M`-sample means of `V_1`.
pub fn run_error_vs_coupling(plan: &ExperimentPlan, couplings: &[f64]) -> Result<ErrorVsCoupling> {
    plan.validate()?;
    let ModelSource::Generated(base) = &plan.model else {
        return Err(Error::invalid("the coupling sweep needs a generated spin-glass model source"));
    };
    let mut dataset = Dataset::new(&ERROR_VS_COUPLING_COLUMNS);
    let mut cells = Vec::with_capacity(couplings.len());
    for &c in couplings {
        let model = SpinGlassConfig { coupling: c, ..*base }.generate()?;
        let experiment = deviation_experiment(
            &model,
            &plan.m_values,
            plan.replicates,
            plan.reference_samples,
            plan.seed,
            plan.solver,
        )?;
        for (m, devs) in &experiment.per_m {
            let values: Vec<f64> = devs.iter().map(|d| d.value).collect();
            let (mean, se) = abs_error_stats(&values);
            dataset.push(vec![c, *m as f64, mean, se, plan.replicates as f64, plan.seed as f64]);
        }
        cells.push(CouplingCell { coupling: c, experiment });
    }
    dataset.sort_by_columns(&["c", "M"])?;
    Ok(ErrorVsCoupling { dataset, cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    /// Slope of `ln(count)` against `r^2`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares fit of `ln(count)` against `r^2` over points with `r >= r_min`
/// and a positive count. Needs at least three points with distinct `r`.
pub fn fit_tail(points: &[(f64, f64)], r_min: f64) -> Option<TailFit> {
    let tail: Vec<(f64, f64)> = points
        .iter()
        .filter(|(r, count)| *r >= r_min && *count >= 1.0)
        .map(|&(r, count)| (r * r, count.ln()))
        .collect();
    let k = tail.len() as f64;
    if tail.len() < 3 {
        return None;
    }
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / k;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = tail.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = tail.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 0.0 } else { 1.0 - ss_res / syy };
    Some(TailFit { slope, intercept, r_squared, points: tail.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramSeries {
    pub m: usize,
    /// Root mean square deviation, the start of the fitted tail.
    pub rms_deviation: f64,
    pub max_deviation: f64,
    /// Two-sided concentration radius at the plan's `delta`.
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct DeviationHistogram {
    pub dataset: Dataset,
    pub reference: ReferenceMean,
    pub series: Vec<HistogramSeries>,
}

impl DeviationHistogram {
    /// `(r, exceed_count)` points for sample size `m`, ascending in `r`.
    pub fn points(&self, m: usize) -> Vec<(f64, f64)> {
        self.dataset.rows.iter().filter(|row| row[0] == m as f64).map(|row| (row[1], row[2])).collect()
    }

    pub fn fit_tail(&self, m: usize) -> Option<TailFit> {
        let s = self.series.iter().find(|s| s.m == m)?;
        fit_tail(&self.points(m), s.rms_deviation)
    }
}

/// Survival counts `#{|mean_M - reference| >= r}` on an evenly spaced grid of
/// `r` from 0 to the largest observed deviation, separately for each `M`.
pub fn run_deviation_histogram(plan: &ExperimentPlan) -> Result<DeviationHistogram> {
    plan.validate()?;
    let model = plan.load_model()?;
    let experiment =
        deviation_experiment(&model, &plan.m_values, plan.replicates, plan.reference_samples, plan.seed, plan.solver)?;
    let mut dataset = Dataset::new(&DEVIATION_HISTOGRAM_COLUMNS);
    let mut series = Vec::with_capacity(experiment.per_m.len());
    for (m, devs) in &experiment.per_m {
        let mut abs: Vec<f64> = devs.iter().map(|d| d.value.abs()).collect();
        abs.sort_by(f64::total_cmp);
        let max = *abs.last().expect("replicates >= 1");
        let rms = (abs.iter().map(|d| d * d).sum::<f64>() / abs.len() as f64).sqrt();
        for k in 0..plan.r_points {
            let r = max * k as f64 / (plan.r_points - 1) as f64;
            let below = abs.partition_point(|&d| d < r);
            dataset.push(vec![*m as f64, r, (abs.len() - below) as f64, plan.replicates as f64]);
        }
        series.push(HistogramSeries {
            m: *m,
            rms_deviation: rms,
            max_deviation: max,
            bound: two_sided_bound(model.n(), *m, plan.delta)?,
        });
    }
    dataset.sort_by_columns(&["M", "r"])?;
    Ok(DeviationHistogram { dataset, reference: experiment.reference, series })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gumbel::logsumexp_f64;
    use crate::perturbation::reference_mean;

    fn small_plan(rows: usize, cols: usize) -> ExperimentPlan {
        ExperimentPlan {
            model: ModelSource::Generated(SpinGlassConfig::new(rows, cols, 1.0, 3)),
            replicates: 40,
            reference_samples: 2000,
            ..ExperimentPlan::default()
        }
    }

    #[test]
    fn default_plan_matches_desk_scale() {
        let p = ExperimentPlan::default();
        assert_eq!(p.m_values, vec![1, 5, 10]);
        assert_eq!(p.replicates, 100);
        assert_eq!(p.reference_samples, 1000);
        assert_eq!(p.couplings.len(), 9);
        assert_eq!(p.couplings[8], 4.0);
        assert_eq!(p.model, ModelSource::Generated(SpinGlassConfig::new(10, 10, 1.0, 0)));
        p.validate().unwrap();
    }

    #[test]
    fn plan_json() {
        let p = ExperimentPlan::from_json(r#"{"m_values": [2, 4], "replicates": 7}"#).unwrap();
        assert_eq!(p.m_values, vec![2, 4]);
        assert_eq!(p.delta, 0.05);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(ExperimentPlan::from_json(&text).unwrap(), p);
        assert!(ExperimentPlan::from_json(r#"{"replicates": 0}"#).is_err());
        assert!(ExperimentPlan::from_json(r#"{"m_values": []}"#).is_err());
        assert!(ExperimentPlan::from_json(r#"{"couplings": [-1.0]}"#).is_err());
        assert!(ExperimentPlan::from_json(r#"{"bogus": 1}"#).is_err());
        let f = ExperimentPlan::from_json(r#"{"model": {"file": "m.json"}}"#).unwrap();
        assert_eq!(f.model, ModelSource::File(PathBuf::from("m.json")));
    }

    #[test]
    fn error_vs_coupling_shape() {
        let plan = small_plan(3, 3);
        let out = run_error_vs_coupling(&plan, &[1.0, 0.0]).unwrap();
        let d = &out.dataset;
        assert_eq!(d.columns, ERROR_VS_COUPLING_COLUMNS);
        assert_eq!(d.rows.len(), 6);
        assert_eq!(d.rows[0][..2], [0.0, 1.0]);
        assert_eq!(d.rows[5][..2], [1.0, 10.0]);
        assert!(d.column("mean_abs_error").unwrap().iter().all(|&e| e > 0.0));
        for c in [0.0, 1.0] {
            assert!(out.mean_abs_error(c, 10).unwrap() < out.mean_abs_error(c, 1).unwrap());
        }
    }

    #[test]
    fn single_site_reference_is_logsumexp() {
        let plan = ExperimentPlan {
            model: ModelSource::Generated(SpinGlassConfig::new(1, 1, 0.0, 8)),
            replicates: 5,
            reference_samples: 200_000,
            ..ExperimentPlan::default()
        };
        let out = run_error_vs_coupling(&plan, &[0.0]).unwrap();
        let reference = out.cells[0].experiment.reference;
        let theta = SpinGlassConfig::new(1, 1, 0.0, 8).generate().unwrap().unary(0)[1];
        let exact = logsumexp_f64(&[theta, -theta]).unwrap();
        assert!((reference.mean - exact).abs() < 4.0 * reference.std_error, "{reference:?} vs {exact}");
    }

    #[test]
    fn reference_upper_bounds_log_partition() {
        for seed in 0..5 {
            let model = SpinGlassConfig::new(2, 2, 2.0, seed).generate().unwrap();
            let r = reference_mean(&model, 20_000, seed, SolverKind::Mincut).unwrap();
            assert!(r.mean >= model.log_partition_exact().unwrap() - 3.0 * r.std_error);
        }
    }

    #[test]
    fn pipeline_is_deterministic() {
        let plan = small_plan(2, 3);
        let a = run_error_vs_coupling(&plan, &[0.5, 2.0]).unwrap().dataset.to_csv();
        let b = run_error_vs_coupling(&plan, &[0.5, 2.0]).unwrap().dataset.to_csv();
        assert_eq!(a, b);
        let h1 = run_deviation_histogram(&plan).unwrap().dataset.to_csv();
        let h2 = run_deviation_histogram(&plan).unwrap().dataset.to_csv();
        assert_eq!(h1, h2);
        let other = ExperimentPlan { seed: 1, ..plan };
        assert_ne!(run_deviation_histogram(&other).unwrap().dataset.to_csv(), h1);
    }

    #[test]
    fn histogram_survival_counts() {
        let plan = small_plan(3, 3);
        let h = run_deviation_histogram(&plan).unwrap();
        assert_eq!(h.dataset.rows.len(), 3 * plan.r_points);
        for m in [1, 5, 10] {
            let pts = h.points(m);
            assert_eq!(pts[0], (0.0, plan.replicates as f64));
            assert!(pts.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 > w[0].0));
            assert_eq!(pts.last().unwrap().1, 1.0);
        }
    }

    #[test]
    fn file_source_rejected_for_sweep() {
        let plan = ExperimentPlan { model: ModelSource::File("x.json".into()), ..ExperimentPlan::default() };
        assert!(matches!(run_error_vs_coupling(&plan, &[1.0]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tail_fit_recovers_gaussian_decay() {
        let pts: Vec<(f64, f64)> =
            (0..20).map(|k| (k as f64 * 0.2, 1000.0 * (-(k as f64 * 0.2).powi(2)).exp())).collect();
        let fit = fit_tail(&pts, 0.5).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit_tail(&pts[..2], 0.0).is_none());
    }
}
