use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pmap::bench::{
    emit_plot, run_deviation_histogram, run_error_vs_coupling, Dataset, ExperimentPlan, PlotKind, SpinGlassConfig,
};
use pmap::concentration::{
    check_gumbel_poincare, check_modified_log_sobolev, check_poincare, suite, InequalityReport, LogConcaveDensity,
    ScalarFunction,
};
use pmap::sampler::{sample_sequential, ExactSampler, MjSchedule, SampleMeanEstimator, DEFAULT_MAX_RESTARTS};
use pmap::solvers::solve_map;
use pmap::{DiscreteModel, Error, RngStream, SolverKind};

#[derive(Parser)]
#[command(name = "pmap", version, about = "Gibbs sampling and partition functions through perturbed MAP optimization")]
struct Cli {
    /// Seed for every random stream the command opens.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact log partition function by enumeration.
    Logz { model: PathBuf },
    /// Unperturbed MAP assignment.
    Map {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Solver::Brute)]
        solver: Solver,
    },
    /// Exact Gibbs samples from the Gumbel-max trick, one JSON label list per line.
    SampleExact {
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Samples from the sequential low-dimensional sampler.
    SampleSeq {
        model: PathBuf,
        /// Comma-separated M_j values, one per variable or a single shared value.
        #[arg(long, default_value = "1000")]
        mj_schedule: String,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_RESTARTS)]
        max_restarts: usize,
        #[arg(long, value_enum, default_value_t = Solver::Brute)]
        solver: Solver,
        /// Print the full per-step trace instead of the accepted labels.
        #[arg(long)]
        trace: bool,
    },
    /// Generates a grid spin glass and writes it as a model file.
    GenSpinglass {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        coupling: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Runs a benchmark experiment and writes its CSV into the plan's output directory.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        #[arg(long)]
        config: PathBuf,
    },
    /// Numerically checks a functional inequality and prints JSON reports.
    CheckInequality {
        #[arg(value_enum)]
        kind: InequalityKind,
        /// `key=value` pairs: function (a suite name, `linear` or `suite`),
        /// density, eta, lambda, rho.
        #[arg(long, default_value = "")]
        params: String,
    },
    /// Renders an experiment CSV as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotArg,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Brute,
    Mincut,
}

impl From<Solver> for SolverKind {
    fn from(s: Solver) -> Self {
        match s {
            Solver::Brute => SolverKind::Brute,
            Solver::Mincut => SolverKind::Mincut,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    ErrorVsCoupling,
    DeviationHistogram,
}

#[derive(Clone, Copy, ValueEnum)]
enum InequalityKind {
    Poincare,
    GumbelPoincare,
    LogSobolev,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotArg {
    Line,
    Histogram,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceLimit { .. } => 3,
        Error::Internal(_) => 1,
        _ => 2,
    }
}

fn labels_json(model: &DiscreteModel, x: &[usize]) -> Value {
    serde_json::to_value(model.label_values(x)).expect("labels serialize")
}

fn run(cli: Cli) -> pmap::Result<()> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Logz { model } => {
            let m = load_model(&model)?;
            println!("{}", json!({ "log_partition": m.log_partition_exact()? }));
        }
        Command::Map { model, solver } => {
            let m = load_model(&model)?;
            let r = solve_map(&m, None, solver.into())?;
            println!(
                "{}",
                json!({ "argmax": labels_json(&m, &r.argmax), "value": r.value, "solver": r.solver.to_string() })
            );
        }
        Command::SampleExact { model, count } => {
            let m = load_model(&model)?;
            let sampler = ExactSampler::new(&m)?;
            let mut rng = RngStream::new(seed, 0);
            for _ in 0..count {
                println!("{}", labels_json(&m, &sampler.draw(&mut rng)));
            }
        }
        Command::SampleSeq { model, mj_schedule, delta, count, max_restarts, solver, trace } => {
            let m = load_model(&model)?;
            let schedule = parse_schedule(&mj_schedule)?;
            let mut estimator = SampleMeanEstimator { delta, solver: solver.into() };
            for k in 0..count {
                let mut rng = RngStream::new(seed, k as u64);
                let t = sample_sequential(&m, &schedule, &mut estimator, &mut rng, max_restarts)?;
                if trace {
                    println!("{}", serde_json::to_string(&t)?);
                    continue;
                }
                let accepted = t.accepted.as_ref().map(|x| labels_json(&m, x));
                println!(
                    "{}",
                    json!({ "sample": accepted, "restarts": t.restarts, "solver_calls": t.solver_calls, "exhausted": t.exhausted })
                );
            }
        }
        Command::GenSpinglass { rows, cols, coupling, output } => {
            let m = SpinGlassConfig::new(rows, cols, coupling, seed).generate()?;
            m.save(&output)?;
            eprintln!("wrote {}", output.display());
        }
        Command::Experiment { kind, config } => {
            let mut plan = ExperimentPlan::load(&config)?;
            if let Some(s) = cli.seed {
                plan.seed = s;
            }
            let (dataset, name) = match kind {
                ExperimentKind::ErrorVsCoupling => {
                    (run_error_vs_coupling(&plan, &plan.couplings)?.dataset, "error_vs_coupling.csv")
                }
                ExperimentKind::DeviationHistogram => {
                    (run_deviation_histogram(&plan)?.dataset, "deviation_histogram.csv")
                }
            };
            std::fs::create_dir_all(&plan.output_dir)?;
            let path = plan.output_dir.join(name);
            dataset.save(&path)?;
            println!("{}", path.display());
        }
        Command::CheckInequality { kind, params } => {
            let reports = check_inequality(kind, &parse_params(&params)?)?;
            println!("{}", serde_json::to_string_pretty(&reports)?);
        }
        Command::Plot { input, kind, output } => {
            let dataset = Dataset::load(input)?;
            let kind = match kind {
                PlotArg::Line => PlotKind::Line,
                PlotArg::Histogram => PlotKind::Histogram,
            };
            std::fs::write(&output, emit_plot(&dataset, kind)?)?;
            eprintln!("wrote {}", output.display());
        }
    }
    Ok(())
}

fn load_model(path: &Path) -> pmap::Result<DiscreteModel> {
    DiscreteModel::load(path).map_err(|e| match e {
        Error::Io(io) => Error::InvalidArgument(format!("cannot read {}: {io}", path.display())),
        other => other,
    })
}

fn parse_schedule(text: &str) -> pmap::Result<MjSchedule> {
    let counts = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::InvalidArgument(format!("bad M_j value `{s}`"))))
        .collect::<pmap::Result<Vec<_>>>()?;
    MjSchedule::per_step(counts)
}

fn parse_params(text: &str) -> pmap::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("parameter `{pair}` is not key=value")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn number(params: &BTreeMap<String, String>, key: &str, default: f64) -> pmap::Result<f64> {
    params.get(key).map_or(Ok(default), |v| {
        v.parse().map_err(|_| Error::InvalidArgument(format!("parameter {key}=`{v}` is not a number")))
    })
}

fn check_inequality(kind: InequalityKind, params: &BTreeMap<String, String>) -> pmap::Result<Vec<InequalityReport>> {
    let allowed: &[&str] = match kind {
        InequalityKind::Poincare => &["function", "density", "eta"],
        InequalityKind::GumbelPoincare => &["function"],
        InequalityKind::LogSobolev => &["function", "lambda", "rho"],
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidArgument(format!("unknown parameter `{k}`")));
    }
    let functions: Vec<ScalarFunction> = match params.get("function").map(String::as_str).unwrap_or("suite") {
        "suite" => suite::standard_suite(),
        name => vec![suite::by_name(name).ok_or_else(|| Error::InvalidArgument(format!("unknown function `{name}`")))?],
    };
    match kind {
        InequalityKind::Poincare => {
            let density = match params.get("density").map(String::as_str).unwrap_or("gumbel") {
                "gaussian" => LogConcaveDensity::gaussian(),
                "laplace" => LogConcaveDensity::laplace(),
                "gumbel" => LogConcaveDensity::gumbel(),
                other => return Err(Error::InvalidArgument(format!("unknown density `{other}`"))),
            };
            let eta = number(params, "eta", 0.5)?;
            functions.iter().map(|h| check_poincare(&density, h, eta)).collect()
        }
        InequalityKind::GumbelPoincare => functions.iter().map(check_gumbel_poincare).collect(),
        InequalityKind::LogSobolev => {
            let lambda = number(params, "lambda", 0.01)?;
            let rho = number(params, "rho", 0.1)?;
            functions.iter().map(|h| check_modified_log_sobolev(h, lambda, rho)).collect()
        }
    }
}
