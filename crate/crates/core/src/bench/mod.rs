//! Spin-glass benchmark harness: instance generation, experiments and
//! CSV/SVG output.

pub mod dataset;
pub mod experiment;
pub mod plot;
pub mod spinglass;

pub use dataset::Dataset;
pub use experiment::{
    fit_tail, run_deviation_histogram, run_error_vs_coupling, DeviationHistogram, ErrorVsCoupling, ExperimentPlan,
    ModelSource, TailFit,
};
pub use plot::{emit_plot, PlotKind};
pub use spinglass::{generate_spin_glass, SpinGlassConfig};
