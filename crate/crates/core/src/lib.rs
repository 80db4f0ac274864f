//! Gibbs sampling through randomly perturbed MAP optimization.
//!
//! The crate provides discrete pairwise models with exact enumeration, Gumbel
//! perturbations, brute-force and min-cut MAP solvers, exact and sequential
//! samplers, concentration bounds with numerical checks of the underlying
//! functional inequalities, and a spin-glass benchmark harness.

pub mod bench;
pub mod concentration;
pub mod error;
pub mod gumbel;
pub mod model;
pub mod perturbation;
pub mod quadrature;
pub mod sampler;
pub mod score;
pub mod solvers;

pub use error::{Error, Result};
pub use gumbel::RngStream;
pub use model::{Configuration, DiscreteModel, Label, ModelBuilder, ModelFile};
pub use perturbation::{PerturbationKind, PerturbationTable};
pub use score::Score;
pub use solvers::{MapResult, SolverKind};
