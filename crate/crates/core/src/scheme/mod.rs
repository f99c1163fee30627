//! The Milstein-Galerkin finite element scheme.

mod config;
mod engine;
mod grid;
mod run;

pub use config::{default_levy_terms, SchemeConfig, Variant};
pub use engine::{Discretization, StepNoise, Workspace};
pub(crate) use engine::non_finite;
pub use grid::TimeGrid;
pub use run::{run, run_with, GridProcess};
