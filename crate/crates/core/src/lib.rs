//! Milstein-Galerkin finite element approximation of semilinear stochastic
//! heat equations on (0, 1) with residual-based error analysis.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod fem;
pub mod harness;
pub mod noise;
pub mod problem;
pub mod scheme;
pub mod selftest;
pub mod spectral;

pub use error::{Error, Result};
pub use fem::{FemOperators, GridFunctionH, Mesh1D};
pub use noise::{CovarianceSpectrum, IteratedIntegrals, WienerPath};
pub use problem::{ProblemSpec, ScalarFn};
pub use scheme::{run, Discretization, GridProcess, SchemeConfig, TimeGrid, Variant};
pub use spectral::{EigenBasis, SpectralVector};
