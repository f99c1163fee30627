//! Truncated Karhunen-Loeve noise, iterated integrals and path storage.

mod covariance;
mod dump;
mod iterated;
mod path;
pub(crate) mod rng;

pub use covariance::CovarianceSpectrum;
pub use dump::{read_path_dump, write_path_dump, MAX_DUMP_SEED};
pub use iterated::{iterated_from_bridge, BridgeCoefficients, IteratedIntegrals};
pub use path::{fill_step_increments, WienerPath};
