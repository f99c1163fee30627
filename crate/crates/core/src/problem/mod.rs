//! Problem data: Nemytskii drift and diffusion, noise, initial value.

mod functions;
mod nemytskii;
mod spec;

pub use functions::ScalarFn;
pub use nemytskii::{NemytskiiDiffusion, NemytskiiDrift};
pub use spec::{ProblemConfig, ProblemSpec};
