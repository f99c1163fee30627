use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fem::Mesh1D;
use crate::scheme::TimeGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    Milstein,
    EulerMaruyama,
    /// `J^2` modes in the Euler term and `J` modes in the Milstein term.
    Truncated { modes: usize },
}

impl Variant {
    /// Modes entering the Euler term and, when present, the Milstein term.
    pub fn mode_counts(&self, n_modes: usize) -> (usize, Option<usize>) {
        match *self {
            Variant::Milstein => (n_modes, Some(n_modes)),
            Variant::EulerMaruyama => (n_modes, None),
            Variant::Truncated { modes } => (modes.saturating_mul(modes).min(n_modes), Some(modes.min(n_modes))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Variant::Milstein => "milstein".into(),
            Variant::EulerMaruyama => "em".into(),
            Variant::Truncated { modes } => format!("truncated-{modes}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub variant: Variant,
    pub grid: TimeGrid,
    pub mesh: Mesh1D,
    /// Cells of the mesh on which the noise products are formed before
    /// projection. Must refine `mesh`; defaults to the coarsest refinement
    /// with at least as many cells as noise modes.
    pub noise_cells: Option<usize>,
    /// Fourier terms of the Levy-area expansion.
    pub levy_terms: usize,
}

impl SchemeConfig {
    pub fn new(variant: Variant, grid: TimeGrid, mesh: Mesh1D) -> Self {
        Self {
            variant,
            grid,
            mesh,
            noise_cells: None,
            levy_terms: default_levy_terms(grid.step()),
        }
    }

    pub fn resolved_noise_cells(&self, n_modes: usize) -> Result<usize> {
        let n = self.mesh.n_cells();
        match self.noise_cells {
            Some(q) if q % n == 0 && q >= n => Ok(q),
            Some(q) => invalid(format!("noise mesh with {q} cells does not refine {n} cells")),
            None => Ok(n * n_modes.div_ceil(n).max(1)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Variant::Truncated { modes } = self.variant {
            if modes == 0 {
                return invalid("truncation needs at least one mode");
            }
        }
        if self.levy_terms == 0 {
            return invalid("Levy area expansion needs at least one term");
        }
        Ok(())
    }
}

/// `K ~ 1/k` keeps the area error at the order of the scheme.
pub fn default_levy_terms(k: f64) -> usize {
    ((1.0 / k).ceil() as usize).clamp(1, 4096)
}
