use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Uniform time grid `t_n = n k`, `n = 0..=n_steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    step: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(step: f64, n_steps: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return invalid(format!("time step must be positive and finite, got {step}"));
        }
        if n_steps == 0 {
            return invalid("time grid needs at least one step");
        }
        Ok(Self { step, n_steps })
    }

    /// Grid with step `k` covering `[0, T]`; `T` must be a multiple of `k`.
    pub fn from_horizon(horizon: f64, step: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return invalid(format!("horizon must be positive, got {horizon}"));
        }
        if !(step > 0.0 && step <= horizon) {
            return invalid(format!("time step {step} must lie in (0, {horizon}]"));
        }
        let n = (horizon / step).round();
        if (n * step - horizon).abs() > 1e-9 * horizon {
            return invalid(format!("horizon {horizon} is not a multiple of the step {step}"));
        }
        Self::new(step, n as usize)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn horizon(&self) -> f64 {
        self.step * self.n_steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        self.step * n as f64
    }

    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return invalid("refinement factor must be positive");
        }
        Self::new(self.step / factor as f64, self.n_steps * factor)
    }

    /// `Some(r)` when every step of `self` is `r` steps of `fine`.
    pub fn refinement_factor(&self, fine: &TimeGrid) -> Option<usize> {
        let r = (self.step / fine.step).round();
        if r < 1.0 || ((self.step / fine.step) - r).abs() > 1e-9 * r {
            return None;
        }
        let r = r as usize;
        (self.n_steps * r == fine.n_steps).then_some(r)
    }
}
