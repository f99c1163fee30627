use std::f64::consts::SQRT_2;

use crate::error::{invalid, Result};
use crate::noise::rng::{fill_normals, step_rng, Channel};
use crate::noise::CovarianceSpectrum;
use crate::scheme::TimeGrid;

/// Brownian increments `Delta beta_j^n ~ N(0, k)` of the scalar motions in
/// the expansion `W = sum_j sqrt(mu_j) beta_j e_j`, stored step-major.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerPath {
    grid: TimeGrid,
    n_modes: usize,
    increments: Vec<f64>,
    seed: u64,
    path_index: u64,
}

/// Fills `out[j-1]` with `Delta beta_j` of step `step` (1-based).
pub fn fill_step_increments(seed: u64, path_index: u64, grid: &TimeGrid, step: usize, out: &mut [f64]) {
    let mut rng = step_rng(seed, Channel::Increments, grid.n_steps(), path_index, step);
    fill_normals(&mut rng, out);
    let s = grid.step().sqrt();
    for v in out.iter_mut() {
        *v *= s;
    }
}

impl WienerPath {
    pub fn sample(spec: &CovarianceSpectrum, grid: TimeGrid, seed: u64, path_index: u64) -> Result<Self> {
        let n_modes = spec.n_modes();
        let mut increments = vec![0.0; n_modes * grid.n_steps()];
        for (n, chunk) in increments.chunks_mut(n_modes).enumerate() {
            fill_step_increments(seed, path_index, &grid, n + 1, chunk);
        }
        Ok(Self {
            grid,
            n_modes,
            increments,
            seed,
            path_index,
        })
    }

    pub fn from_increments(grid: TimeGrid, n_modes: usize, increments: Vec<f64>, seed: u64, path_index: u64) -> Result<Self> {
        if increments.len() != n_modes * grid.n_steps() {
            return invalid(format!(
                "expected {} increments, got {}",
                n_modes * grid.n_steps(),
                increments.len()
            ));
        }
        Ok(Self {
            grid,
            n_modes,
            increments,
            seed,
            path_index,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    pub fn raw_increments(&self) -> &[f64] {
        &self.increments
    }

    /// Increments over `[t_{n-1}, t_n]`, `n = 1..=n_steps`.
    pub fn step_increments(&self, n: usize) -> &[f64] {
        assert!(n >= 1 && n <= self.grid.n_steps(), "step {n} out of range");
        &self.increments[(n - 1) * self.n_modes..n * self.n_modes]
    }

    pub fn increment(&self, n: usize, j: usize) -> f64 {
        self.step_increments(n)[j - 1]
    }

    /// `beta_j(T)`.
    pub fn endpoint(&self, j: usize) -> f64 {
        (1..=self.grid.n_steps()).map(|n| self.increment(n, j)).sum()
    }

    /// Increments of the same path on the grid with `factor` times the step.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.grid.n_steps().is_multiple_of(factor) {
            return invalid(format!(
                "cannot coarsen {} steps by a factor of {factor}",
                self.grid.n_steps()
            ));
        }
        let grid = TimeGrid::new(self.grid.step() * factor as f64, self.grid.n_steps() / factor)?;
        let mut increments = vec![0.0; self.n_modes * grid.n_steps()];
        for (n, chunk) in increments.chunks_mut(self.n_modes).enumerate() {
            for r in 0..factor {
                let fine = self.step_increments(n * factor + r + 1);
                for (c, f) in chunk.iter_mut().zip(fine) {
                    *c += f;
                }
            }
        }
        Ok(Self {
            grid,
            n_modes: self.n_modes,
            increments,
            seed: self.seed,
            path_index: self.path_index,
        })
    }

    /// `Delta W^n(x) = sum_{j <= J} sqrt(mu_j) Delta beta_j^n e_j(x)`.
    pub fn noise_increment_at(&self, spec: &CovarianceSpectrum, n: usize, j_max: usize, x: f64) -> f64 {
        let inc = self.step_increments(n);
        spec.eigenvalues()
            .iter()
            .zip(inc)
            .take(j_max)
            .enumerate()
            .map(|(i, (m, b))| m.sqrt() * b * SQRT_2 * ((i + 1) as f64 * std::f64::consts::PI * x).sin())
            .sum()
    }
}
