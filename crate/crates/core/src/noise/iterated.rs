//! Iterated Ito integrals `I_(i,j) = int int dbeta_i(r) dbeta_j(s)`, `r < s`,
//! over one step.
//!
//! Diagonal entries are `((Delta beta_i)^2 - k) / 2`. Off-diagonal entries
//! use the Fourier expansion of the Brownian bridge truncated after `K`
//! terms, with the neglected tail of the constant coefficient replaced by
//! a matching Gaussian.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::noise::rng::{fill_normals, step_rng, Channel};
use crate::noise::WienerPath;

/// Fourier coefficients of the bridge `beta(t) - (t/k) Delta beta` on one
/// step: `a0 / 2 + sum_r a_r cos(2 pi r t / k) + b_r sin(2 pi r t / k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeCoefficients {
    pub a0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// `I_(i,j)` from the increments and bridge coefficients of both motions.
pub fn iterated_from_bridge(dw_i: f64, dw_j: f64, ci: &BridgeCoefficients, cj: &BridgeCoefficients) -> f64 {
    let area: f64 = ci
        .a
        .iter()
        .zip(&ci.b)
        .zip(cj.a.iter().zip(&cj.b))
        .enumerate()
        .map(|(r, ((ai, bi), (aj, bj)))| (r + 1) as f64 * (ai * bj - bi * aj))
        .sum();
    0.5 * dw_i * dw_j + 0.5 * (dw_j * ci.a0 - dw_i * cj.a0) + PI * area
}

/// `1/12 - (1 / 2 pi^2) sum_{r <= K} 1/r^2`.
fn bridge_tail(levy_terms: usize) -> f64 {
    let partial: f64 = (1..=levy_terms).map(|r| 1.0 / (r * r) as f64).sum();
    (1.0 / 12.0 - partial / (2.0 * PI * PI)).max(0.0)
}

fn sample_bridge(normals: &[f64], k: f64, levy_terms: usize, tail: f64) -> BridgeCoefficients {
    let mut a = Vec::with_capacity(levy_terms);
    let mut b = Vec::with_capacity(levy_terms);
    for r in 1..=levy_terms {
        let s = (k / (2.0 * PI * PI * (r * r) as f64)).sqrt();
        a.push(s * normals[2 * (r - 1)]);
        b.push(s * normals[2 * (r - 1) + 1]);
    }
    let a0 = -2.0 * a.iter().sum::<f64>() - 2.0 * (k * tail).sqrt() * normals[2 * levy_terms];
    BridgeCoefficients { a0, a, b }
}

#[derive(Clone, Debug)]
pub struct IteratedIntegrals {
    n_modes: usize,
    n_steps: usize,
    levy_terms: usize,
    values: Vec<f64>,
}

impl IteratedIntegrals {
    /// Integrals for the first `n_modes` motions of `path` on every step.
    pub fn from_path(path: &WienerPath, n_modes: usize, levy_terms: usize) -> Result<Self> {
        if n_modes == 0 || n_modes > path.n_modes() {
            return invalid(format!(
                "iterated integrals requested for {n_modes} modes, path has {}",
                path.n_modes()
            ));
        }
        if levy_terms == 0 {
            return invalid("Levy area expansion needs at least one term");
        }
        let grid = path.grid();
        let k = grid.step();
        let tail = bridge_tail(levy_terms);
        let per_mode = 2 * levy_terms + 1;
        let mut normals = vec![0.0; per_mode * n_modes];
        let mut values = vec![0.0; grid.n_steps() * n_modes * n_modes];
        for n in 1..=grid.n_steps() {
            let mut rng = step_rng(path.seed(), Channel::LevyArea, grid.n_steps(), path.path_index(), n);
            fill_normals(&mut rng, &mut normals);
            let bridges: Vec<BridgeCoefficients> = normals
                .chunks(per_mode)
                .map(|c| sample_bridge(c, k, levy_terms, tail))
                .collect();
            let dw = path.step_increments(n);
            let block = &mut values[(n - 1) * n_modes * n_modes..n * n_modes * n_modes];
            for i in 0..n_modes {
                block[i * n_modes + i] = 0.5 * (dw[i] * dw[i] - k);
                for j in i + 1..n_modes {
                    let v = iterated_from_bridge(dw[i], dw[j], &bridges[i], &bridges[j]);
                    block[i * n_modes + j] = v;
                    block[j * n_modes + i] = dw[i] * dw[j] - v;
                }
            }
        }
        Ok(Self {
            n_modes,
            n_steps: grid.n_steps(),
            levy_terms,
            values,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn levy_terms(&self) -> usize {
        self.levy_terms
    }

    /// `I_(i,j)` on step `n` (1-based), modes `i, j` 1-based.
    pub fn get(&self, n: usize, i: usize, j: usize) -> Result<f64> {
        if n == 0 || n > self.n_steps {
            return invalid(format!("step {n} outside 1..={}", self.n_steps));
        }
        if i == 0 || j == 0 || i > self.n_modes || j > self.n_modes {
            return invalid(format!("pair ({i}, {j}) not available, only {} modes", self.n_modes));
        }
        Ok(self.values[(n - 1) * self.n_modes * self.n_modes + (i - 1) * self.n_modes + (j - 1)])
    }
}
