use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::eigenfunction;

/// Eigenvalues `mu_j` of the covariance operator `Q`, with eigenfunctions
/// `e_j` shared with the Laplacian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpectrum {
    eigenvalues: Vec<f64>,
    decay: Option<f64>,
}

impl CovarianceSpectrum {
    /// `mu_j = j^{-beta}`, `j = 1..=n_modes`.
    pub fn power_law(n_modes: usize, beta: f64) -> Result<Self> {
        if n_modes == 0 {
            return invalid("noise needs at least one mode");
        }
        if !(beta > 1.0 && beta.is_finite()) {
            return invalid(format!("decay exponent must exceed 1 for trace-class noise, got {beta}"));
        }
        Ok(Self {
            eigenvalues: (1..=n_modes).map(|j| (j as f64).powf(-beta)).collect(),
            decay: Some(beta),
        })
    }

    pub fn from_eigenvalues(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return invalid("noise needs at least one mode");
        }
        if let Some(j) = eigenvalues.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            return invalid(format!("eigenvalue {} is negative or not finite", j + 1));
        }
        Ok(Self {
            eigenvalues,
            decay: None,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn sqrt_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|m| m.sqrt()).collect()
    }

    pub fn decay(&self) -> Option<f64> {
        self.decay
    }

    /// Supremum of the exponents `alpha` with `sum_j j^alpha mu_j < inf`
    /// for a power-law spectrum, `beta - 1`.
    pub fn alpha(&self) -> Option<f64> {
        self.decay.map(|b| b - 1.0)
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// `sum_{j > J} mu_j` over the stored modes.
    pub fn tail_trace(&self, j: usize) -> f64 {
        self.eigenvalues.iter().skip(j).sum()
    }

    /// Power-law mass beyond the stored modes relative to the full trace,
    /// estimated by the integral test.
    pub fn analytic_tail_fraction(&self) -> Option<f64> {
        let beta = self.decay?;
        let n = self.n_modes() as f64;
        let tail = (n + 0.5).powf(1.0 - beta) / (beta - 1.0);
        Some(tail / (self.trace() + tail))
    }

    /// Same modes with `mu_j = 0` for `j > J`.
    pub fn truncate(&self, j: usize) -> Self {
        let mut eigenvalues = self.eigenvalues.clone();
        for m in eigenvalues.iter_mut().skip(j) {
            *m = 0.0;
        }
        Self {
            eigenvalues,
            decay: self.decay,
        }
    }

    /// `sum_{j <= J} mu_j e_j(x)^2`, the variance of `W(1, x)` restricted to
    /// the first `J` modes.
    pub fn pointwise_variance(&self, j_max: usize, x: f64) -> f64 {
        self.eigenvalues
            .iter()
            .take(j_max)
            .enumerate()
            .map(|(i, m)| {
                let e = eigenfunction(i + 1, x);
                m * e * e
            })
            .sum()
    }
}
