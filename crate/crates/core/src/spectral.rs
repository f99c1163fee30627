//! Eigenpairs of the Dirichlet Laplacian on (0, 1) and functions of it.
//!
//! Vectors are stored by their coefficients in the orthonormal basis
//! `e_j(x) = sqrt(2) sin(j pi x)`, `j = 1, 2, ...`; index 0 holds `j = 1`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `lambda_j = pi^2 j^2`.
pub fn eigenvalue(j: usize) -> f64 {
    let j = j as f64;
    PI * PI * j * j
}

/// `e_j(x) = sqrt(2) sin(j pi x)`.
pub fn eigenfunction(j: usize, x: f64) -> f64 {
    SQRT_2 * (j as f64 * PI * x).sin()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralVector(Vec<f64>);

impl SpectralVector {
    pub fn zeros(n_modes: usize) -> Self {
        Self(vec![0.0; n_modes])
    }

    /// `e_j` padded to `n_modes` coefficients.
    pub fn unit(n_modes: usize, j: usize) -> Result<Self> {
        if j == 0 || j > n_modes {
            return invalid(format!("mode {j} outside 1..={n_modes}"));
        }
        let mut v = vec![0.0; n_modes];
        v[j - 1] = 1.0;
        Ok(Self(v))
    }

    pub fn from_coefficients(coefficients: Vec<f64>) -> Result<Self> {
        if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
            return invalid(format!("coefficient of mode {} is not finite", i + 1));
        }
        Ok(Self(coefficients))
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Coefficient of `e_j`, zero beyond the stored length.
    pub fn coefficient(&self, j: usize) -> f64 {
        if j == 0 {
            return 0.0;
        }
        self.0.get(j - 1).copied().unwrap_or(0.0)
    }

    /// Copy truncated or zero-padded to `n_modes`.
    pub fn resized(&self, n_modes: usize) -> Self {
        let mut v = self.0.clone();
        v.resize(n_modes, 0.0);
        Self(v)
    }

    /// The `H = L^2(0,1)` norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// `self += a * other`, padding `self` when `other` is longer.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        if other.0.len() > self.0.len() {
            self.0.resize(other.0.len(), 0.0);
        }
        for (s, o) in self.0.iter_mut().zip(&other.0) {
            *s += a * o;
        }
    }

    /// Point value `sum_j x_j e_j(x)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, c)| c * eigenfunction(i + 1, x))
            .sum()
    }
}

/// The first `n_modes` eigenpairs of `A = -d^2/dx^2` with homogeneous
/// Dirichlet conditions.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    eigenvalues: Vec<f64>,
}

impl EigenBasis {
    pub fn dirichlet_laplacian(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return invalid("basis needs at least one mode");
        }
        Ok(Self {
            eigenvalues: (1..=n_modes).map(eigenvalue).collect(),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, j: usize) -> f64 {
        self.eigenvalues[j - 1]
    }

    fn check_len(&self, x: &SpectralVector) {
        assert!(
            x.len() <= self.n_modes(),
            "vector has {} modes but the basis only {}",
            x.len(),
            self.n_modes()
        );
    }

    /// `||x||_s = ||A^{s/2} x||`.
    pub fn fractional_norm(&self, x: &SpectralVector, s: f64) -> f64 {
        self.check_len(x);
        x.coefficients()
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, l)| l.powf(s) * c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// `A^s x` for any real `s`.
    pub fn apply_fractional_power(&self, x: &SpectralVector, s: f64) -> SpectralVector {
        self.check_len(x);
        SpectralVector(
            x.coefficients()
                .iter()
                .zip(&self.eigenvalues)
                .map(|(c, l)| l.powf(s) * c)
                .collect(),
        )
    }

    /// `E(t) x = exp(-tA) x`.
    pub fn apply_semigroup(&self, x: &SpectralVector, t: f64) -> Result<SpectralVector> {
        if !(t >= 0.0) {
            return invalid(format!("semigroup time must be non-negative, got {t}"));
        }
        self.check_len(x);
        Ok(SpectralVector(
            x.coefficients()
                .iter()
                .zip(&self.eigenvalues)
                .map(|(c, l)| (-l * t).exp() * c)
                .collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_eigenvalues() {
        let basis = EigenBasis::dirichlet_laplacian(3).unwrap();
        assert!((basis.eigenvalue(1) - 9.869604401089358).abs() < 1e-14);
        assert!((basis.eigenvalue(3) - 88.82643960980423).abs() < 1e-12);
    }

    #[test]
    fn norm_of_unit_mode() {
        let basis = EigenBasis::dirichlet_laplacian(8).unwrap();
        let e3 = SpectralVector::unit(8, 3).unwrap();
        let n = basis.fractional_norm(&e3, 0.5);
        assert!((n - (3.0 * PI).sqrt()).abs() < 1e-13);
        assert_eq!(basis.fractional_norm(&e3, 0.0), 1.0);
    }

    #[test]
    fn semigroup_rejects_negative_time() {
        let basis = EigenBasis::dirichlet_laplacian(4).unwrap();
        let x = SpectralVector::unit(4, 1).unwrap();
        assert!(basis.apply_semigroup(&x, -1e-3).is_err());
        assert_eq!(basis.apply_semigroup(&x, 0.0).unwrap(), x);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(SpectralVector::from_coefficients(vec![1.0, f64::NAN]).is_err());
    }
}
