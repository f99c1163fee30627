//! Dense generalized eigendecomposition of `(K, M)` for small meshes.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::fem::FemOperators;

#[derive(Clone, Debug)]
pub struct DenseOperators {
    mass: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    /// Columns are `M`-orthonormal eigenvectors of `A_h = M^{-1} K`.
    eigenvectors: DMatrix<f64>,
}

pub const MAX_DENSE_CELLS: usize = 256;

impl DenseOperators {
    pub fn new(ops: &FemOperators) -> Result<Self> {
        let n_cells = ops.mesh().n_cells();
        if n_cells > MAX_DENSE_CELLS {
            return invalid(format!("dense operators limited to {MAX_DENSE_CELLS} cells, got {n_cells}"));
        }
        let n = ops.mesh().dim();
        let mass = DMatrix::from_fn(n, n, |i, j| ops.mass().get(i, j));
        let stiffness = DMatrix::from_fn(n, n, |i, j| ops.stiffness().get(i, j));
        let chol = mass
            .clone()
            .cholesky()
            .ok_or_else(|| crate::Error::Inconsistent("mass matrix not positive definite".into()))?;
        let l = chol.l();
        let l_inv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| crate::Error::Inconsistent("singular Cholesky factor".into()))?;
        let c = &l_inv * &stiffness * l_inv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let eig = c.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let q = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        let eigenvectors = l_inv.transpose() * q;
        Ok(Self {
            mass,
            stiffness,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    /// Eigenvalues of `A_h`, ascending.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `A_h^s` acting on nodal coefficient vectors.
    pub fn fractional_power(&self, s: f64) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * self.eigenvalues[c].powf(s));
        scaled * v.transpose() * &self.mass
    }

    /// `||A_h^{s/2} u||`.
    pub fn discrete_norm(&self, u: &[f64], s: f64) -> f64 {
        let u = DVector::from_column_slice(u);
        let coords = self.eigenvectors.transpose() * &self.mass * u;
        coords
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(c, l)| l.powf(s) * c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// `(M + kK)^{-1} M`, the matrix of `S_{k,h}` on `V_h`.
    pub fn euler_matrix(&self, k: f64) -> Result<DMatrix<f64>> {
        let a = &self.mass + &self.stiffness * k;
        let lu = a.lu();
        lu.solve(&self.mass)
            .ok_or_else(|| crate::Error::Inconsistent("M + kK is singular".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Mesh1D;
    use std::f64::consts::PI;

    #[test]
    fn discrete_eigenvalues_have_closed_form() {
        let ops = FemOperators::assemble(Mesh1D::new(12).unwrap()).unwrap();
        let d = DenseOperators::new(&ops).unwrap();
        let h = 1.0 / 12.0;
        for j in 1..12 {
            let c = (j as f64 * PI * h).cos();
            let expected = 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
            assert!((d.eigenvalues()[j - 1] - expected).abs() < 1e-9 * expected);
        }
    }

    #[test]
    fn half_powers_compose() {
        let ops = FemOperators::assemble(Mesh1D::new(9).unwrap()).unwrap();
        let d = DenseOperators::new(&ops).unwrap();
        let a = d.fractional_power(1.0);
        let half = d.fractional_power(0.5);
        let diff = &half * &half - &a;
        assert!(diff.amax() < 1e-9 * a.amax());
    }
}
