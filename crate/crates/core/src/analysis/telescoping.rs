//! Dense check of
//! `sum_{j=1}^n S_k^{n-j} (S(k) - S_k) S(t_{j-1}) = S(t_n) - S_k^n`
//! with `S_k = S_{k,h} P_h` written in spectral coordinates.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::fem::{FemOperators, GridFunctionH};
use crate::spectral::{EigenBasis, SpectralVector};

/// Matrix of `S_{k,h} P_h` on the first `n_modes` eigenfunctions.
pub fn discrete_semigroup_matrix(ops: &FemOperators, k: f64, n_modes: usize) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(n_modes, n_modes);
    for j in 1..=n_modes {
        let e = SpectralVector::unit(n_modes, j)?;
        let u = ops.project_spectral(&e);
        let s = ops.step_skh(&u, k)?;
        let lifted = ops.lift(&s, n_modes);
        for (i, c) in lifted.coefficients().iter().enumerate() {
            m[(i, j - 1)] = *c;
        }
    }
    Ok(m)
}

fn exact(basis: &EigenBasis, t: f64, n_modes: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n_modes, n_modes, |i, j| {
        if i == j {
            (-basis.eigenvalue(i + 1) * t).exp()
        } else {
            0.0
        }
    })
}

/// Largest entry of the difference of both sides, relative to the largest
/// entry of the right-hand side.
pub fn telescoping_deviation(ops: &FemOperators, basis: &EigenBasis, k: f64, n: usize, n_modes: usize) -> Result<f64> {
    if n == 0 || n_modes == 0 || n_modes > basis.n_modes() {
        return invalid("need n >= 1 and 1 <= n_modes <= basis size");
    }
    let sk = discrete_semigroup_matrix(ops, k, n_modes)?;
    let diff = exact(basis, k, n_modes) - &sk;
    let mut lhs = DMatrix::zeros(n_modes, n_modes);
    let mut sk_pow = DMatrix::identity(n_modes, n_modes);
    for j in (1..=n).rev() {
        lhs += &sk_pow * &diff * exact(basis, (j - 1) as f64 * k, n_modes);
        sk_pow = &sk * sk_pow;
    }
    let rhs = exact(basis, n as f64 * k, n_modes) - &sk_pow;
    Ok((lhs - &rhs).amax() / rhs.amax().max(f64::MIN_POSITIVE))
}

/// Convenience used by tests: `S_{k,h}^n P_h x` as a grid function.
pub fn discrete_power(ops: &FemOperators, k: f64, n: usize, x: &SpectralVector) -> Result<GridFunctionH> {
    let mut u = ops.project_spectral(x);
    for _ in 0..n {
        u = ops.step_skh(&u, k)?;
    }
    Ok(u)
}
