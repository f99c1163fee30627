//! Piecewise-linear finite elements on a uniform mesh of (0, 1).
//!
//! A function in `V_h` is stored by its values at the interior nodes
//! `x_i = i h`, `i = 1..n_cells-1`. Inner products with the eigenbasis are
//! evaluated in closed form, so the projections and the lift back to
//! spectral coefficients involve no quadrature error.

mod dense;
mod error_operator;
mod transform;
mod tridiag;

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::{eigenvalue, SpectralVector};

pub use dense::DenseOperators;
pub use error_operator::{error_operator, error_operator_time_l2};
pub use transform::{DstWorkspace, SineTransform};
pub use tridiag::{SymTridiagonal, TridiagonalFactor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mesh1D {
    n_cells: usize,
}

impl Mesh1D {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return invalid(format!("a mesh needs at least 2 cells, got {n_cells}"));
        }
        Ok(Self { n_cells })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    /// Number of interior nodes, the dimension of `V_h`.
    pub fn dim(&self) -> usize {
        self.n_cells - 1
    }

    /// Coordinate of node `i`, `0 <= i <= n_cells`.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n_cells as f64
    }

    /// `Some(r)` when `fine` splits every cell of `self` into `r` cells.
    pub fn refinement_factor(&self, fine: &Mesh1D) -> Option<usize> {
        fine.n_cells.is_multiple_of(self.n_cells).then(|| fine.n_cells / self.n_cells)
    }
}

/// Element of `V_h` given by its interior nodal values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunctionH {
    mesh: Mesh1D,
    values: Vec<f64>,
}

impl GridFunctionH {
    pub fn zeros(mesh: Mesh1D) -> Self {
        Self {
            mesh,
            values: vec![0.0; mesh.dim()],
        }
    }

    pub fn from_values(mesh: Mesh1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.dim() {
            return invalid(format!(
                "{} nodal values given for a mesh with {} interior nodes",
                values.len(),
                mesh.dim()
            ));
        }
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> Mesh1D {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.mesh, other.mesh);
        Self {
            mesh: self.mesh,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.mesh, other.mesh);
        Self {
            mesh: self.mesh,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    /// Value at `x` of the piecewise-linear interpolant.
    pub fn evaluate(&self, x: f64) -> f64 {
        let n = self.mesh.n_cells;
        let s = (x.clamp(0.0, 1.0)) * n as f64;
        let cell = (s.floor() as usize).min(n - 1);
        let w = s - cell as f64;
        let left = if cell == 0 { 0.0 } else { self.values[cell - 1] };
        let right = if cell + 1 == n { 0.0 } else { self.values[cell] };
        (1.0 - w) * left + w * right
    }
}

/// `(phi_i, e_j) = sqrt(2) w_j sin(j pi x_i)` with this `w_j`.
pub(crate) fn hat_weight(j: usize, h: f64) -> f64 {
    let half = 0.5 * j as f64 * PI * h;
    let sinc = if half == 0.0 { 1.0 } else { half.sin() / half };
    h * sinc * sinc
}

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
];

/// Mass and stiffness matrices of one mesh with their factorizations and
/// cached backward-Euler factors `(M + kK)`.
#[derive(Clone, Debug)]
pub struct FemOperators {
    mesh: Mesh1D,
    mass: SymTridiagonal,
    stiffness: SymTridiagonal,
    mass_factor: TridiagonalFactor,
    stiffness_factor: TridiagonalFactor,
    transform: SineTransform,
    euler: Vec<(f64, TridiagonalFactor)>,
}

impl FemOperators {
    pub fn assemble(mesh: Mesh1D) -> Result<Self> {
        Self::with_time_steps(mesh, &[])
    }

    pub fn with_time_steps(mesh: Mesh1D, steps: &[f64]) -> Result<Self> {
        let n = mesh.dim();
        let h = mesh.h();
        let mass = SymTridiagonal::constant(n, 2.0 * h / 3.0, h / 6.0);
        let stiffness = SymTridiagonal::constant(n, 2.0 / h, -1.0 / h);
        let mass_factor = mass.factor()?;
        let stiffness_factor = stiffness.factor()?;
        let mut ops = Self {
            mesh,
            mass,
            stiffness,
            mass_factor,
            stiffness_factor,
            transform: SineTransform::new(mesh.n_cells()),
            euler: Vec::new(),
        };
        for &k in steps {
            let f = ops.build_euler(k)?;
            ops.euler.push((k, f));
        }
        Ok(ops)
    }

    fn build_euler(&self, k: f64) -> Result<TridiagonalFactor> {
        if !(k > 0.0 && k.is_finite()) {
            return invalid(format!("time step must be positive, got {k}"));
        }
        self.mass.combine(1.0, &self.stiffness, k).factor()
    }

    pub fn mesh(&self) -> Mesh1D {
        self.mesh
    }

    pub fn mass(&self) -> &SymTridiagonal {
        &self.mass
    }

    pub fn stiffness(&self) -> &SymTridiagonal {
        &self.stiffness
    }

    pub fn transform(&self) -> &SineTransform {
        &self.transform
    }

    pub fn mass_solve_in_place(&self, b: &mut [f64]) {
        self.mass_factor.solve_in_place(b);
    }

    /// Factor of `M + kK`, from the cache when `k` was registered.
    pub fn euler_factor(&self, k: f64) -> Result<std::borrow::Cow<'_, TridiagonalFactor>> {
        if let Some((_, f)) = self.euler.iter().find(|(kk, _)| *kk == k) {
            return Ok(std::borrow::Cow::Borrowed(f));
        }
        Ok(std::borrow::Cow::Owned(self.build_euler(k)?))
    }

    fn check(&self, u: &GridFunctionH) {
        assert_eq!(u.mesh(), self.mesh, "grid function lives on another mesh");
    }

    pub fn h_inner(&self, u: &GridFunctionH, v: &GridFunctionH) -> f64 {
        self.check(u);
        self.check(v);
        self.mass.bilinear(&u.values, &v.values)
    }

    /// `||u||` in `H = L^2`.
    pub fn h_norm(&self, u: &GridFunctionH) -> f64 {
        self.h_norm_values(&u.values)
    }

    pub fn h_norm_values(&self, u: &[f64]) -> f64 {
        self.mass.bilinear(u, u).max(0.0).sqrt()
    }

    /// `||u||_1 = ||A^{1/2} u||`, exact for `u` in `V_h`.
    pub fn energy_norm(&self, u: &GridFunctionH) -> f64 {
        self.check(u);
        self.stiffness.bilinear(&u.values, &u.values).max(0.0).sqrt()
    }

    /// `S_{k,h} u = (I + k A_h)^{-1} u`.
    pub fn step_skh(&self, u: &GridFunctionH, k: f64) -> Result<GridFunctionH> {
        self.check(u);
        let f = self.euler_factor(k)?;
        let mut b = self.mass.mul(&u.values);
        f.solve_in_place(&mut b);
        Ok(GridFunctionH {
            mesh: self.mesh,
            values: b,
        })
    }

    /// `(x, phi_i)` for every interior hat function.
    pub fn load_spectral(&self, x: &SpectralVector) -> Vec<f64> {
        let h = self.mesh.h();
        let c: Vec<f64> = x
            .coefficients()
            .iter()
            .enumerate()
            .map(|(i, xj)| SQRT_2 * hat_weight(i + 1, h) * xj)
            .collect();
        let mut folded = vec![0.0; self.mesh.dim()];
        self.transform.fold(&c, &mut folded);
        self.transform.dst_alloc(&folded)
    }

    /// `P_h x`, the `L^2` projection onto `V_h`.
    pub fn project_spectral(&self, x: &SpectralVector) -> GridFunctionH {
        let mut b = self.load_spectral(x);
        self.mass_factor.solve_in_place(&mut b);
        GridFunctionH {
            mesh: self.mesh,
            values: b,
        }
    }

    /// `P_h f` for a point-evaluable `f`, four Gauss points per cell.
    pub fn project_function(&self, f: impl Fn(f64) -> f64) -> GridFunctionH {
        let n = self.mesh.n_cells();
        let h = self.mesh.h();
        let mut b = vec![0.0; self.mesh.dim()];
        for cell in 0..n {
            let a = cell as f64 * h;
            for &(g, w) in &GAUSS4 {
                let s = 0.5 * (g + 1.0);
                let fx = f(a + s * h) * w * 0.5 * h;
                if cell > 0 {
                    b[cell - 1] += fx * (1.0 - s);
                }
                if cell + 1 < n {
                    b[cell] += fx * s;
                }
            }
        }
        self.mass_factor.solve_in_place(&mut b);
        GridFunctionH {
            mesh: self.mesh,
            values: b,
        }
    }

    /// `R_h x`, the projection orthogonal in `(A^{1/2} ., A^{1/2} .)`.
    pub fn ritz_spectral(&self, x: &SpectralVector) -> GridFunctionH {
        let h = self.mesh.h();
        let c: Vec<f64> = x
            .coefficients()
            .iter()
            .enumerate()
            .map(|(i, xj)| eigenvalue(i + 1) * SQRT_2 * hat_weight(i + 1, h) * xj)
            .collect();
        let mut folded = vec![0.0; self.mesh.dim()];
        self.transform.fold(&c, &mut folded);
        let mut b = self.transform.dst_alloc(&folded);
        self.stiffness_factor.solve_in_place(&mut b);
        GridFunctionH {
            mesh: self.mesh,
            values: b,
        }
    }

    /// Nodal values of `x`.
    pub fn interpolate_spectral(&self, x: &SpectralVector) -> GridFunctionH {
        let c: Vec<f64> = x.coefficients().iter().map(|v| SQRT_2 * v).collect();
        let mut folded = vec![0.0; self.mesh.dim()];
        self.transform.fold(&c, &mut folded);
        GridFunctionH {
            mesh: self.mesh,
            values: self.transform.dst_alloc(&folded),
        }
    }

    /// Exact coefficients `(u, e_j)`, `j = 1..=n_modes`.
    pub fn lift(&self, u: &GridFunctionH, n_modes: usize) -> SpectralVector {
        self.check(u);
        self.lift_values(&u.values, n_modes)
    }

    pub fn lift_values(&self, u: &[f64], n_modes: usize) -> SpectralVector {
        let h = self.mesh.h();
        let s = self.transform.dst_alloc(u);
        let coefficients = (1..=n_modes)
            .map(|j| SQRT_2 * hat_weight(j, h) * self.transform.alias(&s, j))
            .collect();
        SpectralVector::from_coefficients(coefficients).expect("finite input gives finite lift")
    }

    /// The same function on a nested finer mesh.
    pub fn prolong(&self, u: &GridFunctionH, fine: Mesh1D) -> Result<GridFunctionH> {
        self.check(u);
        let mut out = vec![0.0; fine.dim()];
        prolong_values(self.mesh, &u.values, fine, &mut out)?;
        Ok(GridFunctionH {
            mesh: fine,
            values: out,
        })
    }

    /// `(v, phi_i)` for a function `v` of the nested finer mesh `fine`.
    pub fn restrict_load(&self, fine: &FemOperators, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.mesh.dim()];
        let mut tmp = vec![0.0; fine.mesh.dim()];
        self.restrict_load_into(fine, v, &mut tmp, &mut out)?;
        Ok(out)
    }

    pub(crate) fn restrict_load_into(
        &self,
        fine: &FemOperators,
        v: &[f64],
        tmp: &mut [f64],
        out: &mut [f64],
    ) -> Result<()> {
        let r = self.mesh.refinement_factor(&fine.mesh).ok_or_else(|| {
            crate::Error::InvalidArgument(format!(
                "mesh with {} cells does not refine {} cells",
                fine.mesh.n_cells(),
                self.mesh.n_cells()
            ))
        })?;
        fine.mass.mul_vec(v, tmp);
        if r == 1 {
            out.copy_from_slice(tmp);
            return Ok(());
        }
        let rf = r as f64;
        for (i, o) in out.iter_mut().enumerate() {
            let centre = (i + 1) * r;
            let mut s = tmp[centre - 1];
            for d in 1..r {
                let w = 1.0 - d as f64 / rf;
                s += w * (tmp[centre - 1 - d] + tmp[centre - 1 + d]);
            }
            *o = s;
        }
        Ok(())
    }
}

/// Linear interpolation of coarse nodal values onto a nested finer mesh.
pub(crate) fn prolong_values(coarse: Mesh1D, u: &[f64], fine: Mesh1D, out: &mut [f64]) -> Result<()> {
    let r = coarse.refinement_factor(&fine).ok_or_else(|| {
        crate::Error::InvalidArgument(format!(
            "mesh with {} cells does not refine {} cells",
            fine.n_cells(),
            coarse.n_cells()
        ))
    })?;
    if r == 1 {
        out.copy_from_slice(u);
        return Ok(());
    }
    let n = coarse.n_cells();
    let rf = r as f64;
    for cell in 0..n {
        let left = if cell == 0 { 0.0 } else { u[cell - 1] };
        let right = if cell + 1 == n { 0.0 } else { u[cell] };
        for d in 0..r {
            let p = cell * r + d;
            if p == 0 {
                continue;
            }
            let w = d as f64 / rf;
            out[p - 1] = (1.0 - w) * left + w * right;
        }
    }
    Ok(())
}
