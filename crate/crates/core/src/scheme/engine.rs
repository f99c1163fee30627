//! One step of the Milstein-Galerkin scheme
//! `X_n = S_{k,h} X_{n-1} + Phi(X_{n-1})` with
//! `Phi(x) = S_{k,h} P_h [-k f(x) + g(x) dW + g'(x)(g(x) .) (iterated integrals)]`.
//!
//! The drift is evaluated at the nodes of the scheme mesh. The noise terms
//! are formed at the nodes of a (possibly finer) noise mesh and projected,
//! so noise modes above the resolution of the scheme mesh do not alias onto
//! low modes. For a Nemytskii diffusion the double sum over iterated
//! integrals only sees their symmetric parts, which gives
//! `1/2 b_g'(x) b_g(x) (dW^2 - k sum_j mu_j e_j^2)` pointwise.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{invalid, Error, Result};
use crate::fem::{prolong_values, DstWorkspace, FemOperators, GridFunctionH, Mesh1D, TridiagonalFactor};
use crate::noise::IteratedIntegrals;
use crate::problem::ProblemSpec;
use crate::scheme::{SchemeConfig, TimeGrid};

/// Nodal noise increments of one step on the noise mesh.
#[derive(Clone, Copy, Debug)]
pub struct StepNoise<'a> {
    pub euler: &'a [f64],
    /// `None` for Euler-Maruyama.
    pub milstein: Option<&'a [f64]>,
}

/// Scratch buffers for [`Discretization`].
#[derive(Clone, Debug)]
pub struct Workspace {
    dst: DstWorkspace,
    folded: Vec<f64>,
    coarse: Vec<f64>,
    fine_a: Vec<f64>,
    fine_b: Vec<f64>,
    fine_c: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Discretization {
    config: SchemeConfig,
    ops: FemOperators,
    noise_ops: Option<FemOperators>,
    euler: TridiagonalFactor,
    sqrt_mu: Vec<f64>,
    euler_modes: usize,
    milstein_modes: Option<usize>,
    /// `k sum_{j <= J} mu_j e_j^2` at the noise nodes.
    milstein_variance: Vec<f64>,
    problem: ProblemSpec,
    initial: GridFunctionH,
}

impl Discretization {
    pub fn new(problem: &ProblemSpec, config: &SchemeConfig) -> Result<Self> {
        problem.validate()?;
        config.validate()?;
        let k = config.grid.step();
        let n_modes = problem.noise.n_modes();
        let ops = FemOperators::with_time_steps(config.mesh, &[k])?;
        let euler = ops.euler_factor(k)?.into_owned();
        let q = config.resolved_noise_cells(n_modes)?;
        let noise_ops = if q == config.mesh.n_cells() {
            None
        } else {
            Some(FemOperators::assemble(Mesh1D::new(q)?)?)
        };
        let (euler_modes, milstein_modes) = config.variant.mode_counts(n_modes);
        let mu = problem.noise.eigenvalues();
        let milstein_variance = match milstein_modes {
            Some(jm) => (1..q)
                .map(|p| {
                    let x = p as f64 / q as f64;
                    k * mu
                        .iter()
                        .take(jm)
                        .enumerate()
                        .map(|(i, m)| {
                            let e = SQRT_2 * ((i + 1) as f64 * PI * x).sin();
                            m * e * e
                        })
                        .sum::<f64>()
                })
                .collect(),
            None => Vec::new(),
        };
        let initial = ops.project_spectral(&problem.initial);
        Ok(Self {
            config: config.clone(),
            ops,
            noise_ops,
            euler,
            sqrt_mu: problem.noise.sqrt_eigenvalues(),
            euler_modes,
            milstein_modes,
            milstein_variance,
            problem: problem.clone(),
            initial,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn grid(&self) -> TimeGrid {
        self.config.grid
    }

    pub fn mesh(&self) -> Mesh1D {
        self.config.mesh
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn ops(&self) -> &FemOperators {
        &self.ops
    }

    pub fn noise_mesh(&self) -> Mesh1D {
        self.noise_ops.as_ref().map_or(self.config.mesh, |o| o.mesh())
    }

    pub fn euler_modes(&self) -> usize {
        self.euler_modes
    }

    pub fn milstein_modes(&self) -> Option<usize> {
        self.milstein_modes
    }

    /// `xi_h = P_h X_0`.
    pub fn initial(&self) -> &GridFunctionH {
        &self.initial
    }

    pub fn workspace(&self) -> Workspace {
        let q = self.noise_mesh().dim();
        let n = self.config.mesh.dim();
        let t = self
            .noise_ops
            .as_ref()
            .map_or_else(|| self.ops.transform().workspace(), |o| o.transform().workspace());
        Workspace {
            dst: t,
            folded: vec![0.0; q],
            coarse: vec![0.0; n],
            fine_a: vec![0.0; q],
            fine_b: vec![0.0; q],
            fine_c: vec![0.0; q],
        }
    }

    fn noise_fem(&self) -> &FemOperators {
        self.noise_ops.as_ref().unwrap_or(&self.ops)
    }

    /// `sum_{j <= modes} sqrt(mu_j) dbeta_j e_j` at the noise nodes.
    pub fn nodal_increment(&self, dbeta: &[f64], modes: usize, out: &mut [f64], ws: &mut Workspace) {
        let modes = modes.min(dbeta.len()).min(self.sqrt_mu.len());
        let scaled: Vec<f64> = dbeta[..modes]
            .iter()
            .zip(&self.sqrt_mu)
            .map(|(b, s)| SQRT_2 * s * b)
            .collect();
        let t = self.noise_fem().transform();
        t.fold(&scaled, &mut ws.folded);
        t.dst(&ws.folded, out, &mut ws.dst);
    }

    /// Nodal increments needed by this variant, `(euler, milstein)`.
    pub fn step_noise_from_increments(&self, dbeta: &[f64], ws: &mut Workspace) -> (Vec<f64>, Option<Vec<f64>>) {
        let q = self.noise_mesh().dim();
        let mut euler = vec![0.0; q];
        self.nodal_increment(dbeta, self.euler_modes, &mut euler, ws);
        let milstein = match self.milstein_modes {
            Some(m) if m == self.euler_modes => Some(euler.clone()),
            Some(m) => {
                let mut v = vec![0.0; q];
                self.nodal_increment(dbeta, m, &mut v, ws);
                Some(v)
            }
            None => None,
        };
        (euler, milstein)
    }

    fn check_shapes(&self, x: &[f64], out: &[f64], noise: StepNoise<'_>) -> Result<()> {
        let q = self.noise_mesh().dim();
        if x.len() != self.config.mesh.dim() || out.len() != x.len() {
            return invalid("state does not match the scheme mesh");
        }
        if noise.euler.len() != q || noise.milstein.is_some_and(|m| m.len() != q) {
            return invalid("noise increments do not match the noise mesh");
        }
        if noise.milstein.is_some() != self.milstein_modes.is_some() {
            return invalid("Milstein increments given for the wrong variant");
        }
        Ok(())
    }

    /// Load of the noise terms, `(g(x) dW + milstein, phi_i)`; either term
    /// can be left out.
    fn noise_load(
        &self,
        x: &[f64],
        noise: StepNoise<'_>,
        with_euler: bool,
        with_milstein: bool,
        out: &mut [f64],
        ws: &mut Workspace,
    ) -> Result<()> {
        let g = &self.problem.diffusion.symbol;
        let q = self.noise_mesh().dim();
        let xs: &[f64] = match &self.noise_ops {
            None => x,
            Some(fine) => {
                prolong_values(self.config.mesh, x, fine.mesh(), &mut ws.fine_a)?;
                &ws.fine_a
            }
        };
        let vals = &mut ws.fine_b;
        for p in 0..q {
            let (gv, gd) = g.eval_with_derivative(xs[p]);
            let mut s = if with_euler { gv * noise.euler[p] } else { 0.0 };
            if let (true, Some(m)) = (with_milstein, noise.milstein) {
                s += 0.5 * gd * gv * (m[p] * m[p] - self.milstein_variance[p]);
            }
            vals[p] = s;
        }
        match &self.noise_ops {
            None => self.ops.mass().mul_vec(vals, out),
            Some(fine) => self.ops.restrict_load_into(fine, vals, &mut ws.fine_c, out)?,
        }
        Ok(())
    }

    /// Load of the drift term, `(-k f(x), phi_i)`.
    fn drift_load(&self, x: &[f64], out: &mut [f64], ws: &mut Workspace) {
        let k = self.config.grid.step();
        let f = &self.problem.drift.symbol;
        for (c, &v) in ws.coarse.iter_mut().zip(x) {
            *c = -k * f.eval(v);
        }
        self.ops.mass().mul_vec(&ws.coarse, out);
    }

    /// Load vector `b` with `Phi(x) = (M + kK)^{-1} b`.
    pub fn increment_load(&self, x: &[f64], noise: StepNoise<'_>, out: &mut [f64], ws: &mut Workspace) -> Result<()> {
        self.check_shapes(x, out, noise)?;
        if self.noise_ops.is_none() {
            // Single pass over the nodes on the common mesh.
            let k = self.config.grid.step();
            let f = &self.problem.drift.symbol;
            let g = &self.problem.diffusion.symbol;
            let v = &mut ws.coarse;
            for i in 0..x.len() {
                let (gv, gd) = g.eval_with_derivative(x[i]);
                let mut s = -k * f.eval(x[i]) + gv * noise.euler[i];
                if let Some(m) = noise.milstein {
                    s += 0.5 * gd * gv * (m[i] * m[i] - self.milstein_variance[i]);
                }
                v[i] = s;
            }
            self.ops.mass().mul_vec(v, out);
            return Ok(());
        }
        self.noise_load(x, noise, true, true, out, ws)?;
        let mut drift = vec![0.0; out.len()];
        self.drift_load(x, &mut drift, ws);
        for (o, d) in out.iter_mut().zip(&drift) {
            *o += d;
        }
        Ok(())
    }

    /// `out = S_{k,h} x + Phi(x)`.
    pub fn advance(&self, x: &[f64], noise: StepNoise<'_>, out: &mut [f64], ws: &mut Workspace) -> Result<()> {
        self.increment_load(x, noise, out, ws)?;
        let n = x.len();
        let mx = &mut ws.coarse;
        self.ops.mass().mul_vec(x, mx);
        for i in 0..n {
            out[i] += mx[i];
        }
        self.euler.solve_in_place(out);
        Ok(())
    }

    /// `S_{k,h} x`.
    pub fn apply_sk(&self, x: &[f64], out: &mut [f64]) {
        self.ops.mass().mul_vec(x, out);
        self.euler.solve_in_place(out);
    }

    /// `S_{k,h} P_h y` for `y` given by its load vector `(y, phi_i)`.
    pub fn solve_euler(&self, load: &mut [f64]) {
        self.euler.solve_in_place(load);
    }

    /// `Phi(x)` for one step.
    pub fn increment_phi(&self, x: &GridFunctionH, noise: StepNoise<'_>) -> Result<GridFunctionH> {
        let mut ws = self.workspace();
        let mut b = vec![0.0; self.config.mesh.dim()];
        self.increment_load(x.values(), noise, &mut b, &mut ws)?;
        self.euler.solve_in_place(&mut b);
        GridFunctionH::from_values(self.config.mesh, b)
    }

    /// The drift, Euler-noise and Milstein parts of `Phi(x)` separately.
    pub fn increment_parts(&self, x: &GridFunctionH, noise: StepNoise<'_>) -> Result<[GridFunctionH; 3]> {
        let n = self.config.mesh.dim();
        self.check_shapes(x.values(), x.values(), noise)?;
        let mut ws = self.workspace();
        let mut parts = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        self.drift_load(x.values(), &mut parts[0], &mut ws);
        self.noise_load(x.values(), noise, true, false, &mut parts[1], &mut ws)?;
        self.noise_load(x.values(), noise, false, true, &mut parts[2], &mut ws)?;
        let [a, b, c] = parts.map(|mut p| {
            self.euler.solve_in_place(&mut p);
            p
        });
        Ok([
            GridFunctionH::from_values(self.config.mesh, a)?,
            GridFunctionH::from_values(self.config.mesh, b)?,
            GridFunctionH::from_values(self.config.mesh, c)?,
        ])
    }

    /// `Phi(x)` with the Milstein term summed over explicit iterated
    /// integrals, `sum_{i,j <= J} sqrt(mu_i mu_j) b_g'(x) b_g(x) e_j e_i I_(j,i)`.
    pub fn increment_phi_iterated(
        &self,
        x: &GridFunctionH,
        dbeta: &[f64],
        iterated: &IteratedIntegrals,
        step: usize,
    ) -> Result<GridFunctionH> {
        let jm = match self.milstein_modes {
            Some(j) => j,
            None => return invalid("Euler-Maruyama has no iterated-integral term"),
        };
        if iterated.n_modes() < jm {
            return invalid(format!(
                "iterated integrals cover {} modes, the scheme needs {jm}",
                iterated.n_modes()
            ));
        }
        let mut ws = self.workspace();
        let (euler, _) = self.step_noise_from_increments(dbeta, &mut ws);
        let nm = self.noise_mesh();
        let qn = nm.n_cells();
        let mut double_sum = vec![0.0; nm.dim()];
        let mut table = vec![0.0; jm];
        for p in 1..qn {
            let xp = p as f64 / qn as f64;
            for (i, t) in table.iter_mut().enumerate() {
                *t = self.sqrt_mu[i] * SQRT_2 * ((i + 1) as f64 * PI * xp).sin();
            }
            let mut s = 0.0;
            for i in 1..=jm {
                for j in 1..=jm {
                    s += table[i - 1] * table[j - 1] * iterated.get(step, j, i)?;
                }
            }
            double_sum[p - 1] = s;
        }
        let n = self.config.mesh.dim();
        let k = self.config.grid.step();
        let f = &self.problem.drift.symbol;
        let g = &self.problem.diffusion.symbol;
        let fine_x = match &self.noise_ops {
            None => x.values().to_vec(),
            Some(fine) => self.ops.prolong(x, fine.mesh())?.into_values(),
        };
        let noise_vals: Vec<f64> = fine_x
            .iter()
            .enumerate()
            .map(|(p, &xp)| {
                let (gv, gd) = g.eval_with_derivative(xp);
                gv * euler[p] + gd * gv * double_sum[p]
            })
            .collect();
        let mut b = match &self.noise_ops {
            None => self.ops.mass().mul(&noise_vals),
            Some(fine) => self.ops.restrict_load(fine, &noise_vals)?,
        };
        let drift: Vec<f64> = x.values().iter().map(|&v| -k * f.eval(v)).collect();
        let md = self.ops.mass().mul(&drift);
        for i in 0..n {
            b[i] += md[i];
        }
        self.euler.solve_in_place(&mut b);
        GridFunctionH::from_values(self.config.mesh, b)
    }
}

pub(crate) fn non_finite(step: usize, grid: &TimeGrid) -> Error {
    Error::NonFinite {
        step,
        time: grid.time(step),
    }
}
