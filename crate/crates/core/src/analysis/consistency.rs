//! Splitting of the residual of a reference solution into the five
//! consistency terms
//!
//! 1. `X_0 - xi_h`,
//! 2. `(S(t_n) - S_k^n) X_0`,
//! 3. `sum_j int_{t_{j-1}}^{t_j} (S(t_n - s) - S_k^{n-j+1}) f(X(s)) ds`,
//! 4. `sum_j int_{t_{j-1}}^{t_j} (S(t_n - s) - S_k^{n-j+1}) g(X(s)) dW(s)`,
//! 5. `sum_j S_k^{n-j} (int S_k [-f(X) ds + g(X) dW] - Phi(X(t_{j-1})))`.
//!
//! The integrals are sums over the steps of the reference. Because the
//! reference does not solve the mild equation exactly, the identity carries
//! one more term, the reference's own defect against the discretized mild
//! formula.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::norms::{max_over_nodes, spijker_from_partial_sums, NormReport};
use crate::error::{invalid, Result};
use crate::noise::WienerPath;
use crate::scheme::{Discretization, GridProcess, StepNoise};
use crate::spectral::SpectralVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub initial: f64,
    pub semigroup: NormReport,
    pub drift: NormReport,
    pub diffusion: NormReport,
    pub increment: NormReport,
    /// `max_n ||X_ref(t_n) - mild(t_n)||_{L_p}`.
    pub reference_defect: NormReport,
    /// Spijker norm of the residual of the restricted reference.
    pub spijker: NormReport,
    /// The same with partial sums lifted onto the eigenbasis.
    pub spijker_lifted: NormReport,
}

impl ConsistencyReport {
    pub fn sum_of_terms(&self) -> f64 {
        self.initial + self.semigroup.value + self.drift.value + self.diffusion.value + self.increment.value
    }
}

struct PathTerms {
    semigroup: Vec<f64>,
    drift: Vec<f64>,
    diffusion: Vec<f64>,
    increment: Vec<f64>,
    defect: Vec<f64>,
    spijker: Vec<f64>,
    spijker_lifted: Vec<f64>,
}

fn decay(exact: &mut SpectralVector, lambdas: &[f64], t: f64) {
    for (c, l) in exact.coefficients_mut().iter_mut().zip(lambdas) {
        *c *= (-l * t).exp();
    }
}

fn diff_norm(a: &SpectralVector, b: &SpectralVector) -> f64 {
    a.coefficients()
        .iter()
        .zip(b.coefficients())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn path_terms(disc: &Discretization, reference: &GridProcess, fine_path: &WienerPath) -> Result<PathTerms> {
    let grid = disc.grid();
    let r = grid
        .refinement_factor(&reference.grid)
        .ok_or_else(|| crate::Error::InvalidArgument("reference grid does not refine the scheme grid".into()))?;
    let ops = disc.ops();
    let problem = disc.problem();
    let n_sp = problem.basis_modes;
    let basis = problem.basis();
    let lambdas = basis.eigenvalues().to_vec();
    let dim = disc.mesh().dim();
    let kf = reference.grid.step();
    let coarse_path = fine_path.coarsen(r)?;
    let f = &problem.drift.symbol;
    let g = &problem.diffusion.symbol;
    let mut ws = disc.workspace();

    let x0 = problem.initial.resized(n_sp);
    let mut exact_x0 = x0.clone();
    let mut sk_x0 = disc.initial().values().to_vec();
    let mut bf = SpectralVector::zeros(n_sp);
    let mut bg = SpectralVector::zeros(n_sp);
    let mut af = vec![0.0; dim];
    let mut ag = vec![0.0; dim];
    let mut c5 = vec![0.0; dim];
    let mut spijker_sum = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    let mut next = vec![0.0; dim];
    let mut fine_dw = vec![0.0; dim];
    let lifted0 = ops.lift_values(&reference.states[0], n_sp);

    let mut out = PathTerms {
        semigroup: vec![0.0],
        drift: vec![0.0],
        diffusion: vec![0.0],
        increment: vec![0.0],
        defect: vec![diff_norm(&lifted0, &x0)],
        spijker: vec![ops.h_norm_values(&reference.states[0].iter().zip(disc.initial().values()).map(|(a, b)| a - b).collect::<Vec<_>>())],
        spijker_lifted: vec![0.0],
    };
    out.spijker_lifted[0] = out.spijker[0];

    for j in 1..=grid.n_steps() {
        // E(k) on the exact parts, then add this step's quadrature nodes
        decay(&mut bf, &lambdas, grid.step());
        decay(&mut bg, &lambdas, grid.step());
        decay(&mut exact_x0, &lambdas, grid.step());
        let mut fj = vec![0.0; dim];
        let mut gj = vec![0.0; dim];
        for l in 0..r {
            let fine_step = (j - 1) * r + l + 1;
            let xs = &reference.states[fine_step - 1];
            disc.nodal_increment(fine_path.step_increments(fine_step), disc.euler_modes(), &mut fine_dw, &mut ws);
            let fv: Vec<f64> = xs.iter().map(|&v| kf * f.eval(v)).collect();
            let gv: Vec<f64> = xs.iter().zip(&fine_dw).map(|(&v, w)| g.eval(v) * w).collect();
            let age = grid.time(j) - reference.grid.time(fine_step - 1);
            let mut lf = ops.lift_values(&fv, n_sp);
            let mut lg = ops.lift_values(&gv, n_sp);
            decay(&mut lf, &lambdas, age);
            decay(&mut lg, &lambdas, age);
            bf.axpy(1.0, &lf);
            bg.axpy(1.0, &lg);
            for i in 0..dim {
                fj[i] += fv[i];
                gj[i] += gv[i];
            }
        }
        // A_n = S (A_{n-1} + F_n)
        for (a, v) in [(&mut af, &fj), (&mut ag, &gj)] {
            for i in 0..dim {
                a[i] += v[i];
            }
            disc.apply_sk(a, &mut tmp);
            a.copy_from_slice(&tmp);
        }
        // C_n = S C_{n-1} + S(-F_n + G_n) - Phi_n
        let (euler, milstein) = disc.step_noise_from_increments(coarse_path.step_increments(j), &mut ws);
        let noise = StepNoise {
            euler: &euler,
            milstein: milstein.as_deref(),
        };
        let x_prev = &reference.states[(j - 1) * r];
        let mut phi = vec![0.0; dim];
        disc.increment_load(x_prev, noise, &mut phi, &mut ws)?;
        disc.solve_euler(&mut phi);
        let local: Vec<f64> = gj.iter().zip(&fj).map(|(g, f)| g - f).collect();
        let mut s_local = vec![0.0; dim];
        disc.apply_sk(&local, &mut s_local);
        disc.apply_sk(&c5, &mut tmp);
        for i in 0..dim {
            c5[i] = tmp[i] + s_local[i] - phi[i];
        }
        // residual partial sums
        disc.advance(x_prev, noise, &mut next, &mut ws)?;
        let x_now = &reference.states[j * r];
        disc.apply_sk(&spijker_sum, &mut tmp);
        for i in 0..dim {
            spijker_sum[i] = tmp[i] + x_now[i] - next[i];
        }
        disc.apply_sk(&sk_x0, &mut tmp);
        sk_x0.copy_from_slice(&tmp);

        out.semigroup.push(diff_norm(&exact_x0, &ops.lift_values(&sk_x0, n_sp)));
        out.drift.push(diff_norm(&bf, &ops.lift_values(&af, n_sp)));
        out.diffusion.push(diff_norm(&bg, &ops.lift_values(&ag, n_sp)));
        out.increment.push(ops.h_norm_values(&c5));
        let mut mild = exact_x0.clone();
        mild.axpy(-1.0, &bf);
        mild.axpy(1.0, &bg);
        out.defect.push(diff_norm(&ops.lift_values(x_now, n_sp), &mild));
        out.spijker.push(ops.h_norm_values(&spijker_sum));
        out.spijker_lifted.push(ops.lift_values(&spijker_sum, n_sp).norm());
    }
    Ok(out)
}

/// Splits the residual of `references` (same mesh as `disc`, time grid
/// refining it) into the consistency terms.
pub fn consistency_terms(
    disc: &Discretization,
    references: &[GridProcess],
    fine_paths: &[WienerPath],
    p: f64,
) -> Result<ConsistencyReport> {
    if references.len() != fine_paths.len() || references.is_empty() {
        return invalid("need one fine path per reference process");
    }
    if disc.noise_mesh() != disc.mesh() {
        return invalid("consistency terms need the noise products on the scheme mesh");
    }
    if disc.milstein_modes().is_some_and(|m| m != disc.euler_modes()) {
        return invalid("consistency terms need an untruncated scheme");
    }
    if references.iter().any(|z| z.mesh != disc.mesh()) {
        return invalid("reference must live on the scheme mesh");
    }
    let terms: Vec<PathTerms> = references
        .par_iter()
        .zip(fine_paths)
        .map(|(z, w)| path_terms(disc, z, w))
        .collect::<Result<_>>()?;
    let collect = |sel: fn(&PathTerms) -> &Vec<f64>| -> Vec<Vec<f64>> { terms.iter().map(|t| sel(t).clone()).collect() };
    let problem = disc.problem();
    let x0 = problem.initial.norm();
    let ph = disc.ops().h_norm(disc.initial());
    Ok(ConsistencyReport {
        initial: (x0 * x0 - ph * ph).max(0.0).sqrt(),
        semigroup: max_over_nodes(&collect(|t| &t.semigroup), p)?,
        drift: max_over_nodes(&collect(|t| &t.drift), p)?,
        diffusion: max_over_nodes(&collect(|t| &t.diffusion), p)?,
        increment: max_over_nodes(&collect(|t| &t.increment), p)?,
        reference_defect: max_over_nodes(&collect(|t| &t.defect), p)?,
        spijker: spijker_from_partial_sums(&collect(|t| &t.spijker), p)?,
        spijker_lifted: spijker_from_partial_sums(&collect(|t| &t.spijker_lifted), p)?,
    })
}
