//! Empirical constants of the nonlinear stability conditions on the
//! increment function and of the resulting bistability estimate.
//!
//! `||sum_{j=m}^n S_k^{n-j} Phi(0, t_{j-1})||_{L_p} <= C_Phi (t_n - t_{m-1})^{1/2}`
//! and
//! `||sum_{j=1}^n S_k^{n-j} (Phi(Y_{j-1}) - Phi(Z_{j-1}))||_{L_p}^2
//!     <= C_Phi^2 k sum_{j=1}^n (t_n - t_{j-1})^{-1/2} ||Y_{j-1} - Z_{j-1}||_{L_p}^2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::norms::lp_estimate;
use crate::analysis::residual::{residual, spijker_norm_of_difference, sup_norm_of_difference, ResidualField};
use crate::error::{invalid, Result};
use crate::fem::GridFunctionH;
use crate::noise::rng::{fill_normals, step_rng, Channel};
use crate::noise::WienerPath;
use crate::scheme::{run_with, Discretization, GridProcess, StepNoise};
use crate::spectral::SpectralVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Smallest constant consistent with the bound on `Phi(0)`.
    pub c_phi_zero: f64,
    /// Smallest constant consistent with the Lipschitz-type bound.
    pub c_phi_lipschitz: f64,
    pub c_phi: f64,
    pub n_paths: usize,
}

fn phi_sequence(disc: &Discretization, path: &WienerPath, states: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut ws = disc.workspace();
    let n = disc.mesh().dim();
    let mut out = Vec::with_capacity(disc.grid().n_steps());
    for j in 1..=disc.grid().n_steps() {
        let (euler, milstein) = disc.step_noise_from_increments(path.step_increments(j), &mut ws);
        let noise = StepNoise {
            euler: &euler,
            milstein: milstein.as_deref(),
        };
        let mut b = vec![0.0; n];
        disc.increment_load(&states[j - 1], noise, &mut b, &mut ws)?;
        disc.solve_euler(&mut b);
        out.push(b);
    }
    Ok(out)
}

/// Perturbed copy of the scheme output: same noise, `X_0 + e_2 / 2`.
fn perturbed_run(disc: &Discretization, path: &WienerPath) -> Result<GridProcess> {
    let mut problem = disc.problem().clone();
    let mut x0 = problem.initial.resized(problem.initial.len().max(2));
    x0.axpy(0.5, &SpectralVector::unit(2, 2)?);
    problem.initial = x0;
    let other = Discretization::new(&problem, disc.config())?;
    run_with(&other, path)
}

fn sample_paths(disc: &Discretization, n_paths: usize, seed: u64) -> Result<Vec<WienerPath>> {
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| WienerPath::sample(&disc.problem().noise, disc.grid(), seed, i))
        .collect()
}

pub fn verify_increment_stability(disc: &Discretization, n_paths: usize, seed: u64, p: f64) -> Result<StabilityReport> {
    if n_paths < 2 {
        return invalid("need at least two paths");
    }
    let grid = disc.grid();
    let nt = grid.n_steps();
    let ops = disc.ops();
    let paths = sample_paths(disc, n_paths, seed)?;
    let zeros = vec![vec![0.0; disc.mesh().dim()]; nt + 1];

    // norms[m-1][n-m] = ||sum_{j=m}^n S^{n-j} Phi_j(0)|| for every path
    let zero_sums: Vec<Vec<Vec<f64>>> = paths
        .par_iter()
        .map(|path| {
            let phis = phi_sequence(disc, path, &zeros)?;
            let mut all = Vec::with_capacity(nt);
            let mut tmp = vec![0.0; disc.mesh().dim()];
            for m in 1..=nt {
                let mut s = vec![0.0; disc.mesh().dim()];
                let mut row = Vec::with_capacity(nt - m + 1);
                for phi in &phis[m - 1..] {
                    disc.apply_sk(&s, &mut tmp);
                    for ((si, ti), pi) in s.iter_mut().zip(&tmp).zip(phi) {
                        *si = ti + pi;
                    }
                    row.push(ops.h_norm_values(&s));
                }
                all.push(row);
            }
            Ok(all)
        })
        .collect::<Result<_>>()?;
    let mut c_zero = 0.0f64;
    let mut column = vec![0.0; n_paths];
    for m in 1..=nt {
        for n in m..=nt {
            for (c, z) in column.iter_mut().zip(&zero_sums) {
                *c = z[m - 1][n - m];
            }
            let est = lp_estimate(&column, p).value;
            c_zero = c_zero.max(est / (grid.time(n) - grid.time(m - 1)).sqrt());
        }
    }

    // Y = scheme output, Z in {0, run from a perturbed initial value}
    let pairs: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = paths
        .par_iter()
        .map(|path| {
            let y = run_with(disc, path)?;
            let z = perturbed_run(disc, path)?;
            let phi_y = phi_sequence(disc, path, &y.states)?;
            let phi_z = phi_sequence(disc, path, &z.states)?;
            let phi_0 = phi_sequence(disc, path, &zeros)?;
            let mut sums = Vec::new();
            let mut diffs = Vec::new();
            for (phi_other, other) in [(&phi_0, &zeros), (&phi_z, &z.states)] {
                let mut s = vec![0.0; disc.mesh().dim()];
                let mut tmp = vec![0.0; s.len()];
                let mut row = Vec::with_capacity(nt);
                for j in 0..nt {
                    disc.apply_sk(&s, &mut tmp);
                    for i in 0..s.len() {
                        s[i] = tmp[i] + phi_y[j][i] - phi_other[j][i];
                    }
                    row.push(ops.h_norm_values(&s));
                }
                sums.push(row);
                diffs.push(
                    y.states
                        .iter()
                        .zip(other)
                        .map(|(a, b)| {
                            let d: Vec<f64> = a.iter().zip(b).map(|(u, v)| u - v).collect();
                            ops.h_norm_values(&d)
                        })
                        .collect(),
                );
            }
            Ok((sums, diffs))
        })
        .collect::<Result<_>>()?;
    let mut c_lip = 0.0f64;
    for pair in 0..2 {
        let mut diff_lp = Vec::with_capacity(nt + 1);
        for n in 0..=nt {
            for (c, r) in column.iter_mut().zip(&pairs) {
                *c = r.1[pair][n];
            }
            diff_lp.push(lp_estimate(&column, p).value);
        }
        for n in 1..=nt {
            for (c, r) in column.iter_mut().zip(&pairs) {
                *c = r.0[pair][n - 1];
            }
            let lhs = lp_estimate(&column, p).value;
            let rhs: f64 = (1..=n)
                .map(|j| (grid.time(n) - grid.time(j - 1)).powf(-0.5) * diff_lp[j - 1].powi(2))
                .sum::<f64>()
                * grid.step();
            if rhs > 0.0 {
                c_lip = c_lip.max(lhs / rhs.sqrt());
            }
        }
    }
    Ok(StabilityReport {
        c_phi_zero: c_zero,
        c_phi_lipschitz: c_lip,
        c_phi: c_zero.max(c_lip),
        n_paths,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BistabilityReport {
    /// `||Y - Z||_{0,p} / ||R[Y] - R[Z]||_{-1,p}` for every tested pair.
    pub ratios: Vec<f64>,
    /// `max` over pairs of the ratio and its inverse.
    pub c_stab: f64,
}

/// Adds an adapted perturbation `eps * N(0, I)` at every node after the first.
fn jittered(y: &GridProcess, disc: &Discretization, seed: u64, eps: f64) -> GridProcess {
    let mut z = y.clone();
    let mut noise = vec![0.0; disc.mesh().dim()];
    for (n, s) in z.states.iter_mut().enumerate().skip(1) {
        let mut rng = step_rng(seed, Channel::Perturbation, y.grid.n_steps(), y.path_index, n);
        fill_normals(&mut rng, &mut noise);
        for (v, d) in s.iter_mut().zip(&noise) {
            *v += eps * d;
        }
    }
    z
}

/// Measures `C_Stab` on the pairs `(X, 0)`, `(X, X')` with `X'` started from
/// a perturbed initial value, and `(X, X + adapted jitter)`.
pub fn estimate_bistability(disc: &Discretization, n_paths: usize, seed: u64, p: f64) -> Result<BistabilityReport> {
    let paths = sample_paths(disc, n_paths, seed)?;
    let runs: Vec<(GridProcess, GridProcess, GridProcess)> = paths
        .par_iter()
        .map(|path| {
            let y = run_with(disc, path)?;
            let z = perturbed_run(disc, path)?;
            let zero = GridProcess {
                states: vec![vec![0.0; disc.mesh().dim()]; y.states.len()],
                ..y.clone()
            };
            Ok((y, z, zero))
        })
        .collect::<Result<_>>()?;
    let ys: Vec<GridProcess> = runs.iter().map(|r| r.0.clone()).collect();
    let candidates: Vec<Vec<GridProcess>> = vec![
        runs.iter().map(|r| r.2.clone()).collect(),
        runs.iter().map(|r| r.1.clone()).collect(),
        ys.iter().map(|y| jittered(y, disc, seed, 0.05)).collect(),
    ];
    let ry: Vec<ResidualField> = ys.iter().zip(&paths).map(|(y, w)| residual(y, disc, w)).collect::<Result<_>>()?;
    let mut ratios = Vec::new();
    for zs in &candidates {
        let rz: Vec<ResidualField> = zs.iter().zip(&paths).map(|(z, w)| residual(z, disc, w)).collect::<Result<_>>()?;
        let num = sup_norm_of_difference(&ys, zs, disc, p)?.value;
        let den = spijker_norm_of_difference(&ry, &rz, disc, p)?.value;
        ratios.push(num / den);
    }
    let c_stab = ratios.iter().fold(1.0f64, |m, r| m.max(*r).max(1.0 / r));
    Ok(BistabilityReport { ratios, c_stab })
}

/// `||xi_h||` of the scheme's initial value.
pub fn initial_norm(disc: &Discretization) -> f64 {
    let x: &GridFunctionH = disc.initial();
    disc.ops().h_norm(x)
}
