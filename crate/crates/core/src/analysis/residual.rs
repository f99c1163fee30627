//! Residual `R[Z]` of a grid process in the scheme and its inverse, the
//! discrete variation-of-constants formula.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fem::Mesh1D;
use crate::noise::WienerPath;
use crate::scheme::{Discretization, GridProcess, StepNoise, TimeGrid};

/// `R[Z](t_0) = Z(t_0) - xi_h`,
/// `R[Z](t_n) = Z(t_n) - S_k Z(t_{n-1}) - Phi(Z(t_{n-1}), t_{n-1}, k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualField {
    pub grid: TimeGrid,
    pub mesh: Mesh1D,
    pub values: Vec<Vec<f64>>,
}

fn check(disc: &Discretization, grid: TimeGrid, mesh: Mesh1D, path: &WienerPath) -> Result<()> {
    if grid != disc.grid() || path.grid() != disc.grid() {
        return invalid("process, path and scheme must share the time grid");
    }
    if mesh != disc.mesh() {
        return invalid("process and scheme must share the mesh");
    }
    Ok(())
}

pub fn residual(z: &GridProcess, disc: &Discretization, path: &WienerPath) -> Result<ResidualField> {
    check(disc, z.grid, z.mesh, path)?;
    let mut ws = disc.workspace();
    let mut values = Vec::with_capacity(z.states.len());
    values.push(
        z.states[0]
            .iter()
            .zip(disc.initial().values())
            .map(|(a, b)| a - b)
            .collect(),
    );
    let mut next = vec![0.0; disc.mesh().dim()];
    for n in 1..=z.grid.n_steps() {
        let (euler, milstein) = disc.step_noise_from_increments(path.step_increments(n), &mut ws);
        let noise = StepNoise {
            euler: &euler,
            milstein: milstein.as_deref(),
        };
        disc.advance(&z.states[n - 1], noise, &mut next, &mut ws)?;
        values.push(z.states[n].iter().zip(&next).map(|(a, b)| a - b).collect());
    }
    Ok(ResidualField {
        grid: z.grid,
        mesh: z.mesh,
        values,
    })
}

/// Rebuilds `Z` from `R[Z]`:
/// `Z(t_n) = S_k^n Z(t_0) + sum_{j<=n} S_k^{n-j} (Phi(Z(t_{j-1})) + R[Z](t_j))`.
pub fn reconstruct(v: &ResidualField, disc: &Discretization, path: &WienerPath) -> Result<GridProcess> {
    check(disc, v.grid, v.mesh, path)?;
    let mut ws = disc.workspace();
    let mut states = Vec::with_capacity(v.values.len());
    states.push(
        v.values[0]
            .iter()
            .zip(disc.initial().values())
            .map(|(a, b)| a + b)
            .collect::<Vec<f64>>(),
    );
    let mut next = vec![0.0; disc.mesh().dim()];
    for n in 1..=v.grid.n_steps() {
        let (euler, milstein) = disc.step_noise_from_increments(path.step_increments(n), &mut ws);
        let noise = StepNoise {
            euler: &euler,
            milstein: milstein.as_deref(),
        };
        disc.advance(&states[n - 1], noise, &mut next, &mut ws)?;
        states.push(next.iter().zip(&v.values[n]).map(|(a, b)| a + b).collect());
    }
    Ok(GridProcess {
        grid: v.grid,
        mesh: v.mesh,
        states,
        seed: path.seed(),
        path_index: path.path_index(),
    })
}

/// Per-node `||V(t_0)||` followed by `||sum_{j<=n} S_k^{n-j} V(t_j)||`.
pub fn partial_sum_norms(v: &ResidualField, disc: &Discretization) -> Vec<f64> {
    let ops = disc.ops();
    let mut out = Vec::with_capacity(v.values.len());
    out.push(ops.h_norm_values(&v.values[0]));
    let mut s = vec![0.0; disc.mesh().dim()];
    let mut tmp = vec![0.0; s.len()];
    for n in 1..v.values.len() {
        disc.apply_sk(&s, &mut tmp);
        for ((si, ti), vi) in s.iter_mut().zip(&tmp).zip(&v.values[n]) {
            *si = ti + vi;
        }
        out.push(ops.h_norm_values(&s));
    }
    out
}

/// `||V||_{-1,p}` over a set of paths.
pub fn spijker_norm(fields: &[ResidualField], disc: &Discretization, p: f64) -> Result<super::NormReport> {
    let per_path: Vec<Vec<f64>> = fields.iter().map(|v| partial_sum_norms(v, disc)).collect();
    super::spijker_from_partial_sums(&per_path, p)
}

/// `||Z||_{0,p} = max_n ||Z(t_n)||_{L_p}` over a set of paths.
pub fn sup_norm(processes: &[GridProcess], disc: &Discretization, p: f64) -> Result<super::NormReport> {
    let ops = disc.ops();
    let per_path: Vec<Vec<f64>> = processes
        .iter()
        .map(|z| z.states.iter().map(|s| ops.h_norm_values(s)).collect())
        .collect();
    super::max_over_nodes(&per_path, p)
}

/// Sup norm of the pathwise difference `Y - Z`.
pub fn sup_norm_of_difference(
    y: &[GridProcess],
    z: &[GridProcess],
    disc: &Discretization,
    p: f64,
) -> Result<super::NormReport> {
    if y.len() != z.len() {
        return invalid("path sets differ in size");
    }
    let ops = disc.ops();
    let per_path: Vec<Vec<f64>> = y
        .iter()
        .zip(z)
        .map(|(a, b)| {
            a.states
                .iter()
                .zip(&b.states)
                .map(|(u, v)| {
                    let d: Vec<f64> = u.iter().zip(v).map(|(x, y)| x - y).collect();
                    ops.h_norm_values(&d)
                })
                .collect()
        })
        .collect();
    super::max_over_nodes(&per_path, p)
}

/// Spijker norm of `R[Y] - R[Z]`.
pub fn spijker_norm_of_difference(
    ry: &[ResidualField],
    rz: &[ResidualField],
    disc: &Discretization,
    p: f64,
) -> Result<super::NormReport> {
    if ry.len() != rz.len() {
        return invalid("residual sets differ in size");
    }
    let diffs: Vec<ResidualField> = ry
        .iter()
        .zip(rz)
        .map(|(a, b)| ResidualField {
            grid: a.grid,
            mesh: a.mesh,
            values: a
                .values
                .iter()
                .zip(&b.values)
                .map(|(u, v)| u.iter().zip(v).map(|(x, y)| x - y).collect())
                .collect(),
        })
        .collect();
    spijker_norm(&diffs, disc, p)
}
