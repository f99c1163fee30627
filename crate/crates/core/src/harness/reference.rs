use rayon::prelude::*;

use crate::analysis::{max_over_nodes, NormReport};
use crate::error::{invalid, Error, Result};
use crate::fem::{prolong_values, FemOperators};
use crate::noise::WienerPath;
use crate::problem::ProblemSpec;
use crate::scheme::{run_with, Discretization, GridProcess, SchemeConfig, Variant};

/// Bytes needed to keep `n_paths` trajectories and their noise paths.
pub fn reference_bytes(problem: &ProblemSpec, config: &SchemeConfig, n_paths: usize) -> u64 {
    let steps = config.grid.n_steps() as u64;
    let per_path = (steps + 1) * config.mesh.dim() as u64 + steps * problem.noise.n_modes() as u64;
    8 * per_path * n_paths as u64
}

/// Stored Milstein runs with the full mode count, one per path, together
/// with the noise paths that drive them.
pub fn make_reference(
    problem: &ProblemSpec,
    config: &SchemeConfig,
    n_paths: usize,
    seed: u64,
    memory_budget: u64,
) -> Result<(Vec<GridProcess>, Vec<WienerPath>)> {
    if config.variant != Variant::Milstein {
        return invalid("the reference uses the Milstein scheme");
    }
    let required = reference_bytes(problem, config, n_paths);
    if required > memory_budget {
        return Err(Error::Resource {
            required,
            budget: memory_budget,
        });
    }
    let disc = Discretization::new(problem, config)?;
    let out: Vec<(GridProcess, WienerPath)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|m| {
            let w = WienerPath::sample(&problem.noise, config.grid, seed, m)?;
            let z = run_with(&disc, &w).map_err(|e| e.context(format!("reference path {m}")))?;
            Ok((z, w))
        })
        .collect::<Result<_>>()?;
    Ok(out.into_iter().unzip())
}

/// `max_n ||X_coarse(t_n) - X_ref(t_n)||_{L_p}` over the coarse time nodes,
/// with coarse states prolonged into the reference finite element space.
pub fn strong_error(coarse: &[GridProcess], reference: &[GridProcess], p: f64) -> Result<NormReport> {
    if coarse.len() != reference.len() || coarse.is_empty() {
        return invalid("need one reference per coarse path");
    }
    let (c0, r0) = (&coarse[0], &reference[0]);
    let time = c0
        .grid
        .refinement_factor(&r0.grid)
        .ok_or_else(|| Error::InvalidArgument("reference time grid does not refine the coarse grid".into()))?;
    if c0.mesh.refinement_factor(&r0.mesh).is_none() {
        return invalid("reference mesh does not refine the coarse mesh");
    }
    if coarse.iter().zip(reference).any(|(c, r)| c.grid != c0.grid || c.mesh != c0.mesh || r.grid != r0.grid || r.mesh != r0.mesh) {
        return invalid("paths mix different grids");
    }
    let ops = FemOperators::assemble(r0.mesh)?;
    let per_path: Vec<Vec<f64>> = coarse
        .iter()
        .zip(reference)
        .map(|(c, r)| {
            let mut fine = vec![0.0; r0.mesh.dim()];
            c.states
                .iter()
                .enumerate()
                .map(|(n, u)| {
                    prolong_values(c0.mesh, u, r0.mesh, &mut fine)?;
                    for (f, v) in fine.iter_mut().zip(&r.states[n * time]) {
                        *f -= v;
                    }
                    Ok(ops.h_norm_values(&fine))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    max_over_nodes(&per_path, p)
}
