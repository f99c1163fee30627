use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{lp_estimate, LpEstimate};
use crate::error::Result;
use crate::fem::Mesh1D;
use crate::harness::ExperimentPlan;
use crate::noise::WienerPath;
use crate::problem::ProblemSpec;
use crate::scheme::{run_with, Discretization, SchemeConfig, TimeGrid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub times: Vec<f64>,
    /// `||X(t_n)||_{L_p(Omega; H)}` per time node.
    pub norms: Vec<LpEstimate>,
    /// Path-averaged nodal values at the final time.
    pub final_mean: Vec<f64>,
    pub n_paths: usize,
}

/// Runs the scheme of `plan` (its `variant`, `step` and `cells`) on
/// `plan.n_paths` paths. Only norms are kept per path.
pub fn solve(plan: &ExperimentPlan) -> Result<SolveSummary> {
    let problem = ProblemSpec::from_config(&plan.problem)?;
    let grid = TimeGrid::from_horizon(problem.horizon, plan.step)?;
    let config = SchemeConfig::new(plan.variant, grid, Mesh1D::new(plan.cells)?);
    config.validate()?;
    let disc = Discretization::new(&problem, &config)?;
    let per_path: Vec<(Vec<f64>, Vec<f64>)> = (0..plan.n_paths as u64)
        .into_par_iter()
        .map(|m| {
            let w = WienerPath::sample(&problem.noise, grid, plan.seed, m)?;
            let z = run_with(&disc, &w).map_err(|e| e.context(format!("path {m}")))?;
            let norms = z.states.iter().map(|s| disc.ops().h_norm_values(s)).collect();
            Ok((norms, z.states.last().cloned().unwrap_or_default()))
        })
        .collect::<Result<_>>()?;
    let nodes = grid.n_steps() + 1;
    let norms = (0..nodes)
        .map(|n| {
            let col: Vec<f64> = per_path.iter().map(|(v, _)| v[n]).collect();
            lp_estimate(&col, plan.p)
        })
        .collect();
    let mut final_mean = vec![0.0; disc.mesh().dim()];
    for (_, last) in &per_path {
        for (a, b) in final_mean.iter_mut().zip(last) {
            *a += b / plan.n_paths as f64;
        }
    }
    Ok(SolveSummary {
        times: (0..nodes).map(|n| grid.time(n)).collect(),
        norms,
        final_mean,
        n_paths: plan.n_paths,
    })
}
