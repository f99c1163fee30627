//! Moments of `||X(t)||_s` and the temporal Holder exponent of the
//! reference in `L_{2p}(Omega; H^s)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::lp_estimate;
use crate::error::{invalid, Result};
use crate::fem::Mesh1D;
use crate::harness::{fit_rate, make_reference, ExperimentPlan, RatePoint, StudyKind};
use crate::problem::ProblemSpec;
use crate::scheme::{Discretization, SchemeConfig, TimeGrid, Variant};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessEntry {
    pub s: f64,
    /// `sup_n E ||X(t_n)||_s^{2p}`.
    pub moment: f64,
    /// Fitted exponent of `sup_n ||X(t_n + tau) - X(t_n)||_{L_{2p}(H^s)}`
    /// against `tau`.
    pub holder: f64,
    pub r_squared: f64,
    /// `(tau, increment norm)` per lag.
    pub increments: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub entries: Vec<SmoothnessEntry>,
    pub n_paths: usize,
}

/// Smoothness orders probed for a problem of regularity `r`.
pub fn probe_orders(r: f64) -> [f64; 3] {
    [0.0, r, 1.0 + r]
}

pub fn check_regularity(plan: &ExperimentPlan) -> Result<RegularityReport> {
    if plan.study != StudyKind::Regularity {
        return invalid("not a regularity plan");
    }
    plan.validate()?;
    let problem = ProblemSpec::from_config(&plan.problem)?;
    let grid = TimeGrid::from_horizon(problem.horizon, plan.step / plan.reference_time_factor as f64)?;
    let mesh = Mesh1D::new(plan.cells * plan.reference_space_factor)?;
    let config = SchemeConfig::new(Variant::Milstein, grid, mesh);
    let lags: Vec<usize> = (0..=plan.lags).map(|m| 1usize << m).filter(|&l| l <= grid.n_steps()).collect();
    if lags.len() < 3 {
        return invalid("time grid too short for a Holder fit over three lags");
    }
    let (refs, _) = make_reference(&problem, &config, plan.n_paths, plan.seed, plan.memory_budget)?;
    let disc = Discretization::new(&problem, &config)?;
    let ops = disc.ops();
    let basis = problem.basis();
    let orders = probe_orders(problem.regularity);
    let weights: Vec<Vec<f64>> = orders
        .iter()
        .map(|&s| basis.eigenvalues().iter().map(|l| l.powf(s)).collect())
        .collect();
    let norm = |w: &[f64], c: &[f64]| c.iter().zip(w).map(|(c, w)| w * c * c).sum::<f64>().sqrt();

    // per path: [order][0 = state norms, 1.. = lag increments][node]
    let per_path: Vec<Vec<Vec<Vec<f64>>>> = refs
        .par_iter()
        .map(|z| {
            let lifted: Vec<Vec<f64>> = z
                .states
                .iter()
                .map(|u| ops.lift_values(u, problem.basis_modes).into_coefficients())
                .collect();
            weights
                .iter()
                .map(|w| {
                    let mut rows = vec![lifted.iter().map(|c| norm(w, c)).collect::<Vec<f64>>()];
                    for &l in &lags {
                        let mut d = vec![0.0; problem.basis_modes];
                        rows.push(
                            (0..lifted.len() - l)
                                .map(|n| {
                                    for (i, v) in d.iter_mut().enumerate() {
                                        *v = lifted[n + l][i] - lifted[n][i];
                                    }
                                    norm(w, &d)
                                })
                                .collect(),
                        );
                    }
                    rows
                })
                .collect()
        })
        .collect();

    let q = 2.0 * plan.p;
    let sup_over_nodes = |o: usize, row: usize| -> f64 {
        let nodes = per_path[0][o][row].len();
        (0..nodes)
            .map(|n| {
                let col: Vec<f64> = per_path.iter().map(|pp| pp[o][row][n]).collect();
                lp_estimate(&col, q).value
            })
            .fold(0.0, f64::max)
    };
    let mut entries = Vec::new();
    for (o, &s) in orders.iter().enumerate() {
        let moment = sup_over_nodes(o, 0).powf(q);
        let increments: Vec<(f64, f64)> = lags
            .iter()
            .enumerate()
            .map(|(i, &l)| (l as f64 * grid.step(), sup_over_nodes(o, i + 1)))
            .collect();
        let points: Vec<RatePoint> = increments
            .iter()
            .rev()
            .map(|&(tau, e)| RatePoint {
                param: tau,
                error: e.max(f64::MIN_POSITIVE),
                stderr: 0.0,
            })
            .collect();
        let fit = fit_rate(&points, false)?;
        entries.push(SmoothnessEntry {
            s,
            moment,
            holder: fit.slope,
            r_squared: fit.r_squared,
            increments,
        });
    }
    Ok(RegularityReport {
        entries,
        n_paths: plan.n_paths,
    })
}
