//! Convergence experiments: coupled reference and ladder runs, rate fits
//! and their artifacts.

mod driver;
mod fit;
pub mod output;
mod plan;
mod reference;
mod regularity;
mod solve;

pub use driver::{CoupledSetup, Rung, RungResult};
pub use fit::{fit_rate, RatePoint, RateReport, MIN_R_SQUARED};
pub use plan::{ExperimentPlan, PlanOverrides, StudyKind};
pub use reference::{make_reference, reference_bytes, strong_error};
pub use solve::{solve, SolveSummary};
pub use regularity::{check_regularity, probe_orders, RegularityReport, SmoothnessEntry};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub study: StudyKind,
    pub rungs: Vec<RungResult>,
    pub rate: RateReport,
}

impl ExperimentOutcome {
    /// `max / min` of the error-to-residual ratios, when residuals exist.
    pub fn ratio_spread(&self) -> Option<f64> {
        let ratios: Option<Vec<f64>> = self.rungs.iter().map(RungResult::ratio).collect();
        let ratios = ratios?;
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        Some(max / min)
    }

    pub fn rows(&self, n_paths: usize, seed: u64) -> Vec<output::Row> {
        output::rows(self.study, &self.rungs, n_paths, seed)
    }
}

/// Runs the coupled study of `plan`, fits the rate and, if the plan names
/// an output directory, writes the CSV and JSON artifacts there.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutcome> {
    if plan.study == StudyKind::Regularity {
        return invalid("use check_regularity for regularity plans");
    }
    let setup = CoupledSetup::from_plan(plan)?;
    let rungs = setup.run(plan.n_paths, plan.seed, plan.p)?;
    let points: Vec<RatePoint> = rungs
        .iter()
        .map(|r| RatePoint {
            param: r.param,
            error: r.error.value,
            stderr: r.error.stderr,
        })
        .collect();
    let rate = fit_rate(&points, plan.weighted).map_err(|e| e.context(format!("{} rate fit", plan.study.label())))?;
    let outcome = ExperimentOutcome {
        study: plan.study,
        rungs,
        rate,
    };
    if let Some(dir) = &plan.out_dir {
        output::write_artifacts(dir, plan.study, &outcome.rows(plan.n_paths, plan.seed), &outcome.rate)?;
    }
    Ok(outcome)
}
