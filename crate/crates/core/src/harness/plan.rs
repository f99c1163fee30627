use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::problem::ProblemConfig;
use crate::scheme::Variant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// Ladder of time steps on a fixed mesh.
    Temporal,
    /// Ladder of mesh widths at a fixed time step.
    Spatial,
    /// Ladder of truncation levels `J` at fixed `(k, h)`.
    Truncation,
    /// Temporal ladder with residual norms and error/residual ratios.
    TwoSided,
    Regularity,
}

impl StudyKind {
    pub fn label(self) -> &'static str {
        match self {
            StudyKind::Temporal => "temporal",
            StudyKind::Spatial => "spatial",
            StudyKind::Truncation => "truncation",
            StudyKind::TwoSided => "two_sided",
            StudyKind::Regularity => "regularity",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub problem: ProblemConfig,
    pub study: StudyKind,
    /// Time steps, mesh widths or truncation levels, coarsest first.
    pub ladder: Vec<f64>,
    /// Time step wherever the ladder is not in `k`.
    pub step: f64,
    /// Cells of the mesh wherever the ladder is not in `h`.
    pub cells: usize,
    /// Reference time step is the finest rung step divided by this.
    pub reference_time_factor: usize,
    /// Reference mesh has this many times the cells of the finest rung.
    pub reference_space_factor: usize,
    pub variant: Variant,
    /// Form noise products at the nodes of each scheme's own mesh instead
    /// of on a mesh fine enough to resolve every noise mode.
    pub nodal_noise: bool,
    pub n_paths: usize,
    pub p: f64,
    pub seed: u64,
    pub weighted: bool,
    /// Upper bound on stored trajectories in bytes.
    pub memory_budget: u64,
    /// Regularity study: Holder fit over lags `k, 2k, ..., 2^lags k`.
    pub lags: usize,
    pub out_dir: Option<PathBuf>,
}

fn dyadic(k: f64) -> Vec<f64> {
    (4..=8).map(|e| k.powi(e)).collect()
}

impl ExperimentPlan {
    /// Ladders and sample sizes used by the convergence checks in the
    /// test suite.
    pub fn preset(study: StudyKind) -> Self {
        let base = Self {
            problem: ProblemConfig::default(),
            study,
            ladder: dyadic(0.5),
            step: 1.0 / 1024.0,
            cells: 256,
            reference_time_factor: 16,
            reference_space_factor: 1,
            variant: Variant::Milstein,
            nodal_noise: false,
            n_paths: 2000,
            p: 2.0,
            seed: 20_240_601,
            weighted: false,
            memory_budget: 2 << 30,
            lags: 5,
            out_dir: None,
        };
        match study {
            StudyKind::Temporal | StudyKind::TwoSided => base,
            StudyKind::Spatial => Self {
                ladder: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0],
                reference_time_factor: 1,
                reference_space_factor: 4,
                n_paths: 1000,
                ..base
            },
            StudyKind::Truncation => Self {
                ladder: vec![2.0, 4.0, 8.0, 16.0],
                step: 1.0 / 256.0,
                reference_time_factor: 1,
                n_paths: 500,
                ..base
            },
            StudyKind::Regularity => Self {
                ladder: Vec::new(),
                step: 1.0 / 256.0,
                cells: 128,
                reference_time_factor: 1,
                n_paths: 200,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return invalid("n_paths must be positive");
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return invalid(format!("moment p = {} must be at least 1", self.p));
        }
        if self.reference_time_factor == 0 || self.reference_space_factor == 0 {
            return invalid("reference refinement factors must be positive");
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return invalid(format!("step {} must be positive", self.step));
        }
        if self.cells < 2 {
            return invalid("mesh needs at least 2 cells");
        }
        if self.study == StudyKind::Regularity {
            return Ok(());
        }
        if self.ladder.len() < 3 {
            return invalid("ladder needs at least 3 rungs for a rate fit");
        }
        if self.ladder.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return invalid("ladder values must be positive");
        }
        let increasing = self.study == StudyKind::Truncation;
        for w in self.ladder.windows(2) {
            let ratio = if increasing { w[1] / w[0] } else { w[0] / w[1] };
            let m = ratio.round();
            if m < 2.0 || (ratio - m).abs() > 1e-9 * m || (m as u64).count_ones() != 1 {
                return invalid(format!(
                    "ladder must be dyadic and ordered coarsest first, got {} then {}",
                    w[0], w[1]
                ));
            }
        }
        match self.study {
            StudyKind::Spatial => {
                for h in &self.ladder {
                    if ((1.0 / h) - (1.0 / h).round()).abs() > 1e-9 {
                        return invalid(format!("mesh width {h} is not 1/n"));
                    }
                }
            }
            StudyKind::Truncation if self.ladder.iter().any(|j| j.fract() != 0.0) => {
                return invalid("truncation levels must be integers");
            }
            _ => {}
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Reads a TOML document with optional `[problem]` and `[experiment]`
    /// tables; `experiment.study` selects the preset the other keys
    /// override.
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_for(text, None)
    }

    /// As [`Self::from_toml`], with `study` taking precedence over the
    /// file's own choice.
    pub fn from_toml_for(text: &str, study: Option<StudyKind>) -> Result<Self> {
        let mut file: PlanFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if study.is_some() {
            file.experiment.study = study;
        }
        let plan = file.experiment.apply(file.problem);
        plan.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(plan)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    #[serde(default)]
    problem: ProblemConfig,
    #[serde(default)]
    experiment: PlanOverrides,
}

/// Every field of [`ExperimentPlan`] except the problem, all optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanOverrides {
    pub study: Option<StudyKind>,
    pub ladder: Option<Vec<f64>>,
    pub step: Option<f64>,
    pub cells: Option<usize>,
    pub reference_time_factor: Option<usize>,
    pub reference_space_factor: Option<usize>,
    pub variant: Option<Variant>,
    pub nodal_noise: Option<bool>,
    pub n_paths: Option<usize>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub weighted: Option<bool>,
    pub memory_budget: Option<u64>,
    pub lags: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl PlanOverrides {
    pub fn apply(self, problem: ProblemConfig) -> ExperimentPlan {
        let base = ExperimentPlan::preset(self.study.unwrap_or(StudyKind::Temporal));
        ExperimentPlan {
            problem,
            study: base.study,
            ladder: self.ladder.unwrap_or(base.ladder),
            step: self.step.unwrap_or(base.step),
            cells: self.cells.unwrap_or(base.cells),
            reference_time_factor: self.reference_time_factor.unwrap_or(base.reference_time_factor),
            reference_space_factor: self.reference_space_factor.unwrap_or(base.reference_space_factor),
            variant: self.variant.unwrap_or(base.variant),
            nodal_noise: self.nodal_noise.unwrap_or(base.nodal_noise),
            n_paths: self.n_paths.unwrap_or(base.n_paths),
            p: self.p.unwrap_or(base.p),
            seed: self.seed.unwrap_or(base.seed),
            weighted: self.weighted.unwrap_or(base.weighted),
            memory_budget: self.memory_budget.unwrap_or(base.memory_budget),
            lags: self.lags.unwrap_or(base.lags),
            out_dir: self.out_dir.or(base.out_dir),
        }
    }
}
