//! Coupled simulation of a reference and a ladder of coarser schemes driven
//! by the same Brownian increments.
//!
//! Every path is streamed: the reference advances one fine step at a time
//! and each rung advances whenever its accumulated increments cover one of
//! its own steps. Nothing but the current states is kept.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{max_over_nodes, spijker_from_partial_sums, two_sided_ratio, NormReport};
use crate::error::{invalid, Error, Result};
use crate::fem::{prolong_values, FemOperators, Mesh1D};
use crate::harness::{ExperimentPlan, StudyKind};
use crate::noise::fill_step_increments;
use crate::problem::ProblemSpec;
use crate::scheme::{non_finite, Discretization, SchemeConfig, StepNoise, TimeGrid, Variant, Workspace};

pub struct Rung {
    pub param: f64,
    pub disc: Discretization,
    time_factor: usize,
}

pub struct CoupledSetup {
    pub problem: ProblemSpec,
    pub reference: Discretization,
    pub rungs: Vec<Rung>,
    /// Residual of the reference against each rung's recursion; needs
    /// every rung on the reference mesh.
    pub residuals: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RungResult {
    pub param: f64,
    pub variant: Variant,
    pub step: f64,
    pub cells: usize,
    pub error: NormReport,
    pub residual: Option<NormReport>,
}

impl RungResult {
    pub fn ratio(&self) -> Option<f64> {
        self.residual.as_ref().map(|r| two_sided_ratio(&self.error, r))
    }
}

fn grid_for(problem: &ProblemSpec, k: f64) -> Result<TimeGrid> {
    TimeGrid::from_horizon(problem.horizon, k)
}

impl CoupledSetup {
    pub fn new(problem: ProblemSpec, reference: SchemeConfig, rungs: Vec<(f64, SchemeConfig)>, residuals: bool) -> Result<Self> {
        let reference = Discretization::new(&problem, &reference).map_err(|e| e.context("reference"))?;
        let ref_grid = reference.grid();
        let ref_mesh = reference.mesh();
        let mut built = Vec::with_capacity(rungs.len());
        for (param, cfg) in rungs {
            let ctx = format!("rung {param}");
            let time_factor = cfg
                .grid
                .refinement_factor(&ref_grid)
                .ok_or_else(|| Error::InvalidArgument(format!("{ctx}: reference time grid does not refine it")))?;
            if cfg.mesh.refinement_factor(&ref_mesh).is_none() {
                return invalid(format!("{ctx}: reference mesh does not refine it"));
            }
            if residuals && cfg.mesh != ref_mesh {
                return invalid(format!("{ctx}: residuals need the rung on the reference mesh"));
            }
            let disc = Discretization::new(&problem, &cfg).map_err(|e| e.context(ctx))?;
            built.push(Rung { param, disc, time_factor });
        }
        Ok(Self {
            problem,
            reference,
            rungs: built,
            residuals,
        })
    }

    /// Reference and rungs for the convergence studies of `plan`.
    pub fn from_plan(plan: &ExperimentPlan) -> Result<Self> {
        plan.validate()?;
        let problem = ProblemSpec::from_config(&plan.problem)?;
        let cfg = |variant: Variant, k: f64, cells: usize| -> Result<SchemeConfig> {
            let mut c = SchemeConfig::new(variant, grid_for(&problem, k)?, Mesh1D::new(cells)?);
            if plan.nodal_noise {
                c.noise_cells = Some(cells);
            }
            Ok(c)
        };
        let ref_cells = |finest: usize| finest * plan.reference_space_factor;
        let (reference, rungs) = match plan.study {
            StudyKind::Temporal | StudyKind::TwoSided => {
                let k_min = plan.ladder.iter().copied().fold(f64::INFINITY, f64::min);
                let reference = cfg(Variant::Milstein, k_min / plan.reference_time_factor as f64, ref_cells(plan.cells))?;
                let rungs = plan
                    .ladder
                    .iter()
                    .map(|&k| Ok((k, cfg(plan.variant, k, plan.cells)?)))
                    .collect::<Result<Vec<_>>>()?;
                (reference, rungs)
            }
            StudyKind::Spatial => {
                let cells: Vec<usize> = plan.ladder.iter().map(|h| (1.0 / h).round() as usize).collect();
                let finest = cells.iter().copied().max().unwrap_or(plan.cells);
                let reference = cfg(Variant::Milstein, plan.step / plan.reference_time_factor as f64, ref_cells(finest))?;
                let rungs = plan
                    .ladder
                    .iter()
                    .zip(&cells)
                    .map(|(&h, &n)| Ok((h, cfg(plan.variant, plan.step, n)?)))
                    .collect::<Result<Vec<_>>>()?;
                (reference, rungs)
            }
            StudyKind::Truncation => {
                let reference = cfg(Variant::Milstein, plan.step / plan.reference_time_factor as f64, ref_cells(plan.cells))?;
                let rungs = plan
                    .ladder
                    .iter()
                    .map(|&j| Ok((j, cfg(Variant::Truncated { modes: j as usize }, plan.step, plan.cells)?)))
                    .collect::<Result<Vec<_>>>()?;
                (reference, rungs)
            }
            StudyKind::Regularity => return invalid("regularity studies have no ladder"),
        };
        Self::new(problem, reference, rungs, plan.study == StudyKind::TwoSided)
    }

    /// Per-rung strong errors (and residual norms) over `n_paths` paths.
    pub fn run(&self, n_paths: usize, seed: u64, p: f64) -> Result<Vec<RungResult>> {
        if n_paths == 0 {
            return invalid("no paths");
        }
        let outcomes: Vec<PathOutcome> = (0..n_paths as u64)
            .into_par_iter()
            .map(|m| self.simulate_path(seed, m).map_err(|e| e.context(format!("path {m}"))))
            .collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(self.rungs.len());
        for (r, rung) in self.rungs.iter().enumerate() {
            let ctx = |e: Error| e.context(format!("rung {}", rung.param));
            let errors: Vec<Vec<f64>> = outcomes.iter().map(|o| o.errors[r].clone()).collect();
            let error = max_over_nodes(&errors, p).map_err(ctx)?;
            let residual = if self.residuals {
                let sums: Vec<Vec<f64>> = outcomes.iter().map(|o| o.residuals[r].clone()).collect();
                Some(spijker_from_partial_sums(&sums, p).map_err(ctx)?)
            } else {
                None
            };
            let cfg = rung.disc.config();
            out.push(RungResult {
                param: rung.param,
                variant: cfg.variant,
                step: cfg.grid.step(),
                cells: cfg.mesh.n_cells(),
                error,
                residual,
            });
        }
        Ok(out)
    }

    fn simulate_path(&self, seed: u64, path: u64) -> Result<PathOutcome> {
        let reference = &self.reference;
        let ref_grid = reference.grid();
        let ref_mesh = reference.mesh();
        let ref_ops = reference.ops();
        let n_modes = self.problem.noise.n_modes();
        let mut ref_ws = reference.workspace();
        let mut x_ref = reference.initial().values().to_vec();
        let mut next = vec![0.0; x_ref.len()];
        let mut dbeta = vec![0.0; n_modes];
        let mut states: Vec<RungState> = self.rungs.iter().map(|r| RungState::new(r, &x_ref, ref_mesh)).collect::<Result<_>>()?;
        for (rung, st) in self.rungs.iter().zip(&mut states) {
            st.record_error(rung, &x_ref, ref_mesh, ref_ops)?;
        }

        for step in 1..=ref_grid.n_steps() {
            fill_step_increments(seed, path, &ref_grid, step, &mut dbeta);
            let (euler, milstein) = reference.step_noise_from_increments(&dbeta, &mut ref_ws);
            let noise = StepNoise {
                euler: &euler,
                milstein: milstein.as_deref(),
            };
            reference.advance(&x_ref, noise, &mut next, &mut ref_ws)?;
            if !next.iter().all(|v| v.is_finite()) {
                return Err(non_finite(step, &ref_grid).context("reference"));
            }
            std::mem::swap(&mut x_ref, &mut next);
            for (rung, st) in self.rungs.iter().zip(&mut states) {
                for (a, b) in st.acc.iter_mut().zip(&dbeta) {
                    *a += b;
                }
                if step % rung.time_factor == 0 {
                    st.advance(rung, step / rung.time_factor, &x_ref, self.residuals)
                        .map_err(|e| e.context(format!("rung {}", rung.param)))?;
                    st.record_error(rung, &x_ref, ref_mesh, ref_ops)?;
                }
            }
        }
        Ok(PathOutcome {
            errors: states.iter_mut().map(|s| std::mem::take(&mut s.errors)).collect(),
            residuals: states.iter_mut().map(|s| std::mem::take(&mut s.residuals)).collect(),
        })
    }
}

struct PathOutcome {
    errors: Vec<Vec<f64>>,
    residuals: Vec<Vec<f64>>,
}

struct RungState {
    x: Vec<f64>,
    next: Vec<f64>,
    acc: Vec<f64>,
    ws: Workspace,
    /// Reference state at the rung's previous time node.
    ref_prev: Vec<f64>,
    partial: Vec<f64>,
    tmp: Vec<f64>,
    fine: Vec<f64>,
    errors: Vec<f64>,
    residuals: Vec<f64>,
}

impl RungState {
    fn new(rung: &Rung, x_ref: &[f64], ref_mesh: Mesh1D) -> Result<Self> {
        let d = &rung.disc;
        let x = d.initial().values().to_vec();
        let dim = x.len();
        let mut residuals = Vec::new();
        if d.mesh() == ref_mesh {
            // V(t_0) = X_ref(t_0) - xi_h
            let v0: Vec<f64> = x_ref.iter().zip(&x).map(|(a, b)| a - b).collect();
            residuals.push(d.ops().h_norm_values(&v0));
        }
        Ok(Self {
            next: vec![0.0; dim],
            acc: vec![0.0; d.problem().noise.n_modes()],
            ws: d.workspace(),
            ref_prev: if d.mesh() == ref_mesh { x_ref.to_vec() } else { Vec::new() },
            partial: vec![0.0; dim],
            tmp: vec![0.0; dim],
            fine: vec![0.0; ref_mesh.dim()],
            errors: Vec::with_capacity(d.grid().n_steps() + 1),
            residuals,
            x,
        })
    }

    fn advance(&mut self, rung: &Rung, n: usize, x_ref: &[f64], residuals: bool) -> Result<()> {
        let d = &rung.disc;
        let (euler, milstein) = d.step_noise_from_increments(&self.acc, &mut self.ws);
        self.acc.iter_mut().for_each(|a| *a = 0.0);
        let noise = StepNoise {
            euler: &euler,
            milstein: milstein.as_deref(),
        };
        d.advance(&self.x, noise, &mut self.next, &mut self.ws)?;
        if !self.next.iter().all(|v| v.is_finite()) {
            return Err(non_finite(n, &d.grid()));
        }
        std::mem::swap(&mut self.x, &mut self.next);
        if residuals {
            // V(t_n) = X_ref(t_n) - S X_ref(t_{n-1}) - Phi(X_ref(t_{n-1}))
            d.advance(&self.ref_prev, noise, &mut self.next, &mut self.ws)?;
            d.apply_sk(&self.partial, &mut self.tmp);
            for i in 0..self.partial.len() {
                self.partial[i] = self.tmp[i] + x_ref[i] - self.next[i];
            }
            self.residuals.push(d.ops().h_norm_values(&self.partial));
            self.ref_prev.copy_from_slice(x_ref);
        }
        Ok(())
    }

    fn record_error(&mut self, rung: &Rung, x_ref: &[f64], ref_mesh: Mesh1D, ref_ops: &FemOperators) -> Result<()> {
        prolong_values(rung.disc.mesh(), &self.x, ref_mesh, &mut self.fine)?;
        for (f, r) in self.fine.iter_mut().zip(x_ref) {
            *f -= r;
        }
        self.errors.push(ref_ops.h_norm_values(&self.fine));
        Ok(())
    }
}
