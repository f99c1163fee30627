use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fem::{GridFunctionH, Mesh1D};
use crate::noise::WienerPath;
use crate::problem::ProblemSpec;
use crate::scheme::engine::non_finite;
use crate::scheme::{Discretization, SchemeConfig, StepNoise, TimeGrid};

/// One path of finite element states at every node of a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridProcess {
    pub grid: TimeGrid,
    pub mesh: Mesh1D,
    /// `states[n]` holds the nodal values at `t_n`.
    pub states: Vec<Vec<f64>>,
    pub seed: u64,
    pub path_index: u64,
}

impl GridProcess {
    pub fn state(&self, n: usize) -> GridFunctionH {
        GridFunctionH::from_values(self.mesh, self.states[n].clone()).expect("stored on its own mesh")
    }

    /// Restriction to the nodes of a coarser time grid.
    pub fn restrict_to(&self, coarse: &TimeGrid) -> Result<Self> {
        let r = coarse
            .refinement_factor(&self.grid)
            .ok_or_else(|| crate::Error::InvalidArgument("time grids are not nested".into()))?;
        Ok(Self {
            grid: *coarse,
            mesh: self.mesh,
            states: self.states.iter().step_by(r).cloned().collect(),
            seed: self.seed,
            path_index: self.path_index,
        })
    }

    pub fn byte_size(&self) -> u64 {
        (self.states.len() * self.mesh.dim() * 8) as u64
    }
}

/// Runs the scheme along one noise path.
pub fn run(problem: &ProblemSpec, config: &SchemeConfig, path: &WienerPath) -> Result<GridProcess> {
    let disc = Discretization::new(problem, config)?;
    run_with(&disc, path)
}

pub fn run_with(disc: &Discretization, path: &WienerPath) -> Result<GridProcess> {
    let grid = disc.grid();
    if path.grid() != grid {
        return invalid("noise path and scheme use different time grids");
    }
    if path.n_modes() != disc.problem().noise.n_modes() {
        return invalid(format!(
            "noise path has {} modes, the problem {}",
            path.n_modes(),
            disc.problem().noise.n_modes()
        ));
    }
    let mut ws = disc.workspace();
    let mut states = Vec::with_capacity(grid.n_steps() + 1);
    states.push(disc.initial().values().to_vec());
    let mut next = vec![0.0; disc.mesh().dim()];
    for n in 1..=grid.n_steps() {
        let (euler, milstein) = disc.step_noise_from_increments(path.step_increments(n), &mut ws);
        let noise = StepNoise {
            euler: &euler,
            milstein: milstein.as_deref(),
        };
        disc.advance(&states[n - 1], noise, &mut next, &mut ws)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(non_finite(n, &grid));
        }
        states.push(next.clone());
    }
    Ok(GridProcess {
        grid,
        mesh: disc.mesh(),
        states,
        seed: path.seed(),
        path_index: path.path_index(),
    })
}
