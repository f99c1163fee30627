use milstein_galerkin::analysis::{reconstruct, residual};
use milstein_galerkin::harness::{CoupledSetup, ExperimentPlan, StudyKind};
use milstein_galerkin::noise::IteratedIntegrals;
use milstein_galerkin::problem::{NemytskiiDiffusion, ProblemConfig};
use milstein_galerkin::scheme::{run_with, StepNoise};
use milstein_galerkin::{
    run, Discretization, GridFunctionH, Mesh1D, ProblemSpec, ScalarFn, SchemeConfig, TimeGrid, Variant, WienerPath,
};

fn small_problem(modes: usize) -> ProblemSpec {
    ProblemSpec::bump_problem(modes).unwrap()
}

fn config(variant: Variant, k: f64, n_steps: usize, cells: usize) -> SchemeConfig {
    SchemeConfig::new(variant, TimeGrid::new(k, n_steps).unwrap(), Mesh1D::new(cells).unwrap())
}

#[test]
fn residual_of_scheme_output_vanishes() {
    let problem = small_problem(64);
    for (variant, cells) in [(Variant::Milstein, 32), (Variant::EulerMaruyama, 16), (Variant::Truncated { modes: 4 }, 32)] {
        let cfg = config(variant, 1.0 / 64.0, 64, cells);
        let disc = Discretization::new(&problem, &cfg).unwrap();
        let w = WienerPath::sample(&problem.noise, cfg.grid, 3, 0).unwrap();
        let z = run_with(&disc, &w).unwrap();
        let v = residual(&z, &disc, &w).unwrap();
        let worst = v.values.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(worst <= 1e-12, "{variant:?}: residual {worst:e}");
    }
}

#[test]
fn variation_of_constants_round_trip() {
    let problem = small_problem(32);
    let cfg = config(Variant::Milstein, 1.0 / 32.0, 32, 16);
    let disc = Discretization::new(&problem, &cfg).unwrap();
    let w = WienerPath::sample(&problem.noise, cfg.grid, 8, 2).unwrap();
    let mut z = run_with(&disc, &w).unwrap();
    for (n, s) in z.states.iter_mut().enumerate() {
        for (i, v) in s.iter_mut().enumerate() {
            *v += 0.1 * ((3 * n + 5 * i) as f64).cos();
        }
    }
    let v = residual(&z, &disc, &w).unwrap();
    let back = reconstruct(&v, &disc, &w).unwrap();
    for (a, b) in back.states.iter().flatten().zip(z.states.iter().flatten()) {
        assert!((a - b).abs() <= 1e-10);
    }
}

#[test]
fn euler_maruyama_equals_milstein_for_additive_noise() {
    let mut problem = small_problem(32);
    problem.diffusion = NemytskiiDiffusion::new(ScalarFn::Constant { value: 0.7 }).unwrap();
    let w = WienerPath::sample(&problem.noise, TimeGrid::new(1.0 / 16.0, 16).unwrap(), 1, 0).unwrap();
    let a = run(&problem, &config(Variant::Milstein, 1.0 / 16.0, 16, 16), &w).unwrap();
    let b = run(&problem, &config(Variant::EulerMaruyama, 1.0 / 16.0, 16, 16), &w).unwrap();
    assert_eq!(a.states, b.states);
}

#[test]
fn truncation_beyond_mode_count_is_plain_milstein() {
    let problem = small_problem(16);
    let w = WienerPath::sample(&problem.noise, TimeGrid::new(1.0 / 32.0, 32).unwrap(), 4, 1).unwrap();
    let full = run(&problem, &config(Variant::Milstein, 1.0 / 32.0, 32, 32), &w).unwrap();
    for j in [16, 17, 100] {
        let t = run(&problem, &config(Variant::Truncated { modes: j }, 1.0 / 32.0, 32, 32), &w).unwrap();
        assert_eq!(full.states, t.states, "J = {j}");
    }
    let t4 = run(&problem, &config(Variant::Truncated { modes: 4 }, 1.0 / 32.0, 32, 32), &w).unwrap();
    assert_ne!(full.states, t4.states);
}

#[test]
fn reduced_milstein_term_matches_iterated_double_sum() {
    let problem = small_problem(12);
    for cells in [16, 6] {
        let cfg = config(Variant::Milstein, 0.02, 5, cells);
        let disc = Discretization::new(&problem, &cfg).unwrap();
        let w = WienerPath::sample(&problem.noise, cfg.grid, 21, 0).unwrap();
        let it = IteratedIntegrals::from_path(&w, 12, 50).unwrap();
        let x = GridFunctionH::from_values(cfg.mesh, (1..cells).map(|i| (i as f64 * 0.7).sin()).collect()).unwrap();
        let mut ws = disc.workspace();
        for n in 1..=5 {
            let (e, m) = disc.step_noise_from_increments(w.step_increments(n), &mut ws);
            let reduced = disc
                .increment_phi(&x, StepNoise { euler: &e, milstein: m.as_deref() })
                .unwrap();
            let full = disc.increment_phi_iterated(&x, w.step_increments(n), &it, n).unwrap();
            for (a, b) in reduced.values().iter().zip(full.values()) {
                assert!((a - b).abs() <= 1e-12, "cells {cells}, step {n}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn iterated_sum_needs_enough_modes_and_a_milstein_variant() {
    let problem = small_problem(12);
    let cfg = config(Variant::Milstein, 0.02, 5, 16);
    let disc = Discretization::new(&problem, &cfg).unwrap();
    let w = WienerPath::sample(&problem.noise, cfg.grid, 21, 0).unwrap();
    let it = IteratedIntegrals::from_path(&w, 6, 10).unwrap();
    let x = GridFunctionH::zeros(cfg.mesh);
    assert!(disc.increment_phi_iterated(&x, w.step_increments(1), &it, 1).is_err());
    let em = Discretization::new(&problem, &config(Variant::EulerMaruyama, 0.02, 5, 16)).unwrap();
    let it = IteratedIntegrals::from_path(&w, 12, 10).unwrap();
    assert!(em.increment_phi_iterated(&x, w.step_increments(1), &it, 1).is_err());
}

#[test]
fn scheme_is_adapted() {
    let problem = small_problem(16);
    let grid = TimeGrid::new(1.0 / 16.0, 16).unwrap();
    let cfg = config(Variant::Milstein, 1.0 / 16.0, 16, 16);
    let w = WienerPath::sample(&problem.noise, grid, 5, 0).unwrap();
    let base = run(&problem, &cfg, &w).unwrap();
    let cut = 7;
    let mut inc = w.raw_increments().to_vec();
    for v in inc[cut * 16..].iter_mut() {
        *v = -3.0 * *v + 0.1;
    }
    let altered = WienerPath::from_increments(grid, 16, inc, 5, 0).unwrap();
    let other = run(&problem, &cfg, &altered).unwrap();
    assert_eq!(base.states[..=cut], other.states[..=cut]);
    assert_ne!(base.states[cut + 1], other.states[cut + 1]);
}

#[test]
fn path_mode_count_must_match_problem() {
    let problem = small_problem(16);
    let grid = TimeGrid::new(0.125, 8).unwrap();
    let other = small_problem(8);
    let w = WienerPath::sample(&other.noise, grid, 1, 0).unwrap();
    assert!(run(&problem, &config(Variant::Milstein, 0.125, 8, 8), &w).is_err());
}

#[test]
fn coupled_runs_do_not_depend_on_worker_count() {
    let mut plan = ExperimentPlan::preset(StudyKind::TwoSided);
    plan.problem = ProblemConfig {
        noise_modes: 32,
        ..ProblemConfig::default()
    };
    plan.ladder = vec![0.125, 0.0625, 0.03125];
    plan.cells = 16;
    plan.reference_time_factor = 4;
    let setup = CoupledSetup::from_plan(&plan).unwrap();
    let results: Vec<_> = [1, 2, 5]
        .iter()
        .map(|&t| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .unwrap()
                .install(|| setup.run(9, 17, 2.0).unwrap())
        })
        .collect();
    assert_eq!(results[0], results[1]);
    assert_eq!(results[0], results[2]);
}

#[test]
fn coupled_rung_on_reference_grid_has_zero_error() {
    let mut plan = ExperimentPlan::preset(StudyKind::Temporal);
    plan.problem = ProblemConfig {
        noise_modes: 16,
        ..ProblemConfig::default()
    };
    plan.ladder = vec![0.25, 0.125, 0.0625];
    plan.cells = 16;
    plan.reference_time_factor = 1;
    let setup = CoupledSetup::from_plan(&plan).unwrap();
    let r = setup.run(4, 1, 2.0).unwrap();
    assert_eq!(r[2].error.value, 0.0);
    assert!(r[0].error.value > 0.0);
}
