//! Quick property checks runnable from the command line.
//!
//! Every check draws its inputs from a fixed seed and finishes in well under
//! a second on one core.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{gronwall_check, gronwall_extremal, lemma_constant, partial_sum_norms, residual, ResidualField};
use crate::fem::{DenseOperators, FemOperators, GridFunctionH, Mesh1D};
use crate::harness::{CoupledSetup, ExperimentPlan, StudyKind};
use crate::noise::WienerPath;
use crate::problem::{ProblemConfig, ProblemSpec, ScalarFn};
use crate::scheme::{run_with, Discretization, SchemeConfig, TimeGrid, Variant};
use crate::spectral::SpectralVector;
use crate::Result;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = Result<(bool, String)>;

fn random_spectral(rng: &mut ChaCha8Rng, n: usize, decay: f64) -> SpectralVector {
    let c = (1..=n)
        .map(|j| rng.random_range(-1.0..1.0) * (j as f64).powf(-decay))
        .collect();
    SpectralVector::from_coefficients(c).expect("finite")
}

fn projector() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ops = FemOperators::assemble(Mesh1D::new(32)?)?;
    let mut idem = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for _ in 0..20 {
        let u = GridFunctionH::from_values(ops.mesh(), (0..31).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let pu = ops.project_function(|s| u.evaluate(s));
        idem = pu.values().iter().zip(u.values()).map(|(a, b)| (a - b).abs()).fold(idem, f64::max);
        let x = random_spectral(&mut rng, 200, 1.0);
        let px = ops.project_spectral(&x);
        worst_ratio = worst_ratio.max(ops.h_norm(&px) / x.norm());
    }
    Ok((
        idem <= 1e-12 && worst_ratio <= 1.0 + 1e-12,
        format!("idempotence defect {idem:.2e}, max ||P_h x|| / ||x|| = {worst_ratio:.6}"),
    ))
}

fn negative_norm() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::NEG_INFINITY;
    for cells in [8, 32, 64] {
        let ops = FemOperators::assemble(Mesh1D::new(cells)?)?;
        let dense = DenseOperators::new(&ops)?;
        let basis = crate::spectral::EigenBasis::dirichlet_laplacian(512)?;
        for _ in 0..20 {
            let x = random_spectral(&mut rng, 512, 0.5);
            let px = ops.project_spectral(&x);
            let lhs = dense.discrete_norm(px.values(), -1.0);
            worst = worst.max(lhs - basis.fractional_norm(&x, -1.0));
        }
    }
    Ok((worst <= 1e-8, format!("max ||A_h^(-1/2) P_h x|| - ||x||_(-1) = {worst:.2e}")))
}

fn smoothing() -> Outcome {
    let ops = FemOperators::assemble(Mesh1D::new(64)?)?;
    let dense = DenseOperators::new(&ops)?;
    let mut worst = 0.0f64;
    for k in [1e-3, 1.0 / 64.0, 0.25] {
        for rho in [0.5, 1.0] {
            for j in 1..=64 {
                let t = j as f64 * k;
                // the operator norm is attained on an eigenvector
                let c = dense
                    .eigenvalues()
                    .iter()
                    .map(|l| l.powf(rho) * (1.0 + k * l).powi(-j) * t.powf(rho))
                    .fold(0.0, f64::max);
                worst = worst.max(c);
            }
        }
    }
    Ok((worst <= 2.0, format!("measured smoothing constant {worst:.4}")))
}

fn gronwall() -> Outcome {
    let grid = TimeGrid::new(1.0 / 32.0, 32)?;
    let flat = gronwall_check(&vec![1.0; 33], 1.0, 0.0, 0.5, &grid)?;
    let mut bad = gronwall_extremal(1.0, 2.0, 0.5, &grid)?;
    bad[3] *= 1.5;
    let broken = gronwall_check(&bad, 1.0, 2.0, 0.5, &grid)?;
    let ext = gronwall_extremal(1.0, 2.0, 0.5, &grid)?;
    let eq = gronwall_check(&ext, 1.0, 2.0, 0.5, &grid)?;
    let bound = lemma_constant(2.0, 0.5, 1.0);
    let ok = flat.holds
        && flat.implied_constant <= 1.0
        && !broken.holds
        && broken.first_violation == Some(3)
        && eq.holds
        && eq.implied_constant <= bound;
    Ok((
        ok,
        format!("extremal sequence constant {:.4} <= lemma bound {bound:.4}", eq.implied_constant),
    ))
}

fn spijker_oracle() -> Outcome {
    let problem = ProblemSpec::bump_problem(8)?;
    let grid = TimeGrid::new(0.25, 4)?;
    let cfg = SchemeConfig::new(Variant::Milstein, grid, Mesh1D::new(8)?);
    let disc = Discretization::new(&problem, &cfg)?;
    let dense = DenseOperators::new(disc.ops())?;
    let s = dense.euler_matrix(0.25)?;
    let mass = dense.mass();
    let mut worst = 0.0f64;
    for m in 0..2 {
        let w = WienerPath::sample(&problem.noise, grid, 5, m)?;
        let mut z = run_with(&disc, &w)?;
        for (n, st) in z.states.iter_mut().enumerate() {
            for (i, v) in st.iter_mut().enumerate() {
                *v += 0.01 * ((n * 7 + i * 3) as f64).sin();
            }
        }
        let v: ResidualField = residual(&z, &disc, &w)?;
        let fast = partial_sum_norms(&v, &disc);
        for n in 1..=4 {
            let mut sum = DVector::zeros(7);
            for j in 1..=n {
                let mut pw = DMatrix::identity(7, 7);
                for _ in 0..n - j {
                    pw = &s * pw;
                }
                sum += pw * DVector::from_column_slice(&v.values[j]);
            }
            let brute = (sum.transpose() * mass * &sum)[(0, 0)].sqrt();
            worst = worst.max((brute - fast[n]).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max deviation from dense partial sums {worst:.2e}")))
}

fn nemytskii() -> Outcome {
    let mut worst = 0.0f64;
    for f in [ScalarFn::Rational, ScalarFn::Bump] {
        for i in 0..200 {
            let u = -5.0 + 0.05 * i as f64;
            let d = f.derivative(u);
            for eps in [1e-3, 1e-4] {
                let fd = (f.eval(u + eps) - f.eval(u)) / eps;
                // first-order difference error is at most eps * sup |f''| / 2
                let bound = eps * f.derivative_lipschitz_bound().unwrap_or(10.0);
                worst = worst.max((fd - d).abs() / bound);
            }
        }
    }
    Ok((worst <= 1.0, format!("worst difference quotient error / bound {worst:.3}")))
}

fn reproducible_across_workers() -> Outcome {
    let mut plan = ExperimentPlan::preset(StudyKind::TwoSided);
    plan.problem = ProblemConfig {
        noise_modes: 16,
        ..ProblemConfig::default()
    };
    plan.ladder = vec![0.25, 0.125, 0.0625];
    plan.cells = 16;
    plan.reference_time_factor = 2;
    let setup = CoupledSetup::from_plan(&plan)?;
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::Error::Inconsistent(e.to_string()))?
            .install(|| setup.run(12, 99, 2.0))
    };
    let a = run(1)?;
    let b = run(3)?;
    Ok((a == b, format!("1 vs 3 workers identical: {}", a == b)))
}

/// Runs every check; a check that errors counts as failed.
pub fn run_all() -> Vec<Check> {
    let checks: [(&'static str, fn() -> Outcome); 7] = [
        ("projector idempotence and contraction", projector),
        ("discrete negative norm estimate", negative_norm),
        ("discrete smoothing bound", smoothing),
        ("discrete Gronwall checker", gronwall),
        ("Spijker partial sums vs dense oracle", spijker_oracle),
        ("Nemytskii difference quotients", nemytskii),
        ("RNG reproducibility across workers", reproducible_across_workers),
    ];
    checks
        .iter()
        .map(|(name, f)| match f() {
            Ok((passed, detail)) => Check { name, passed, detail },
            Err(e) => Check {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}
