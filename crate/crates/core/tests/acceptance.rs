//! Acceptance run: one line per criterion, exit status 1 if any fails.
//!
//! Informational lines (prefixed `info`) report supplementary runs that are
//! not part of the verdict.

use std::process::ExitCode;
use std::time::Instant;

use milstein_galerkin::analysis::{burkholder_constant, reconstruct, residual, telescoping_deviation, ResidualField};
use milstein_galerkin::fem::error_operator_time_l2;
use milstein_galerkin::harness::{fit_rate, run_experiment, ExperimentOutcome, ExperimentPlan, RatePoint, StudyKind};
use milstein_galerkin::problem::ScalarFn;
use milstein_galerkin::selftest;
use milstein_galerkin::{
    run, EigenBasis, FemOperators, IteratedIntegrals, Mesh1D, ProblemSpec, SchemeConfig, SpectralVector, TimeGrid,
    Variant, WienerPath,
};

struct Verdict {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn report(v: &Verdict) {
    println!("criterion {}: {} {}", v.id, if v.passed { "PASS" } else { "FAIL" }, v.detail);
}

fn slope_summary(o: &ExperimentOutcome) -> String {
    let errors: Vec<String> = o.rungs.iter().map(|r| format!("{:.4e}", r.error.value)).collect();
    format!(
        "slope {:.3}, R^2 {:.4}, dropped {:?}, errors [{}]",
        o.rate.slope,
        o.rate.r_squared,
        o.rate.dropped,
        errors.join(", ")
    )
}

fn in_range(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

/// Criteria 1 and 4 share the temporal ladder with residuals.
fn temporal_and_two_sided() -> (Verdict, Verdict, f64) {
    let plan = ExperimentPlan::preset(StudyKind::TwoSided);
    let start = Instant::now();
    let o = run_experiment(&plan).expect("two-sided study");
    let secs = start.elapsed().as_secs_f64();
    let ok1 = in_range(o.rate.slope, 0.60, 0.90) && o.rate.r_squared >= 0.98 && secs <= 600.0;
    let v1 = Verdict {
        id: "1 (temporal order, slope in [0.60, 0.90], R^2 >= 0.98, <= 600 s)",
        passed: ok1,
        detail: format!("{}, {} paths, {secs:.0} s", slope_summary(&o), plan.n_paths),
    };
    let ratios: Vec<f64> = o.rungs.iter().filter_map(|r| r.ratio()).collect();
    let spread = o.ratio_spread().unwrap_or(f64::INFINITY);
    let ok4 = ratios.len() == o.rungs.len() && ratios.iter().all(|&r| in_range(r, 0.1, 10.0)) && spread <= 5.0;
    let v4 = Verdict {
        id: "4 (two-sided ratios in [0.1, 10], max/min <= 5)",
        passed: ok4,
        detail: format!(
            "ratios [{}], max/min {spread:.4}",
            ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ")
        ),
    };
    (v1, v4, o.rate.slope)
}

fn spatial() -> Verdict {
    let plan = ExperimentPlan::preset(StudyKind::Spatial);
    let o = run_experiment(&plan).expect("spatial study");
    Verdict {
        id: "2 (spatial order, slope in [1.2, 1.8])",
        passed: in_range(o.rate.slope, 1.2, 1.8),
        detail: format!("{}, {} paths", slope_summary(&o), plan.n_paths),
    }
}

fn milstein_beats_euler(milstein_slope: f64) -> Verdict {
    let mut plan = ExperimentPlan::preset(StudyKind::Temporal);
    plan.variant = Variant::EulerMaruyama;
    let o = run_experiment(&plan).expect("Euler-Maruyama study");
    let gap = milstein_slope - o.rate.slope;
    Verdict {
        id: "3 (Euler-Maruyama slope in [0.40, 0.60], Milstein - EM >= 0.15)",
        passed: in_range(o.rate.slope, 0.40, 0.60) && gap >= 0.15,
        detail: format!("EM {}, Milstein - EM {gap:.3}", slope_summary(&o)),
    }
}

fn truncation() -> Verdict {
    let plan = ExperimentPlan::preset(StudyKind::Truncation);
    let o = run_experiment(&plan).expect("truncation study");
    let problem = ProblemSpec::from_config(&plan.problem).unwrap();
    let alpha = problem.noise.alpha().expect("power-law noise");
    let slope_ok = (o.rate.slope + alpha).abs() <= 0.3;

    let n_modes = problem.noise.n_modes();
    let grid = TimeGrid::new(1.0 / 32.0, 32).unwrap();
    let mesh = Mesh1D::new(64).unwrap();
    let w = WienerPath::sample(&problem.noise, grid, 3, 0).unwrap();
    let full = run(&problem, &SchemeConfig::new(Variant::Milstein, grid, mesh), &w).unwrap();
    let identical = [n_modes, n_modes + 7].iter().all(|&j| {
        let t = run(&problem, &SchemeConfig::new(Variant::Truncated { modes: j }, grid, mesh), &w).unwrap();
        t.states == full.states
    });
    Verdict {
        id: "5 (truncation slope within 0.3 of -alpha, J >= n_modes bit-identical)",
        passed: slope_ok && identical,
        detail: format!(
            "{}, -alpha = {:.1}, bit-identical {identical}, {} paths",
            slope_summary(&o),
            -alpha,
            plan.n_paths
        ),
    }
}

fn error_operator_rate() -> Verdict {
    let basis = EigenBasis::dirichlet_laplacian(1024).unwrap();
    let e1 = SpectralVector::unit(1, 1).unwrap();
    let points: Vec<RatePoint> = [4usize, 8, 16, 32]
        .iter()
        .map(|&n| {
            let h = 1.0 / n as f64;
            let ops = FemOperators::assemble(Mesh1D::new(n).unwrap()).unwrap();
            RatePoint {
                param: h,
                error: error_operator_time_l2(&ops, &basis, h * h, 1.0, &e1).unwrap(),
                stderr: 0.0,
            }
        })
        .collect();
    let rate = fit_rate(&points, false).unwrap();
    Verdict {
        id: "6 (error operator slope in [1.7, 2.3])",
        passed: in_range(rate.slope, 1.7, 2.3),
        detail: format!(
            "slope {:.3}, values [{}]",
            rate.slope,
            points.iter().map(|p| format!("{:.4e}", p.error)).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn exactness() -> Verdict {
    let problem = ProblemSpec::bump_problem(32).unwrap();
    let grid = TimeGrid::new(1.0 / 16.0, 16).unwrap();
    let mesh = Mesh1D::new(32).unwrap();
    let mut worst_residual = 0.0f64;
    let mut worst_round_trip = 0.0f64;
    for variant in [Variant::Milstein, Variant::EulerMaruyama, Variant::Truncated { modes: 3 }] {
        let cfg = SchemeConfig::new(variant, grid, mesh);
        let disc = milstein_galerkin::Discretization::new(&problem, &cfg).unwrap();
        for m in 0..4 {
            let w = WienerPath::sample(&problem.noise, grid, 12, m).unwrap();
            let x = run(&problem, &cfg, &w).unwrap();
            let r = residual(&x, &disc, &w).unwrap();
            worst_residual = r.values.iter().flatten().fold(worst_residual, |a, v| a.max(v.abs()));
            let v = ResidualField {
                grid,
                mesh,
                values: (0..=16)
                    .map(|n| (0..31).map(|i| ((n * 31 + i + m as usize) as f64 * 0.37).sin()).collect())
                    .collect(),
            };
            let back = residual(&reconstruct(&v, &disc, &w).unwrap(), &disc, &w).unwrap();
            for (a, b) in back.values.iter().flatten().zip(v.values.iter().flatten()) {
                worst_round_trip = worst_round_trip.max((a - b).abs());
            }
        }
    }

    let ops = FemOperators::assemble(mesh).unwrap();
    let basis = EigenBasis::dirichlet_laplacian(256).unwrap();
    let telescoping = telescoping_deviation(&ops, &basis, 1.0 / 16.0, 8, 48).unwrap();

    let w = WienerPath::sample(&problem.noise, grid, 5, 1).unwrap();
    let it = IteratedIntegrals::from_path(&w, 8, 32).unwrap();
    let mut iterated_ok = true;
    for n in 1..=16 {
        let dw = w.step_increments(n);
        for i in 1..=8 {
            iterated_ok &= it.get(n, i, i).unwrap() == 0.5 * (dw[i - 1] * dw[i - 1] - grid.step());
            for j in 1..=8 {
                let p = dw[i - 1] * dw[j - 1];
                let s = it.get(n, i, j).unwrap() + it.get(n, j, i).unwrap();
                // one rounding in the stored entry and one in the sum
                iterated_ok &= i == j || (s - p).abs() <= 2.0 * f64::EPSILON * (p.abs() + it.get(n, i, j).unwrap().abs());
            }
        }
    }

    let whole = w.coarsen(16).unwrap();
    let coarsen_ok = (1..=w.n_modes()).all(|j| whole.increment(1, j) == w.endpoint(j));
    let c2 = burkholder_constant(2.0).unwrap();

    let passed =
        worst_residual <= 1e-12 && worst_round_trip <= 1e-10 && telescoping <= 1e-10 && iterated_ok && coarsen_ok && c2 == 1.0;
    Verdict {
        id: "7 (exactness suite)",
        passed,
        detail: format!(
            "residual {worst_residual:.2e}, round trip {worst_round_trip:.2e}, telescoping {telescoping:.2e}, \
             iterated {iterated_ok}, coarsen {coarsen_ok}, C(2) = {c2}"
        ),
    }
}

fn selftest_suite() -> Verdict {
    let start = Instant::now();
    let checks = selftest::run_all();
    let secs = start.elapsed().as_secs_f64();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    Verdict {
        id: "8 (selftest passes in <= 120 s)",
        passed: failed.is_empty() && secs <= 120.0,
        detail: format!("{} checks, failed {failed:?}, {secs:.3} s", checks.len()),
    }
}

/// Supplementary runs on variations of the default problem.
fn informational() {
    let variants: [(&str, StudyKind, Variant, fn(&mut ExperimentPlan)); 4] = [
        ("temporal, X0 = 0", StudyKind::Temporal, Variant::Milstein, |p| p.problem.initial = vec![0.0]),
        ("spatial, X0 = 0", StudyKind::Spatial, Variant::Milstein, |p| p.problem.initial = vec![0.0]),
        ("temporal Milstein, g = 1 + 0.8 sin(3u), X0 = 0", StudyKind::Temporal, Variant::Milstein, sine),
        ("temporal Euler-Maruyama, g = 1 + 0.8 sin(3u), X0 = 0", StudyKind::Temporal, Variant::EulerMaruyama, sine),
    ];
    fn sine(p: &mut ExperimentPlan) {
        p.problem.initial = vec![0.0];
        p.problem.diffusion = ScalarFn::Sine {
            offset: 1.0,
            amplitude: 0.8,
            frequency: 3.0,
        };
    }
    for (label, study, variant, edit) in variants {
        let mut plan = ExperimentPlan::preset(study);
        plan.variant = variant;
        plan.n_paths = 200;
        edit(&mut plan);
        match run_experiment(&plan) {
            Ok(o) => println!("info {label}: {}, {} paths", slope_summary(&o), plan.n_paths),
            Err(e) => println!("info {label}: error {e}"),
        }
    }
}

fn main() -> ExitCode {
    let mut verdicts = Vec::new();
    let (v1, v4, milstein_slope) = temporal_and_two_sided();
    report(&v1);
    verdicts.push(v1);
    let v2 = spatial();
    report(&v2);
    verdicts.push(v2);
    let v3 = milstein_beats_euler(milstein_slope);
    report(&v3);
    verdicts.push(v3);
    report(&v4);
    verdicts.push(v4);
    for f in [truncation, error_operator_rate, exactness, selftest_suite] {
        let v = f();
        report(&v);
        verdicts.push(v);
    }
    informational();
    let failed: Vec<&str> = verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect();
    println!("acceptance: {} of {} criteria pass", verdicts.len() - failed.len(), verdicts.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
