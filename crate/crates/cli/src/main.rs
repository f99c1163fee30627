use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use milstein_galerkin::harness::{self, ExperimentOutcome, ExperimentPlan, StudyKind};
use milstein_galerkin::noise::write_path_dump;
use milstein_galerkin::{Error, ProblemSpec, TimeGrid, Variant, WienerPath};

#[derive(Parser, Debug)]
#[command(name = "mgfem", version, about = "Milstein-Galerkin solver and convergence studies")]
struct Cli {
    /// TOML file with optional [problem] and [experiment] tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of Monte Carlo paths.
    #[arg(long, global = true)]
    paths: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV/JSON artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Moment of the L_p(Omega; H) norms.
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true, value_enum)]
    variant: Option<VariantArg>,
    /// Truncation level for `--variant truncated`.
    #[arg(long = "J", global = true)]
    j: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Milstein,
    Em,
    Truncated,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConvergenceKind {
    Temporal,
    Spatial,
    Truncation,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single run; writes a per-time-node norm summary.
    Solve {
        /// Also write the noise increments of path 0 as a binary dump.
        #[arg(long)]
        dump_path: bool,
    },
    /// Coupled convergence study and rate fit.
    Convergence {
        #[arg(value_enum)]
        kind: ConvergenceKind,
    },
    /// Two-sided study: strong errors against residual norms.
    Residual,
    /// Moments and temporal Holder exponents of the reference.
    Regularity,
    /// Built-in property checks.
    Selftest,
}

fn load_plan(cli: &Cli, study: StudyKind) -> Result<ExperimentPlan> {
    let mut plan = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentPlan::from_toml_for(&text, Some(study))?
        }
        None => ExperimentPlan::preset(study),
    };
    if let Some(m) = cli.paths {
        plan.n_paths = m;
    }
    if let Some(s) = cli.seed {
        plan.seed = s;
    }
    if let Some(p) = cli.p {
        plan.p = p;
    }
    if let Some(dir) = &cli.out {
        plan.out_dir = Some(dir.clone());
    }
    plan.variant = match (cli.variant, cli.j) {
        (Some(VariantArg::Truncated), Some(j)) => Variant::Truncated { modes: j },
        (Some(VariantArg::Truncated), None) => return Err(Error::Config("--variant truncated needs --J".into()).into()),
        (Some(VariantArg::Milstein), _) => Variant::Milstein,
        (Some(VariantArg::Em), _) => Variant::EulerMaruyama,
        (None, Some(j)) => Variant::Truncated { modes: j },
        (None, None) => plan.variant,
    };
    plan.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(plan)
}

fn print_outcome(outcome: &ExperimentOutcome) {
    println!("{:>12} {:>12} {:>10} {:>12} {:>8}", "param", "error", "stderr", "residual", "ratio");
    for r in &outcome.rungs {
        let res = r.residual.as_ref().map_or(String::from("-"), |v| format!("{:.4e}", v.value));
        let ratio = r.ratio().map_or(String::from("-"), |v| format!("{v:.3}"));
        println!(
            "{:>12.6e} {:>12.4e} {:>10.2e} {:>12} {:>8}",
            r.param, r.error.value, r.error.stderr, res, ratio
        );
    }
    let rate = &outcome.rate;
    println!("slope {:.4}  intercept {:.4}  R^2 {:.4}", rate.slope, rate.intercept, rate.r_squared);
    if !rate.dropped.is_empty() {
        println!("dropped pre-asymptotic rung(s): {:?}", rate.dropped);
    }
    if let Some(spread) = outcome.ratio_spread() {
        println!("ratio max/min {spread:.3}");
    }
}

fn solve(cli: &Cli, dump_path: bool) -> Result<()> {
    let mut plan = load_plan(cli, StudyKind::Temporal)?;
    if cli.paths.is_none() {
        plan.n_paths = 1;
    }
    let summary = harness::solve(&plan)?;
    let last = summary.norms.last().expect("at least one node");
    println!(
        "{} path(s), {} steps: ||X(T)||_L{} = {:.6} (se {:.2e})",
        summary.n_paths,
        summary.times.len() - 1,
        plan.p,
        last.value,
        last.stderr
    );
    if let Some(dir) = &plan.out_dir {
        fs::create_dir_all(dir)?;
        let mut f = fs::File::create(dir.join("solve.csv"))?;
        writeln!(f, "t,norm,stderr")?;
        for (t, n) in summary.times.iter().zip(&summary.norms) {
            writeln!(f, "{t},{},{}", n.value, n.stderr)?;
        }
        if dump_path {
            write_dump(&plan, &dir.join("path-0.bin"))?;
        }
    } else if dump_path {
        bail!("--dump-path needs --out");
    }
    Ok(())
}

fn write_dump(plan: &ExperimentPlan, file: &Path) -> Result<()> {
    let problem = ProblemSpec::from_config(&plan.problem)?;
    let grid = TimeGrid::from_horizon(problem.horizon, plan.step)?;
    let path = WienerPath::sample(&problem.noise, grid, plan.seed, 0)?;
    let w = std::io::BufWriter::new(fs::File::create(file)?);
    write_path_dump(&path, w)?;
    Ok(())
}

fn convergence(cli: &Cli, study: StudyKind) -> Result<()> {
    let plan = load_plan(cli, study)?;
    let outcome = harness::run_experiment(&plan)?;
    print_outcome(&outcome);
    Ok(())
}

fn regularity(cli: &Cli) -> Result<()> {
    let plan = load_plan(cli, StudyKind::Regularity)?;
    let report = harness::check_regularity(&plan)?;
    println!("{:>6} {:>14} {:>10} {:>8}", "s", "sup E||X||^2p", "holder", "R^2");
    for e in &report.entries {
        println!("{:>6.3} {:>14.6e} {:>10.4} {:>8.4}", e.s, e.moment, e.holder, e.r_squared);
    }
    Ok(())
}

fn selftest() -> Result<bool> {
    let checks = milstein_galerkin::selftest::run_all();
    let mut ok = true;
    for c in &checks {
        println!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    Ok(ok)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>().map(Error::root) {
        Some(Error::InvalidArgument(_) | Error::Config(_)) => 2,
        Some(Error::NonFinite { .. }) => 3,
        Some(Error::Resource { .. }) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { dump_path } => solve(&cli, *dump_path).map(|_| true),
        Command::Convergence { kind } => {
            let study = match kind {
                ConvergenceKind::Temporal => StudyKind::Temporal,
                ConvergenceKind::Spatial => StudyKind::Spatial,
                ConvergenceKind::Truncation => StudyKind::Truncation,
            };
            convergence(&cli, study).map(|_| true)
        }
        Command::Residual => convergence(&cli, StudyKind::TwoSided).map(|_| true),
        Command::Regularity => regularity(&cli).map(|_| true),
        Command::Selftest => selftest(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
