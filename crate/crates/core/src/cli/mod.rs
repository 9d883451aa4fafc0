//! Command-line front end: `verify`, `solve` and `study <kind>`.
//!
//! Exit codes: 0 pass, 2 configuration error, 3 solver non-convergence,
//! 4 failed verdict.

mod config;
mod verify;

pub use config::{
    DiscretizationSection, PlanSection, ProblemSection, RegularizationSection, RunConfig, DEFAULT_CONFIG,
};
pub use verify::run_verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::exec::Execution;
use crate::experiments::{
    run_blowup_contrast, run_convergence_study, run_loglaw_check, run_stability_check, StudyReport, SweepPlan,
};
use crate::model::make_noisy;
use crate::solver::{manufactured_problem, solve_regularized, trajectory_error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_VERDICT: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("malformed config: {0}")]
    Parse(String),

    #[error("invalid {field}: {message}")]
    Field { field: &'static str, message: String },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Diverged(_)) => EXIT_DIVERGED,
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sgreg", version, about = "Regularized Cauchy solver for coupled sine-type elliptic systems")]
struct Cli {
    /// TOML run configuration; the shipped default when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Noise seed, overriding `regularization.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Basis, filter and model self-checks plus the filter-bound sweep.
    Verify,
    /// One regularized solve; writes trajectory.csv and diagnostics.json.
    Solve,
    /// One verification study; writes <kind>.csv and <kind>.json.
    Study {
        #[arg(value_enum)]
        kind: StudyKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyKind {
    Convergence,
    Stability,
    Loglaw,
    Blowup,
}

impl StudyKind {
    fn name(self) -> &'static str {
        match self {
            StudyKind::Convergence => "convergence",
            StudyKind::Stability => "stability",
            StudyKind::Loglaw => "loglaw",
            StudyKind::Blowup => "blowup",
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::shipped(),
    };
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.regularization.seed = seed;
    }
    match cli.command {
        Command::Verify => cmd_verify(&cfg),
        Command::Solve => cmd_solve(&cfg),
        Command::Study { kind } => cmd_study(&cfg, kind),
    }
}

/// Writes `contents` to `dir/name` through a temporary file in `dir`.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let wrap = |source| CliError::Write { path: path.clone(), source };
    std::fs::create_dir_all(dir).map_err(wrap)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(wrap)?;
    tmp.write_all(contents).map_err(wrap)?;
    tmp.as_file().sync_all().map_err(wrap)?;
    tmp.persist(&path).map_err(|e| wrap(e.error))?;
    Ok(path)
}

fn verdict_line(report: &StudyReport) -> String {
    let cells: Vec<String> = report
        .verdicts
        .iter()
        .map(|(k, &v)| format!("{k}={}", if v { "pass" } else { "FAIL" }))
        .collect();
    let overall = if report.all_passed() { "PASS" } else { "FAIL" };
    format!("{}: {} => {overall}", report.kind, cells.join(" "))
}

fn write_report(cfg: &RunConfig, report: &StudyReport) -> Result<(), CliError> {
    write_atomic(&cfg.out, &format!("{}.csv", report.kind), report.to_csv().as_bytes())?;
    let json = serde_json::to_string_pretty(&report.summary_json()).expect("summary serializes");
    write_atomic(&cfg.out, &format!("{}.json", report.kind), json.as_bytes())?;
    Ok(())
}

fn verdict_exit(report: &StudyReport) -> i32 {
    println!("{}", verdict_line(report));
    for note in &report.notes {
        println!("  note: {note}");
    }
    if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_VERDICT
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<i32, CliError> {
    let report = run_verify(&cfg.constants(), &cfg.discretization()?, Execution::default())?;
    let json = serde_json::to_string_pretty(&report.summary_json()).expect("summary serializes");
    write_atomic(&cfg.out, "verify.json", json.as_bytes())?;
    Ok(verdict_exit(&report))
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<i32, CliError> {
    let disc = cfg.discretization()?;
    let reg = cfg.regularization();
    let problem = manufactured_problem(&cfg.problem.recipe, cfg.constants(), &disc)?;
    let seed = cfg.regularization.seed;
    let data = if cfg.regularization.noise {
        make_noisy(&problem.data, reg.epsilon, seed)?.data
    } else {
        problem.data.clone()
    };
    let (traj, diag) = solve_regularized(&problem.spec, &data, &reg, &disc)?;

    let mut csv = String::from("x,mode,u_coeff,v_coeff\n");
    for (j, &x) in traj.x_nodes.iter().enumerate() {
        for (n, (u, v)) in traj.u[j].coeffs().iter().zip(traj.v[j].coeffs()).enumerate() {
            csv.push_str(&format!("{x:?},{},{u:?},{v:?}\n", n + 1));
        }
    }
    write_atomic(&cfg.out, "trajectory.csv", csv.as_bytes())?;

    let errors = trajectory_error(&traj, &problem.truth)?;
    let json = serde_json::json!({
        "converged": diag.converged,
        "iterations": diag.iterations,
        "successive_diffs": diag.successive_diffs,
        "contraction_ratios": diag.contraction_ratios(),
        "residual": diag.residual,
        "epsilon": reg.epsilon,
        "beta": reg.beta(),
        "seed": seed,
        "noise": cfg.regularization.noise,
        "recipe": cfg.problem.recipe,
        "error_at_a": errors.last(),
        "max_error": errors.iter().copied().fold(0.0, f64::max),
    });
    let text = serde_json::to_string_pretty(&json).expect("diagnostics serialize");
    write_atomic(&cfg.out, "diagnostics.json", text.as_bytes())?;

    println!(
        "solve: converged={} iterations={} residual={:e} -> {}",
        diag.converged,
        diag.iterations,
        diag.residual,
        cfg.out.display()
    );
    Ok(if diag.converged { EXIT_OK } else { EXIT_DIVERGED })
}

pub fn cmd_study(cfg: &RunConfig, kind: StudyKind) -> Result<i32, CliError> {
    let disc = cfg.discretization()?;
    let constants = cfg.constants();
    let problem = manufactured_problem(&cfg.problem.recipe, constants, &disc)?;
    let exec = Execution::default();
    let report = match kind {
        StudyKind::Convergence => run_convergence_study(&problem, &cfg.plan(), &disc, exec)?,
        StudyKind::Loglaw => {
            let plan = SweepPlan {
                probe_x: vec![constants.a],
                ..cfg.plan()
            };
            run_loglaw_check(&problem, &plan, &disc, exec)?
        }
        StudyKind::Stability => run_stability_check(
            &problem.spec,
            &problem.data,
            &cfg.regularization(),
            &disc,
            cfg.seed_pair(),
            exec,
        )?,
        StudyKind::Blowup => run_blowup_contrast(&problem, &cfg.regularization(), &disc, cfg.regularization.seed)?,
    };
    debug_assert_eq!(report.kind, kind.name());
    write_report(cfg, &report)?;
    Ok(verdict_exit(&report))
}
