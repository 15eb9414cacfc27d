//! `qsl` — command-line front end for the speed-limit toolkit.
//!
//! Machine-readable output goes to stdout, everything human-readable to
//! stderr. Exit codes: 0 success, 1 domain failure, 2 usage error.

use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use qsl_core::bounds::{bound_report, reduce_spectrum};
use qsl_core::families::{family_a_refine, family_b, FamilyAParams, FamilyBParams, FamilyState};
use qsl_core::optimizer::{minimize_tau, OptProblem};
use qsl_core::parse::{parse_state, spectral_to_json, ParsedState, StateDocument};
use qsl_core::state::{Moments, SpectralState};
use qsl_core::survival::{first_orthogonal_time, ZeroFinderConfig};
use qsl_core::units::UnitConvention;
use qsl_core::QslError;

pub mod sweep;
pub mod verify;

#[derive(Parser)]
#[command(
    name = "qsl",
    version,
    about = "Quantum speed limits: orthogonalization times, bounds, state families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print moments and every speed-limit bound for a state file
    Bounds {
        /// State JSON file (spectral, amplitude or mixture)
        #[arg(long)]
        state: PathBuf,
    },
    /// Locate the first orthogonalization time of a pure state
    Tau {
        #[arg(long)]
        state: PathBuf,
        /// Orthogonality threshold on |S| (default 1e-9)
        #[arg(long)]
        tol: Option<f64>,
        /// Absolute scan horizon (default 8 x the slower bound)
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Construct a bound-approaching family member
    Family {
        /// Target dE/E ratio
        #[arg(long)]
        alpha: f64,
        /// Ground weight of the three-level family for alpha < 1
        #[arg(long, conflicts_with = "k")]
        p0: Option<f64>,
        /// Level index of the sparse family for alpha > 1
        #[arg(long)]
        k: Option<u32>,
    },
    /// Emit the keel-figure CSV: bound curve plus family approximants
    Sweep {
        #[arg(long)]
        alpha_min: f64,
        #[arg(long)]
        alpha_max: f64,
        #[arg(long)]
        points: usize,
        /// "p0,p0,...;k,k,..." - first list feeds the alpha<1 family, second
        /// the alpha>1 family
        #[arg(long)]
        params: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the numerical property suites
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Search for the fastest-orthogonalizing state at fixed alpha
    Optimize {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        levels: usize,
        /// RNG seed (overrides QSL_SEED; default 7)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fold and reflect a state orthogonal at tau below e_max < h/tau
    Reduce {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        tau: f64,
    },
}

/// Runs the CLI against explicit streams; returns the process exit status.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    2
                }
            }
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Bounds { state } => cmd_bounds(&state, stdout),
        Command::Tau { state, tol, horizon } => cmd_tau(&state, tol, horizon, stdout),
        Command::Family { alpha, p0, k } => cmd_family(alpha, p0, k, stdout, stderr),
        Command::Sweep {
            alpha_min,
            alpha_max,
            points,
            params,
            out,
        } => cmd_sweep(alpha_min, alpha_max, points, &params, &out, stderr),
        Command::Verify { suite, samples } => cmd_verify(&suite, samples, stdout, stderr),
        Command::Optimize { alpha, levels, seed } => cmd_optimize(alpha, levels, seed, stdout),
        Command::Reduce { state, tau } => cmd_reduce(&state, tau, stdout),
    }
}

#[derive(Debug)]
pub enum CliError {
    Core(QslError),
    Io(std::io::Error),
    Msg(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Msg(m) => write!(f, "{m}"),
        }
    }
}

impl From<QslError> for CliError {
    fn from(e: QslError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn load(path: &PathBuf) -> Result<StateDocument, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Msg(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_state(&text)?)
}

/// Moments of whichever state shape the document holds.
fn doc_moments(doc: &StateDocument) -> Result<Moments, CliError> {
    Ok(match &doc.state {
        ParsedState::Spectral(s) => s.moments(),
        ParsedState::Amplitude(a) => a.collapse_to_spectral()?.moments(),
        ParsedState::Mixed(e) => e.moments(),
    })
}

fn pure_spectral(doc: &StateDocument) -> Result<SpectralState, CliError> {
    match &doc.state {
        ParsedState::Spectral(s) => Ok(s.clone()),
        ParsedState::Amplitude(a) => Ok(a.collapse_to_spectral()?),
        ParsedState::Mixed(_) => Err(CliError::Msg(
            "this command requires a pure state, got a mixture".into(),
        )),
    }
}

fn emit_json<T: serde::Serialize>(value: &T, out: &mut dyn Write) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Msg(format!("serialization failed: {e}")))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn cmd_bounds(path: &PathBuf, stdout: &mut dyn Write) -> Result<(), CliError> {
    let doc = load(path)?;
    let moments = doc_moments(&doc)?;
    let report = bound_report(&moments, &doc.units)?;
    emit_json(
        &serde_json::json!({
            "moments": moments,
            "bounds": report,
        }),
        stdout,
    )
}

fn cmd_tau(
    path: &PathBuf,
    tol: Option<f64>,
    horizon: Option<f64>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let doc = load(path)?;
    let state = pure_spectral(&doc)?;
    let mut cfg = ZeroFinderConfig::default();
    if let Some(t) = tol {
        cfg.tolerance = t;
    }
    cfg.horizon = horizon;
    let result = first_orthogonal_time(&state, &cfg, &doc.units)?;
    emit_json(&result, stdout)
}

fn cmd_family(
    alpha: f64,
    p0: Option<f64>,
    k: Option<u32>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let units = UnitConvention::default();
    let fam: FamilyState = match (p0, k) {
        (Some(p0), None) => family_a_refine(&FamilyAParams { alpha, p0 }, &units)?,
        (None, Some(k)) => family_b(&FamilyBParams { alpha, k, e1: 1.0 }, &units)?,
        _ => {
            return Err(CliError::Msg(
                "pass exactly one of --p0 (alpha < 1) or --k (alpha > 1)".into(),
            ))
        }
    };
    emit_json(&spectral_to_json(&fam.state, &units), stdout)?;
    let summary = serde_json::json!({
        "predicted_tau": fam.predicted_tau,
        "achieved_tau": fam.achieved_tau,
        "achieved_alpha": fam.achieved_alpha,
        "bound_ratio": fam.bound_ratio,
    });
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Msg(format!("serialization failed: {e}")))?;
    writeln!(stderr, "{text}")?;
    Ok(())
}

fn cmd_sweep(
    alpha_min: f64,
    alpha_max: f64,
    points: usize,
    params: &str,
    out: &PathBuf,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let spec = sweep::SweepSpec::parse(alpha_min, alpha_max, points, params)?;
    let units = UnitConvention::default();
    let table = sweep::run_sweep(&spec, &units, stderr)?;
    let csv = sweep::to_csv(&table);
    std::fs::write(out, csv.as_bytes())
        .map_err(|e| CliError::Msg(format!("cannot write {}: {e}", out.display())))?;
    writeln!(stderr, "wrote {} rows to {}", table.len(), out.display())?;
    Ok(())
}

fn cmd_verify(
    suite: &str,
    samples: u64,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let suite = verify::Suite::from_name(suite)
        .ok_or_else(|| CliError::Msg(format!("unknown suite \"{suite}\"")))?;
    let checks = verify::run_suite(suite, samples);
    let mut all_ok = true;
    for c in &checks {
        all_ok &= c.passed;
        writeln!(
            stderr,
            "{} {:<44} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )?;
    }
    emit_json(&checks, stdout)?;
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Msg("verification failed".into()))
    }
}

fn cmd_optimize(
    alpha: f64,
    levels: usize,
    seed: Option<u64>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let seed = seed
        .or_else(|| std::env::var("QSL_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(7);
    let problem = OptProblem::free(alpha, levels, seed);
    let units = UnitConvention::default();
    let result = minimize_tau(&problem, &units)?;
    emit_json(&result, stdout)
}

fn cmd_reduce(path: &PathBuf, tau: f64, stdout: &mut dyn Write) -> Result<(), CliError> {
    let doc = load(path)?;
    let state = pure_spectral(&doc)?;
    let reduced = reduce_spectrum(&state, tau, &doc.units)?;
    emit_json(&spectral_to_json(&reduced, &doc.units), stdout)
}
