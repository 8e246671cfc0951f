//! `pbx`: run the pseudo-boson diagnostics for one model and write a report.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage error,
//! 3 numerical failure, 4 I/O error.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pbx_core::error::PbxError;
use pbx_core::models::{EqhoParams, GeneralizedParams, ModelParams, SwansonParams};
use pbx_core::report::{render_json, run, write_csv, DiagnosticsReport, Format, RunConfig, Suite};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "pbx",
    version,
    about = "Pseudo-boson biorthogonal basis diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    model: Model,
}

#[derive(Subcommand, Debug)]
enum Model {
    /// Extended quantum harmonic oscillator.
    Eqho {
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Swanson model, |theta| < pi/4, theta != 0.
    Swanson {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Quadratic generalization W = exp(alpha a^2 + beta_g a†^2).
    Generalized {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long = "beta-g", allow_negative_numbers = true)]
        beta_g: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Fock-space truncation dimension.
    #[arg(long, default_value_t = 128)]
    dim: usize,
    /// Highest basis index.
    #[arg(long = "nmax", default_value_t = 16)]
    n_max: usize,
    /// Trust window for residuals (default dim/2).
    #[arg(long)]
    window: Option<usize>,
    /// Base tolerance, in [1e-14, 1e-2].
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Comma-separated suites or "all".
    #[arg(long, default_value = "all")]
    suites: String,
    #[arg(long, default_value = "json")]
    format: String,
    /// File for JSON, directory for CSV. JSON goes to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Rerun at twice the dimension and flag residuals that move.
    #[arg(long)]
    stability: bool,
    /// Leave the provenance timestamp empty.
    #[arg(long)]
    no_timestamp: bool,
}

fn usage(e: &PbxError) -> ExitCode {
    eprintln!("pbx: {e}");
    ExitCode::from(EXIT_USAGE)
}

fn config(model: Model) -> Result<(RunConfig, bool), PbxError> {
    let (params, c) = match model {
        Model::Eqho { beta, common } => (ModelParams::Eqho(EqhoParams::new(beta)?), common),
        Model::Swanson { theta, common } => {
            (ModelParams::Swanson(SwansonParams::new(theta)?), common)
        }
        Model::Generalized {
            alpha,
            beta_g,
            common,
        } => (
            ModelParams::Generalized(GeneralizedParams::new(alpha, beta_g)?),
            common,
        ),
    };
    let mut cfg = RunConfig::new(params, c.dim, c.n_max, c.tol, Suite::parse_list(&c.suites)?)?;
    cfg.format = c.format.parse::<Format>()?;
    if let Some(w) = c.window {
        cfg.window = w;
    }
    cfg.output = c.output;
    cfg.stability = c.stability;
    cfg.validate()?;
    if cfg.format == Format::Csv && cfg.output.is_none() {
        return Err(PbxError::Config("csv output needs --output <dir>".into()));
    }
    Ok((cfg, c.no_timestamp))
}

fn emit(report: &DiagnosticsReport) -> io::Result<()> {
    match (report.config.format, &report.config.output) {
        (Format::Json, Some(path)) => fs::write(path, render_json(report)),
        (Format::Json, None) => io::stdout()
            .lock()
            .write_all(render_json(report).as_bytes()),
        (Format::Csv, Some(dir)) => write_csv(report, dir),
        (Format::Csv, None) => unreachable!("rejected during validation"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let (cfg, no_timestamp) = match config(cli.model) {
        Ok(c) => c,
        Err(e) => return usage(&e),
    };
    let timestamp = (!no_timestamp)
        .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    let report = match run(&cfg, timestamp) {
        Ok(r) => r,
        Err(e) if e.is_numerical() => {
            eprintln!("pbx: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
        Err(e) => return usage(&e),
    };
    if let Err(e) = emit(&report) {
        eprintln!("pbx: cannot write report: {e}");
        return ExitCode::from(EXIT_IO);
    }
    let failed = report.failed_checks();
    if !failed.is_empty() {
        eprintln!(
            "pbx: {} check(s) failed: {}",
            failed.len(),
            failed.join(", ")
        );
    }
    if let Some(e) = &report.error {
        eprintln!("pbx: {}: {}", e.kind, e.message);
    }
    ExitCode::from(report.exit_code() as u8)
}
