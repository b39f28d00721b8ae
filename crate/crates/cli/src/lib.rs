//! `pqlab`: batch experiments over the phase estimation lab.
//!
//! Every subcommand reads an optional TOML config, applies flag overrides,
//! validates the result and only then computes. The table goes to `--out`
//! (or stdout) as CSV or JSON; summary values and PASS/FAIL lines go to
//! stderr.

pub mod config;
pub mod experiments;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{ConfigError, ExperimentConfig, ExperimentKind, Format, Params, Settings};
pub use experiments::run_experiment;
pub use output::{Cell, Check, Report, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pqlab", version, about = "Power-query phase estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run phase estimation at one phase and print the outcome distribution
    Simulate(Invocation),
    /// Subset sums L and differences M of a power schedule
    Freqset(Invocation),
    /// Bucket probability p_B_r(phi) over a phase grid
    QpeCurve(Invocation),
    /// Frequency coefficients eta of every bucket, checked against the DFT
    Audit(Invocation),
    /// Query lower bound against the empirical minimum T
    BoundSweep(Invocation),
    /// Randomised engine cross-checks
    Selftest(Invocation),
}

#[derive(Debug, Args)]
struct Invocation {
    /// TOML file with the same keys as the flags; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

impl Command {
    fn split(self) -> (ExperimentKind, Invocation) {
        match self {
            Command::Simulate(i) => (ExperimentKind::Simulate, i),
            Command::Freqset(i) => (ExperimentKind::Freqset, i),
            Command::QpeCurve(i) => (ExperimentKind::QpeCurve, i),
            Command::Audit(i) => (ExperimentKind::Audit, i),
            Command::BoundSweep(i) => (ExperimentKind::BoundSweep, i),
            Command::Selftest(i) => (ExperimentKind::Selftest, i),
        }
    }
}

fn resolve(kind: ExperimentKind, inv: Invocation) -> Result<ExperimentConfig, ConfigError> {
    let file = match &inv.config {
        Some(path) => Params::load(path)?,
        None => Params::default(),
    };
    ExperimentConfig::resolve(kind, &file.overlay(inv.params))
}

fn emit<W: Write>(report: &Report, format: Format, out: W) -> std::io::Result<()> {
    match format {
        Format::Csv => report.table.write_csv(out),
        Format::Json => report.write_json(out),
    }
}

/// Parses `args` (including the program name), runs the experiment and
/// returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let (kind, inv) = cli.command.split();
    let config = match resolve(kind, inv) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "invalid config: {e}");
            return EXIT_INVALID;
        }
    };
    let report = match run_experiment(&config) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "invalid config: {e}");
            return EXIT_INVALID;
        }
    };
    let written = match &config.out {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            emit(&report, config.format, &mut w)?;
            w.flush()
        }),
        None => emit(&report, config.format, &mut *stdout),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "cannot write output: {e}");
        return EXIT_INVALID;
    }
    let _ = report.write_log(&mut *stderr);
    exit_code(&report)
}

pub fn exit_code(report: &Report) -> i32 {
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    }
}
