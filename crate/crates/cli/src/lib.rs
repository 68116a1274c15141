//! Command-line front end: config loading, subcommands and exit codes.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use metaline::Topology;

use crate::commands::{Overrides, Report};
use crate::config::RunConfig;
pub use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    /// Symmetric T: half series, shunt, half series.
    T,
    /// L section: series, then shunt.
    L,
}

impl From<TopologyArg> for Topology {
    fn from(t: TopologyArg) -> Self {
        match t {
            TopologyArg::T => Topology::SymmetricT,
            TopologyArg::L => Topology::LSection,
        }
    }
}

const AFTER_HELP: &str = "\
Exit codes: 0 success, 2 configuration error, 3 analysis error (e.g. no
bracketed pass-band), 4 data error (unreadable or malformed input).

Group delay is taken from the unwrapped s21 phase; the grid must be fine
enough that the phase moves by less than pi between neighbouring points.";

#[derive(Debug, Parser)]
#[command(name = "metaline", version, about = "Lumped-circuit analysis of CSR-loaded band-pass filters", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration (defaults to the built-in reference design).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Number of grid points.
    #[arg(long, global = true, value_name = "N")]
    pub points: Option<usize>,
    /// Grid start frequency.
    #[arg(long, global = true, value_name = "HZ")]
    pub start: Option<f64>,
    /// Grid stop frequency.
    #[arg(long, global = true, value_name = "HZ")]
    pub stop: Option<f64>,
    /// Number of cascaded cells.
    #[arg(long, global = true, value_name = "N")]
    pub stages: Option<usize>,
    /// Reference impedance.
    #[arg(long, global = true, value_name = "OHMS")]
    pub z0: Option<f64>,
    /// Use L_R as the tank inductance and L_L as the series inductance.
    #[arg(long, global = true)]
    pub swap_inductors: bool,
    #[arg(long, global = true, value_enum)]
    pub topology: Option<TopologyArg>,
    /// Synthesis seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep S-parameters; write .s2p and CSV, print filter metrics.
    Simulate,
    /// Bloch dispersion curve and closed-form consistency report.
    Dispersion,
    /// Filter metrics of a Touchstone file.
    Metrics {
        input: PathBuf,
    },
    /// Fit element values to the mask.
    Synth,
    /// Compare two Touchstone files.
    Compare {
        a: PathBuf,
        b: PathBuf,
    },
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            points: self.points,
            start_hz: self.start,
            stop_hz: self.stop,
            stages: self.stages,
            z0_ohm: self.z0,
            swap_inductors: self.swap_inductors,
            topology: self.topology.map(Into::into),
            seed: self.seed,
        }
    }

    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        self.overrides().apply(base)
    }
}

fn emit(report: &Report) {
    print!("{}", report.text);
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = cli.run_config()?;
    match &cli.command {
        Command::Simulate => {
            let out = commands::simulate(&cfg)?;
            emit(&out.report);
            out.metrics.map(|_| ()).map_err(CliError::from)
        }
        Command::Dispersion => {
            emit(&commands::dispersion(&cfg)?.report);
            Ok(())
        }
        Command::Metrics { input } => {
            emit(&commands::metrics(input, &cfg)?.report);
            Ok(())
        }
        Command::Synth => {
            emit(&commands::synth(&cfg)?.report);
            Ok(())
        }
        Command::Compare { a, b } => {
            emit(&commands::compare(a, b, &cfg)?.report);
            Ok(())
        }
    }
}
