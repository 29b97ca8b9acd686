//! `qlaw` command-line front end.
//!
//! Exit status: 0 pass, 1 tolerance failure, 2 usage or configuration error.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::CliError;
pub use output::OutputDir;
pub use scenario::{LoadedScenario, Scenario};

#[derive(Debug, Parser)]
#[command(name = "qlaw", version, about = "Quantum trajectory laws: residual checks, trajectories and sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (TOML).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Overrides the scenario's seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Residual checks; exits 1 if any exceeds its tolerance.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Multiplies every tolerance.
        #[arg(long, value_name = "F", default_value_t = 1.0)]
        tolerance_scale: f64,
    },
    /// Trajectory for the scenario's module.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// 2-D hydrogen trajectory from the `[hydrogen]` section.
    Hydrogen2d {
        #[command(flatten)]
        common: Common,
    },
    /// Klein-Gordon trajectory from the `[relativistic]` section.
    Relativistic {
        #[command(flatten)]
        common: Common,
    },
    /// Trajectory family over a constant grid, with node detection.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Self::Verify { common, .. }
            | Self::Simulate { common }
            | Self::Hydrogen2d { common }
            | Self::Relativistic { common }
            | Self::Sweep { common } => common,
        }
    }
}

/// Run one command, reporting written files on `stdout`. Returns the exit status.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let common = cli.command.common();
    let scenario = LoadedScenario::from_file(&common.config)?.with_seed(common.seed);
    let mut out = OutputDir::create(&common.out, scenario.hash(), scenario.scenario.seed)?;
    let verdict = match &cli.command {
        Command::Verify { tolerance_scale, .. } => commands::verify(&scenario, &mut out, *tolerance_scale)?,
        Command::Simulate { .. } => commands::simulate(&scenario, &mut out).map(|_| true)?,
        Command::Hydrogen2d { .. } => commands::hydrogen2d(&scenario, &mut out).map(|_| true)?,
        Command::Relativistic { .. } => commands::relativistic(&scenario, &mut out).map(|_| true)?,
        Command::Sweep { .. } => {
            let nodes = commands::sweep(&scenario, &mut out)?;
            writeln!(stdout, "nodes detected: {nodes}")?;
            true
        }
    };
    writeln!(stdout, "scenario {}", out.hash())?;
    for path in out.written() {
        writeln!(stdout, "wrote {}", path.display())?;
    }
    if verdict {
        Ok(())
    } else {
        Err(CliError::Tolerance("residuals exceed tolerance, see the verify report".into()))
    }
}

/// Parse `args` and run; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, &mut std::io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qlaw: {e}");
            e.exit_code()
        }
    }
}
