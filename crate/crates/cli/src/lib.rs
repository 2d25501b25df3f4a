//! Command-line front end: configuration, subcommand dispatch and report output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

pub use config::{Args, Format, RunConfig, Subcommand};
pub use error::{CliError, Result};

/// What a run produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// Names of failed `verify` checks; empty for other subcommands.
    pub failed_checks: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failed_checks.is_empty() {
            0
        } else {
            1
        }
    }
}

/// Runs one subcommand, writing tables to `cfg.out` or to `stdout`.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<Outcome> {
    let tables = match cfg.subcommand {
        Subcommand::Spectrum => commands::spectrum(cfg)?,
        Subcommand::ExcitationCurve => commands::excitation_curve(cfg)?,
        Subcommand::Selfenergy => commands::selfenergy(cfg)?,
        Subcommand::Resonances => commands::resonances(cfg)?,
        Subcommand::Field => commands::field(cfg)?,
        Subcommand::Oracle => commands::oracle(cfg)?,
        Subcommand::Verify => {
            let checks = verify::run_suite(cfg)?;
            for c in &checks {
                writeln!(stdout, "{}", c.line())?;
            }
            let failed = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
            let files = match &cfg.out {
                Some(dir) => output::emit(&[verify::table(&checks)], &cfg.echo(), cfg.format, Some(dir), stdout)?,
                None => Vec::new(),
            };
            return Ok(Outcome { files, failed_checks: failed });
        }
    };
    let files = output::emit(&tables, &cfg.echo(), cfg.format, cfg.out.as_deref(), stdout)?;
    Ok(Outcome { files, failed_checks: Vec::new() })
}
