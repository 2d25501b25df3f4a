use std::process::ExitCode;

use clap::Parser;
use dressed_ring_cli::{run, Args, RunConfig};

fn main() -> ExitCode {
    // clap exits with status 2 on malformed flags
    let args = Args::parse();
    let result = RunConfig::from_args(&args).and_then(|cfg| run(&cfg, &mut std::io::stdout().lock()));
    match result {
        Ok(outcome) => {
            if !outcome.failed_checks.is_empty() {
                eprintln!("failed checks: {}", outcome.failed_checks.join(", "));
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("dressed-ring: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
