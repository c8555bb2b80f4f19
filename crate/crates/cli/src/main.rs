//! `ultracarl`: config-driven verification runs for the null-cone weighted
//! estimates — region exports, figure slices, estimate calibration and
//! holdout checks, absorption ratios, and the uniqueness bound.
//!
//! Exit codes: 0 on pass, 2 on a failed verification, 1 on usage or config
//! errors.

mod config;
mod report;
mod runner;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Export region membership tables for the configured domain.
    Regions,
    /// Verify the boundary estimate with the calibration/holdout protocol.
    VerifyBoundary,
    /// Verify the interior estimate (both gradient variants by default).
    VerifyInterior,
    /// Check weight values, gradients, and the derivative bound.
    WeightCheck,
    /// Evaluate the lower-order absorption ratios.
    Absorption,
    /// Demonstrate the quantitative uniqueness bound.
    UniquenessDemo,
    /// Region tables plus spatial-slice SVG figures.
    Figures,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Regions => "regions",
            Command::VerifyBoundary => "verify-boundary",
            Command::VerifyInterior => "verify-interior",
            Command::WeightCheck => "weight-check",
            Command::Absorption => "absorption",
            Command::UniquenessDemo => "uniqueness-demo",
            Command::Figures => "figures",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "ultracarl", version, about)]
struct Cli {
    /// What to run.
    #[arg(value_enum)]
    command: Command,
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's [run] out, then `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override; recorded in every artifact.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker-thread override (0 = library default). Outputs are
    /// bit-identical for any value.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let mut cfg = match RunConfig::load(&text, cli.out.clone(), cli.seed) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };

    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    match runner::run_command(cli.command.name(), &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!(
                "verification failed; see {}",
                cfg.out_dir.join("summary.txt").display()
            );
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
