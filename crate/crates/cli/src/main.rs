//! `jang-lab` — configuration-driven driver for the radial Jang pipeline.
//!
//! Exit codes: 0 success, 2 validation (config/domain), 3 solver failure.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::run::{CliError, Stage};

#[derive(Parser)]
#[command(name = "jang-lab", version, about = "Radial Jang-reduction pipeline driver")]
struct Cli {
    #[command(subcommand)]
    stage: StageCmd,
}

#[derive(Args)]
struct StageArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a fixed sentinel timestamp so identical runs are byte-identical.
    #[arg(long)]
    fixed_clock: bool,
}

#[derive(Subcommand)]
enum StageCmd {
    /// Zonal tail equation on the sphere.
    Alpha(StageArgs),
    /// Sub/supersolution profiles and anchor constants.
    Barriers(StageArgs),
    /// Energy-momentum fluxes and closed forms.
    Mass(StageArgs),
    /// Regularized continuation solve of the graph equation.
    Jang(StageArgs),
    /// Scalar-flattening stage, energy shift, glue decay.
    Conformal(StageArgs),
    /// Identity/consistency checks across stages.
    Verify(StageArgs),
    /// All stages in dependency order, one report.
    Pipeline(StageArgs),
}

impl StageCmd {
    fn split(self) -> (Stage, StageArgs) {
        match self {
            StageCmd::Alpha(a) => (Stage::Alpha, a),
            StageCmd::Barriers(a) => (Stage::Barriers, a),
            StageCmd::Mass(a) => (Stage::Mass, a),
            StageCmd::Jang(a) => (Stage::Jang, a),
            StageCmd::Conformal(a) => (Stage::Conformal, a),
            StageCmd::Verify(a) => (Stage::Verify, a),
            StageCmd::Pipeline(a) => (Stage::Pipeline, a),
        }
    }
}

fn execute(stage: Stage, args: StageArgs) -> Result<PathBuf, CliError> {
    let cfg = RunConfig::load(&args.config)?;
    let out_dir = args
        .out
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    run::run(stage, &cfg, &out_dir, args.fixed_clock)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, args) = cli.stage.split();
    match execute(stage, args) {
        Ok(report) => {
            println!("report written to {}", report.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
