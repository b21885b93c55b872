use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gridform::pipeline::{
    cmd_analyze, cmd_extract, cmd_optimize, cmd_predict, cmd_report, cmd_train, PipelineError, RunConfig,
};

/// Grid-shell form finding: curve data, sequence model, frame analysis and
/// multi-objective search.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configuration's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sample curves into the point dataset and folds.
    Extract,
    /// Train the sequence model on the dataset.
    Train,
    /// Predict curvature and tangents on the test fold.
    Predict,
    /// Analyze one frame model.
    Analyze,
    /// Run the form-finding search.
    Optimize,
    /// Regenerate figures from existing tables.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::load(cli.config.as_deref(), cli.seed).and_then(|cfg| {
        let cmd = match cli.command {
            Command::Extract => cmd_extract,
            Command::Train => cmd_train,
            Command::Predict => cmd_predict,
            Command::Analyze => cmd_analyze,
            Command::Optimize => cmd_optimize,
            Command::Report => cmd_report,
        };
        cmd(&cfg, &cli.out)
    });
    match result {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &PipelineError) -> u8 {
    e.exit_code() as u8
}
