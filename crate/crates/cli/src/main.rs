//! `screenaudit`: drive the audit pipeline stage by stage.
//!
//! Each subcommand reads one TOML configuration, runs a stage, and prints
//! that stage's summary as JSON on stdout. Exit codes separate operator
//! mistakes from infrastructure trouble:
//!
//! - 0: stage completed
//! - 2: the configuration or on-disk state is wrong (fix and rerun)
//! - 3: a remote endpoint misbehaved (retry later)
//! - 1: anything else

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use screenaudit_core::chunker::ChunkError;
use screenaudit_core::config::load_run_config;
use screenaudit_core::pipeline::{self, PipelineError};
use screenaudit_core::report;
use screenaudit_core::scorer::ScorerError;

#[derive(Parser)]
#[command(
    name = "screenaudit",
    version,
    about = "Audit a resume-scoring model for demographic bias"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate the resume corpus, reporting its shape.
    Ingest(StageArgs),
    /// Split every resume into elements and report the counts.
    Chunk(StageArgs),
    /// Score all counterfactual variants and write the run manifest.
    Run(StageArgs),
    /// Run the statistical battery over a completed run.
    Analyze(RunScopedArgs),
    /// Write tables, figures, and the machine summary for an analyzed run.
    Report(RunScopedArgs),
}

#[derive(Args)]
struct StageArgs {
    /// Run configuration (TOML).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
}

#[derive(Args)]
struct RunScopedArgs {
    /// Run configuration (TOML).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Run to operate on; derived from the configuration when omitted.
    #[arg(long, value_name = "ID")]
    run_id: Option<String>,
}

impl RunScopedArgs {
    fn resolve(
        &self,
    ) -> Result<(screenaudit_core::RunConfig, String), PipelineError> {
        let config = load_run_config(&self.config)?;
        let run_id = match &self.run_id {
            Some(id) => id.clone(),
            None => pipeline::derive_run_id(&config)?,
        };
        Ok((config, run_id))
    }
}

fn execute(command: Command) -> Result<serde_json::Value, PipelineError> {
    let value = match command {
        Command::Ingest(args) => {
            let config = load_run_config(&args.config)?;
            to_json(&pipeline::stage_ingest(&config)?)
        }
        Command::Chunk(args) => {
            let config = load_run_config(&args.config)?;
            to_json(&pipeline::stage_chunk(&config)?)
        }
        Command::Run(args) => {
            let config = load_run_config(&args.config)?;
            to_json(&pipeline::stage_run(&config)?)
        }
        Command::Analyze(args) => {
            let (config, run_id) = args.resolve()?;
            to_json(&pipeline::stage_analyze(&config, &run_id)?)
        }
        Command::Report(args) => {
            let (config, run_id) = args.resolve()?;
            to_json(&report::stage_report(&config, &run_id)?)
        }
    };
    Ok(value)
}

fn to_json<T: serde::Serialize>(value: &T) -> serde_json::Value {
    // Every stage summary was already serialized to disk on the same types,
    // so this cannot fail on data that reached us.
    serde_json::to_value(value).expect("stage summary serializes")
}

/// 2 for anything the operator can fix locally, 3 for remote trouble.
fn exit_for(err: &PipelineError) -> u8 {
    match err {
        PipelineError::Config(_)
        | PipelineError::Corpus(_)
        | PipelineError::Prompt(_)
        | PipelineError::Io { .. }
        | PipelineError::Json { .. }
        | PipelineError::MissingRun { .. }
        | PipelineError::ManifestMismatch { .. }
        | PipelineError::UnsupportedDesign { .. } => 2,
        PipelineError::Scorer(ScorerError::MissingCredential { .. }) => 2,
        PipelineError::Scorer(
            ScorerError::Transport { .. }
            | ScorerError::Http { .. }
            | ScorerError::Exhausted { .. },
        ) => 3,
        PipelineError::Chunk(ChunkError::Embedding(_)) => 3,
        PipelineError::Chunk(ChunkError::InvalidProportion(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(value) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&value).expect("value prints")
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_for(&err))
        }
    }
}
