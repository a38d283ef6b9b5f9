use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use apisync_core::pipeline::{Pipeline, PipelineError, RunLock, Stage};
use clap::Parser;

/// Mine API-update examples and build code-completion benchmarks.
#[derive(Debug, Parser)]
#[command(name = "apisync", version)]
struct Cli {
    /// Stage to run (extract, diff, plan, fetch, locate, synthesize, build,
    /// evaluate) or `all`.
    stage: String,
    /// Pipeline configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Take over a lock left behind by an interrupted run.
    #[arg(long)]
    resume: bool,
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let stages: Vec<Stage> = if cli.stage == "all" {
        Stage::ALL.to_vec()
    } else {
        vec![cli.stage.parse()?]
    };
    let pipeline = Pipeline::load(&cli.config, cli.seed)?;
    let _lock = RunLock::acquire(&pipeline.root(), cli.resume)?;
    for stage in stages {
        let outcome = pipeline.run_stage(stage).with_context(|| format!("stage {stage}"))?;
        let counts: Vec<String> = outcome.manifest.counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let status = if outcome.skipped { "up to date" } else { "done" };
        println!("{stage}: {status} ({})", counts.join(", "));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<PipelineError>().map_or(1, PipelineError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
