//! `heterorep` command-line driver.

pub mod commands;
pub mod config;
pub mod context;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "heterorep",
    version,
    about = "Heterogeneous document representations for fake-news detection"
)]
pub struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Scenario: LM, KG, LM+KG, LM+KG+KG-ENTITY or custom:a,b,...
    #[arg(long, global = true, value_name = "NAME")]
    pub scenario: Option<String>,

    /// Global seed; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    /// Output directory; overrides the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Extra precomputed block, repeatable.
    #[arg(long = "block", global = true, value_name = "NAME=PATH:KIND")]
    pub blocks: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build stylometric, LSA, KG and KG-ENTITY blocks for every split.
    Featurize,
    /// Grid-search a learner on a scenario and evaluate it on test.
    Train,
    /// Evaluate every non-empty subset of blocks.
    Ablate,
    /// Rank features by mutual information and attribute the top k to blocks.
    Rank {
        #[arg(long)]
        k: Option<usize>,
    },
    /// Highest-variance TF-IDF words per class.
    Words {
        #[arg(long = "top-k")]
        top_k: Option<usize>,
    },
    /// Concept coverage and label statistics.
    Stats,
    /// Print DRM headers.
    Inspect {
        #[arg(value_name = "FILE")]
        files: Vec<PathBuf>,
    },
}

pub fn run(cli: &Cli) -> CliResult<()> {
    if let Command::Inspect { files } = &cli.command {
        return commands::inspect(files, &cli.blocks);
    }
    let ctx = context::Context::from_cli(cli)?;
    match &cli.command {
        Command::Featurize => commands::featurize(&ctx),
        Command::Train => commands::train(&ctx),
        Command::Ablate => commands::ablate(&ctx),
        Command::Rank { k } => commands::rank(&ctx, *k),
        Command::Words { top_k } => commands::words(&ctx, *top_k),
        Command::Stats => commands::stats(&ctx),
        Command::Inspect { .. } => unreachable!(),
    }
}

/// Reads `HETEROREP_THREADS` and sizes the global worker pool.
pub fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("HETEROREP_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        error::usage(format!(
            "HETEROREP_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| error::usage(format!("cannot size worker pool: {e}")))
}
