use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use moraltopics::config::Config;
use moraltopics::pipeline::{self, Ctx};

#[derive(Parser)]
#[command(name = "moraltopics", version, about = "Topic analysis of moral-dilemma discussion threads")]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the master seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse archives and reconstruct verdicts.
    Ingest,
    /// Apply the corpus filter rules.
    Filter,
    /// Split the filtered corpus at the date cutoff.
    Split,
    /// Build the vocabulary and bag-of-words vectors.
    Prep,
    /// Train the topic model and fold in the test documents.
    Train,
    /// Held-out perplexity over the configured K values.
    Sweep,
    /// Write the cluster-naming question bank.
    NamingBank,
    /// Merge clusters into named topics and assign documents.
    Merge,
    /// Topic-pair counts, prevalence, treemap and CCDF tables.
    Pairs,
    /// Pointwise mutual information between topics.
    Pmi,
    /// UMass coherence per cluster.
    Coherence,
    /// Adjusted mutual information between clusterings.
    Ami {
        /// Extra clustering as NAME=PATH, a `post_id,label` CSV.
        #[arg(long = "labels", value_parser = parse_labels)]
        labels: Vec<(String, PathBuf)>,
    },
    /// Score training posts and verdicts against the lexicons.
    LexiconScore,
    /// Correlate lexicon categories with YA judgments.
    Correlate,
    /// Foundation prevalence rows per topic and pair.
    Radar,
    /// Write the validation question banks.
    SurveyBank,
    /// Agreement rates from exported survey responses.
    Agreement,
    /// Run the survey service.
    Serve,
    /// Gather plot-ready tables under the output directory.
    Report,
}

fn parse_labels(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected NAME=PATH, got {s:?}")),
    }
}

fn run(cli: Cli) -> Result<String> {
    let Some(path) = cli.config else {
        bail!("--config PATH is required");
    };
    let mut cfg = Config::load(&path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let ctx = Ctx::new(cfg);
    match cli.command {
        Command::Ingest => pipeline::ingest(&ctx),
        Command::Filter => pipeline::filter(&ctx),
        Command::Split => pipeline::split(&ctx),
        Command::Prep => pipeline::prep(&ctx),
        Command::Train => pipeline::train(&ctx),
        Command::Sweep => pipeline::sweep(&ctx),
        Command::NamingBank => pipeline::naming_bank(&ctx),
        Command::Merge => pipeline::merge(&ctx),
        Command::Pairs => pipeline::pairs(&ctx),
        Command::Pmi => pipeline::pmi(&ctx),
        Command::Coherence => pipeline::coherence(&ctx),
        Command::Ami { labels } => pipeline::ami(&ctx, &labels),
        Command::LexiconScore => pipeline::lexicon_score(&ctx),
        Command::Correlate => pipeline::correlate(&ctx),
        Command::Radar => pipeline::radar(&ctx),
        Command::SurveyBank => pipeline::survey_bank(&ctx),
        Command::Agreement => pipeline::agreement(&ctx),
        Command::Serve => {
            let rt = tokio::runtime::Runtime::new().context("starting the async runtime")?;
            rt.block_on(moraltopics::service::serve(&ctx.cfg.service))?;
            Ok("service stopped".into())
        }
        Command::Report => pipeline::report(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
