//! `tse`: train topic models and topic-sensitive embeddings, then evaluate
//! them on context-aware similarity and lexical substitution.

mod commands;
mod convert;
mod manifest;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use commands::*;

#[derive(Parser, Debug, Serialize)]
#[command(name = "tse", version, about = "Topic-sensitive word embeddings")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// Seed for every stochastic stage.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads. Embedding training is only reproducible with 1.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Manifest path. Defaults to `<first output>.manifest.json`, or stderr
    /// for commands that only print.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Count tokens and write a vocabulary file.
    BuildVocab(BuildVocabArgs),
    /// Train an HDP topic model.
    TrainHdp(TrainHdpArgs),
    /// Label every token with a topic and write document-topic distributions.
    Label(LabelArgs),
    /// Train word or topic-sensitive embeddings.
    TrainEmb(TrainEmbArgs),
    /// Nearest neighbors of a word or word-topic entry.
    Nn(NnArgs),
    /// Spearman correlation on a context-similarity dataset.
    EvalScws(EvalScwsArgs),
    /// GAP on a lexical substitution dataset, overall and per word class.
    EvalLexsub(EvalLexsubArgs),
    /// Generate synthetic corpora and benchmarks.
    MakeSynthetic(MakeSyntheticArgs),
    /// Convert SemEval-2007 or CoInCo substitution data to TSV.
    ConvertLexsub(ConvertLexsubArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::BuildVocab(_) => "build-vocab",
            Command::TrainHdp(_) => "train-hdp",
            Command::Label(_) => "label",
            Command::TrainEmb(_) => "train-emb",
            Command::Nn(_) => "nn",
            Command::EvalScws(_) => "eval-scws",
            Command::EvalLexsub(_) => "eval-lexsub",
            Command::MakeSynthetic(_) => "make-synthetic",
            Command::ConvertLexsub(_) => "convert-lexsub",
            Command::Replay(_) => "replay",
        }
    }
}

/// Bad flag combinations that clap cannot express; exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli, std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli, argv: Vec<String>) -> anyhow::Result<()> {
    if let Command::Replay(args) = &cli.command {
        let argv = manifest::recorded_argv(&args.manifest)?;
        let replayed = match Cli::try_parse_from(&argv) {
            Ok(c) => c,
            Err(e) => return usage(format!("manifest argv does not parse: {e}")),
        };
        if matches!(replayed.command, Command::Replay(_)) {
            return usage("a manifest cannot replay another replay");
        }
        return run(replayed, argv);
    }
    if cli.global.threads == 0 {
        return usage("--threads must be >= 1");
    }
    // Ignore the error if a pool already exists (replay within one process).
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build_global();

    let g = &cli.global;
    let outcome = match &cli.command {
        Command::BuildVocab(a) => build_vocab(a)?,
        Command::TrainHdp(a) => train_hdp(a, g)?,
        Command::Label(a) => label(a, g)?,
        Command::TrainEmb(a) => train_emb(a, g)?,
        Command::Nn(a) => nn(a)?,
        Command::EvalScws(a) => eval_scws(a, g)?,
        Command::EvalLexsub(a) => eval_lexsub(a, g)?,
        Command::MakeSynthetic(a) => make_synthetic(a, g)?,
        Command::ConvertLexsub(a) => convert::run(a)?,
        Command::Replay(_) => unreachable!(),
    };
    manifest::emit(&cli, &argv, &outcome)
}
