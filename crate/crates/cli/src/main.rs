mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use quantir::eval::MaskMode;
use quantir::{RankerKind, RerankMode};

/// Bad invocation: unknown option values, inconsistent flags, bad config.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "quantir", version, about = "Quantity-aware sentence retrieval")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Unit catalog JSON replacing the built-in one.
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Condition dictionary JSON replacing the built-in one.
    #[arg(long, global = true)]
    pub conditions: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract quantities from a JSON-lines corpus and build the index.
    Build(BuildArgs),
    /// Rank sentences for one query.
    Search(SearchArgs),
    /// Rank sentences for every query in a file and write a TREC run.
    BatchSearch(BatchSearchArgs),
    /// Add quantity scores to an external run.
    Rerank(RerankArgs),
    /// Generate synthetic queries and training triples.
    Datagen(DatagenArgs),
    /// Score a run against qrels.
    Eval(EvalArgs),
    /// Paired permutation test between two runs.
    Significance(SignificanceArgs),
    /// Replace values or unit surfaces in a corpus with [MASK].
    Mask(MaskArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// JSON lines of {doc_id, text} documents or {sent_id, text} sentences.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory for index.json and sentences.jsonl.
    #[arg(long)]
    pub out: PathBuf,
}

fn first_stage(s: &str) -> Result<RankerKind, String> {
    match s.parse::<RankerKind>()? {
        k @ (RankerKind::Bm25 | RankerKind::Bm25Filter | RankerKind::Qbm25) => Ok(k),
        _ => Err(format!(
            "`{s}` needs an external run; use the rerank command"
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Trec,
    Text,
}

#[derive(Debug, Args)]
pub struct RankerArgs {
    /// bm25, bm25-filter or qbm25.
    #[arg(long, default_value = "qbm25", value_parser = first_stage)]
    pub ranker: RankerKind,
    /// Weight of the quantity score.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Proximity function set (ratio-decay, relative-decay).
    #[arg(long)]
    pub phi: Option<String>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Directory written by `build`.
    #[arg(long)]
    pub index: PathBuf,
    #[command(flatten)]
    pub ranker: RankerArgs,
    /// Number of results.
    #[arg(short, long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "trec")]
    pub format: OutputFormat,
    pub query: String,
}

#[derive(Debug, Args)]
pub struct BatchSearchArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[command(flatten)]
    pub ranker: RankerArgs,
    /// JSON lines with qid and text, or `qid<TAB>text` lines.
    #[arg(long)]
    pub queries: PathBuf,
    /// Results per query; defaults to the configured depth.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write per-query wall-clock milliseconds here.
    #[arg(long)]
    pub latency: Option<PathBuf>,
}

fn rerank_mode(s: &str) -> Result<RerankMode, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct RerankArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// External TREC run, optionally with a `match=0|1` seventh column.
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    /// topk or gated.
    #[arg(long, default_value = "topk", value_parser = rerank_mode)]
    pub mode: RerankMode,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DatagenArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory for queries.jsonl and triples.jsonl.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated subset of original, unit, value, expansion.
    #[arg(long)]
    pub strategies: Option<String>,
    /// Samples per side and strategy.
    #[arg(long)]
    pub sample_size: Option<usize>,
    /// JSON map from concept to expansions, replacing the built-in map.
    #[arg(long, conflicts_with = "completions")]
    pub expansions: Option<PathBuf>,
    /// Recorded completions (JSON lines of {prompt, completion}).
    #[arg(long, requires = "prompt")]
    pub completions: Option<PathBuf>,
    /// Prompt template file, or `finance` / `medical` for the built-in ones.
    #[arg(long, requires = "completions")]
    pub prompt: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub qrels: PathBuf,
    /// Latency file written by batch-search.
    #[arg(long)]
    pub latency: Option<PathBuf>,
    /// Index directory used to check that judged sentences exist.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Print JSON instead of tables.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SignificanceArgs {
    #[arg(long)]
    pub run_a: PathBuf,
    #[arg(long)]
    pub run_b: PathBuf,
    #[arg(long)]
    pub qrels: PathBuf,
    /// Restrict to one metric (P@10, MRR@10, NDCG@10, R@100).
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub iterations: Option<usize>,
}

fn mask_mode(s: &str) -> Result<MaskMode, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// value or unit.
    #[arg(long, value_parser = mask_mode)]
    pub mode: MaskMode,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
