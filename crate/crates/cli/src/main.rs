//! `simthresh`: embedding-similarity uncertainty, expected-neighbor
//! thresholds and translation-LM retrieval experiments.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "simthresh", version, about)]
struct Cli {
    /// Flat `key = value` file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Binned similarity disagreement between two replicas.
    Uncertainty(UncertaintyArgs),
    /// Histogram of probe-term similarities in one model.
    Histogram(HistogramArgs),
    /// Neighbors of terms above a threshold or top-k.
    Neighbors(NeighborsArgs),
    /// Expected-neighbor curves and the synonym-count threshold.
    Threshold(ThresholdArgs),
    /// Synonym-count statistics of a synset file.
    SynonymStats(SynonymStatsArgs),
    /// Build an inverted index from a corpus.
    Index(IndexArgs),
    /// Score topics and write a TREC run.
    Search(SearchArgs),
    /// MAP and NDCG of a run.
    Evaluate(EvaluateArgs),
    /// Paired t-test between two runs.
    Compare(CompareArgs),
}

#[derive(Args)]
pub struct BinArgs {
    #[arg(long, allow_hyphen_values = true)]
    domain_low: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    domain_high: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
pub struct UncertaintyArgs {
    /// Reference model (the one whose similarities choose the bin).
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    other: Option<PathBuf>,
    /// text or binary word2vec.
    #[arg(long)]
    format: Option<String>,
    /// Probe terms, one per line.
    #[arg(long)]
    probes: Option<PathBuf>,
    #[command(flatten)]
    bins: BinArgs,
    /// Uncertainty curve CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the reference model's similarity histogram here.
    #[arg(long)]
    histogram_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct HistogramArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    probes: Option<PathBuf>,
    #[command(flatten)]
    bins: BinArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct NeighborsArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Query term; repeatable.
    #[arg(long = "term")]
    terms: Vec<String>,
    /// File of query terms, one per line.
    #[arg(long)]
    probes: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "k")]
    threshold: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ThresholdArgs {
    /// Replica model; repeat for every replica (at least two).
    #[arg(long = "replica")]
    replicas: Vec<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    probes: Option<PathBuf>,
    /// Synset file for the synonym target.
    #[arg(long, conflicts_with = "target")]
    synsets: Option<PathBuf>,
    /// Numeric synonym target (default 1.6).
    #[arg(long)]
    target: Option<f64>,
    #[arg(long)]
    confidence: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_low: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_high: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Label for the report; defaults to the replicas' dimensionality.
    #[arg(long)]
    dimensionality: Option<usize>,
    /// Read crossings off the grid only, without closed-form refinement.
    #[arg(long)]
    grid_only: bool,
    /// Threshold report CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Aggregated curve CSV.
    #[arg(long)]
    curve_out: Option<PathBuf>,
    /// Directory for per-term curve CSVs.
    #[arg(long)]
    curves_dir: Option<PathBuf>,
    /// Per-pair fitted distributions CSV.
    #[arg(long)]
    pairs_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SynonymStatsArgs {
    #[arg(long)]
    synsets: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct IndexArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// jsonl or trec.
    #[arg(long)]
    corpus_format: Option<String>,
    /// Stopword file replacing the built-in list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    no_stem: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SearchArgs {
    #[arg(long)]
    index: Option<PathBuf>,
    /// Tab-separated `topic_id<TAB>query` lines.
    #[arg(long)]
    topics: Option<PathBuf>,
    /// none, threshold:<value> or knn:<k>.
    #[arg(long)]
    policy: Option<String>,
    /// Embedding for expansion (required unless the policy is none).
    #[arg(long)]
    embedding: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    run_tag: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// Keep unjudged documents (condensed lists are the default).
    #[arg(long)]
    no_condense: bool,
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    run: Option<PathBuf>,
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CompareArgs {
    #[arg(long)]
    run_a: Option<PathBuf>,
    #[arg(long)]
    run_b: Option<PathBuf>,
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = settings::Settings::load(cli.config.as_deref()).and_then(|s| match cli.command {
        Command::Uncertainty(a) => commands::uncertainty(&s, a),
        Command::Histogram(a) => commands::histogram(&s, a),
        Command::Neighbors(a) => commands::neighbors(&s, a),
        Command::Threshold(a) => commands::threshold(&s, a),
        Command::SynonymStats(a) => commands::synonym_stats(&s, a),
        Command::Index(a) => commands::index(&s, a),
        Command::Search(a) => commands::search(&s, a),
        Command::Evaluate(a) => commands::evaluate(&s, a),
        Command::Compare(a) => commands::compare(&s, a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
