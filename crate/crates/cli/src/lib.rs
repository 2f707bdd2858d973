//! The `precise` command: ingest, simplify, score, analyze, serve, report.
//!
//! Exit codes: 0 on success, 1 when a stage fails on its data, 2 when the
//! command line itself is wrong.

mod commands;
pub mod server;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use precise_core::grading::RubricKind;
use precise_core::ingest::CorpusFormat;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }

    pub(crate) fn data(e: impl std::fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "precise", version, about = "Radiology report simplification and readability pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a report corpus and drop empty, too-short or malformed reports.
    Ingest(IngestArgs),
    /// Rewrite each report in plain language.
    Simplify(SimplifyArgs),
    /// Compute readability scores for both texts of every pair.
    Score(ScoreArgs),
    /// Summarize scores and run the significance tests.
    Analyze(AnalyzeArgs),
    /// Run the blinded grading service.
    Serve(ServeArgs),
    /// Write figure data, svg renderings and a digest manifest.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => CorpusFormat::Csv,
            FormatArg::Jsonl => CorpusFormat::Jsonl,
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to the input file's extension.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_words: u64,
    /// Kept reports, one JSON object per line.
    #[arg(long)]
    pub out: PathBuf,
    /// Rejected report ids and reasons, one JSON object per line.
    #[arg(long)]
    pub rejects: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Http,
    Mock,
}

#[derive(Debug, Args)]
pub struct SimplifyArgs {
    /// Reports as written by `ingest` (jsonl) or an id,text csv.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, value_enum, default_value = "mock")]
    pub backend: BackendArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Keep pairs already in the output file and only process the rest.
    #[arg(long)]
    pub resume: bool,
    /// Requests per minute; 0 disables pacing.
    #[arg(long)]
    pub rpm: Option<f64>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long)]
    pub concurrency: Option<usize>,
    #[arg(long)]
    pub timeout_secs: Option<f64>,
    /// Chat-completions endpoint; falls back to PRECISE_API_URL.
    #[arg(long, env = "PRECISE_API_URL")]
    pub endpoint: Option<String>,
    #[arg(long, env = "PRECISE_MODEL")]
    pub model: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub scores: PathBuf,
    /// Grading event log; complete studies are added to the bundle.
    #[arg(long)]
    pub grading_events: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RubricArg {
    Reliability,
    Understandability,
}

impl From<RubricArg> for RubricKind {
    fn from(r: RubricArg) -> Self {
        match r {
            RubricArg::Reliability => RubricKind::Reliability,
            RubricArg::Understandability => RubricKind::Understandability,
        }
    }
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("grader_source").args(["graders", "tokens"]))]
pub struct ServeArgs {
    /// Pairs for a study to create, or resume, at startup.
    #[arg(long, requires_all = ["rubric", "grader_source"])]
    pub pairs: Option<PathBuf>,
    #[arg(long, value_enum, requires = "pairs")]
    pub rubric: Option<RubricArg>,
    /// Generate this many grader tokens and print them.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub graders: Option<u64>,
    /// Comma-separated grader tokens.
    #[arg(long, value_delimiter = ',')]
    pub tokens: Option<Vec<String>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Give each grader an independent presentation order.
    #[arg(long)]
    pub per_grader_order: bool,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "grading-events.jsonl")]
    pub log: PathBuf,
    /// Directory served at `/`, e.g. the grader web client.
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,
    /// Lets a coordinator view results of an open study.
    #[arg(long, env = "PRECISE_REVEAL_KEY", hide_env_values = true)]
    pub reveal_key: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub analysis: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// `auto` renders every figure the bundle supports; otherwise a
    /// comma-separated list such as `fig6,fig7`.
    #[arg(long, default_value = "auto")]
    pub figures: String,
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Simplify(a) => commands::simplify(a),
        Command::Score(a) => commands::score(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Serve(a) => server::serve(a),
        Command::Report(a) => commands::report(a),
    }
}
