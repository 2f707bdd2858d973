use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextError {
    #[error("word {0:?} contains no letters")]
    NoLetters(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("readability is undefined for {words} words in {sentences} sentences")]
    Undefined { words: usize, sentences: usize },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: missing required column {column:?}")]
    MissingColumn { path: PathBuf, column: &'static str },
    #[error("{path}:{line}: malformed record: {message}")]
    Malformed { path: PathBuf, line: u64, message: String },
    #[error("{path}:{line}: duplicate report id {id:?}")]
    DuplicateId { path: PathBuf, line: u64, id: String },
    #[error("{path}:{line}: empty report id")]
    EmptyId { path: PathBuf, line: u64 },
}

#[derive(Debug, Error)]
pub enum SimplifyError {
    #[error("report {0:?} has empty text")]
    EmptyReport(String),
    #[error("backend unavailable for report {report_id:?} after {attempts} attempts: {message}")]
    BackendUnavailable { report_id: String, attempts: u32, message: String },
    #[error("backend rejected report {report_id:?}: {message}")]
    Rejected { report_id: String, message: String },
    #[error("backend returned an empty generation for report {report_id:?} after {attempts} attempts")]
    EmptyGeneration { report_id: String, attempts: u32 },
    #[error("{path}:{line}: corrupt pairs record: {message}")]
    CorruptOutput { path: PathBuf, line: u64, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid backend configuration: {0}")]
    Config(String),
}

/// Outcome of one backend call that produced no usable text.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    /// Rate limiting, server errors and transport failures; worth retrying.
    #[error("transient backend failure: {0}")]
    Transient(String),
    #[error("{0}")]
    Fatal(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample {0:?} is empty")]
    EmptySample(String),
    #[error("sample {label:?} needs at least {needed} values, got {got}")]
    Undersized { label: String, needed: usize, got: usize },
    #[error("sample {0:?} contains a non-finite value")]
    NonFinite(String),
    #[error("rating vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("rating vectors are empty")]
    NoRatings,
    #[error("rating at position {0} is not one of the declared categories")]
    UnknownCategory(usize),
    #[error("regression needs both groups present")]
    SingleGroup,
    #[error("exact enumeration is limited to {cap} observations, got {n}")]
    ExactCapExceeded { n: usize, cap: usize },
}

#[derive(Debug, Error)]
pub enum GradingError {
    #[error("a study needs at least one pair")]
    EmptyPairs,
    #[error("a study needs at least one grader token")]
    NoGraders,
    #[error("grader token listed more than once")]
    DuplicateToken,
    #[error("unknown study {0:?}")]
    UnknownStudy(String),
    #[error("unknown grader token")]
    UnknownToken,
    #[error("unknown item {0:?}")]
    UnknownItem(String),
    #[error("score {0} is outside 0..=2")]
    ScoreOutOfRange(i64),
    #[error("item {item_id:?} already scored by this grader (event #{prior_sequence})")]
    DuplicateScore { item_id: String, prior_sequence: u64 },
    #[error("study {0:?} is still open; results stay blinded until every score is in")]
    BlindingViolation(String),
    #[error("event log {path}:{line}: {message}")]
    CorruptLog { path: PathBuf, line: u64, message: String },
    #[error("event log {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("report {report_id:?} ({arm} text): {source}")]
    Metric {
        report_id: String,
        arm: &'static str,
        #[source]
        source: MetricError,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("score table is inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Grading(#[from] GradingError),
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("analysis bundle lacks {section} needed for {figure}")]
    MissingSection { figure: &'static str, section: &'static str },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("histogram of an empty sample")]
    EmptyHistogram,
    #[error("invalid histogram bins: {0}")]
    InvalidBins(String),
    #[error("data file round-trip failed: {0}")]
    Encode(String),
}
