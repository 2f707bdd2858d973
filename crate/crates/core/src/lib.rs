//! Patient-friendly radiology report toolkit.
//!
//! The pipeline filters a report corpus, rewrites each report through a
//! pluggable simplifier backend, scores both texts for readability, runs blind
//! human grading studies and compares the two arms statistically.

pub mod analysis;
pub mod error;
pub mod fixtures;
pub mod grading;
pub mod ingest;
pub mod readability;
pub mod report;
pub mod simplify;
pub mod stats;
pub mod textseg;

pub use error::{AnalysisError, BackendError, GradingError, IngestError, MetricError, ReportError, SimplifyError, StatsError, TextError};
