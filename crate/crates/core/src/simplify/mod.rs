//! Generation of patient-friendly summaries.
//!
//! A [`Simplifier`] wraps a [`Backend`] with the fixed prompt, retry policy and
//! rate cap. [`batch_simplify`] drives it over a corpus and appends one
//! [`SimplifiedPair`] per line to a jsonl file, in corpus order, so a partial
//! file is always a prefix of the complete one and can be resumed.

mod backend;
mod mock;

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use chrono::{DateTime, Utc};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use backend::{
    Backend, BackendConfig, BackendKind, GenerationRequest, HttpBackend, MockBackend, RateLimiter, ENV_API_KEY, ENV_API_URL,
    ENV_MODEL, MOCK_MODEL_ID,
};
pub use mock::{mock_simplify, split_long_sentences, substitute_glossary, GLOSSARY, MAX_SENTENCE_WORDS, MOCK_PREFIX};

use crate::error::{BackendError, SimplifyError};
use crate::ingest::Report;

pub const PROMPT_INSTRUCTION: &str =
    "Generate a paragraph summarizing the radiology report text at a 6th-grade level and in a patient-friendly manner.";

/// Instruction followed by a blank line and the report text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub instruction: &'static str,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self { instruction: PROMPT_INSTRUCTION }
    }
}

impl PromptTemplate {
    pub fn render(&self, report_text: &str) -> String {
        format!("{}\n\n{}", self.instruction, report_text)
    }
}

pub fn build_prompt(report: &Report) -> Result<String, SimplifyError> {
    if report.text.trim().is_empty() {
        return Err(SimplifyError::EmptyReport(report.id.clone()));
    }
    Ok(PromptTemplate::default().render(&report.text))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplifiedPair {
    pub report_id: String,
    pub original_text: String,
    pub generated_text: String,
    pub backend_id: String,
    pub model_id: String,
    pub created_at: DateTime<Utc>,
    pub attempt_count: u32,
}

/// A backend plus retry policy, pacing and timestamp source.
pub struct Simplifier<'b> {
    backend: &'b dyn Backend,
    max_retries: u32,
    backoff_base: Duration,
    limiter: RateLimiter,
    concurrency: usize,
    fixed_time: Option<DateTime<Utc>>,
}

impl<'b> Simplifier<'b> {
    pub fn new(backend: &'b dyn Backend, config: &BackendConfig) -> Result<Self, SimplifyError> {
        config.validate()?;
        Ok(Self {
            backend,
            max_retries: config.max_retries,
            backoff_base: Duration::from_secs_f64(config.retry_backoff_secs),
            limiter: RateLimiter::per_minute(config.requests_per_minute),
            concurrency: config.concurrency,
            fixed_time: None,
        })
    }

    /// Stamps every pair with `at` instead of the wall clock.
    pub fn with_fixed_time(mut self, at: DateTime<Utc>) -> Self {
        self.fixed_time = Some(at);
        self
    }

    fn backoff(&self, failures: u32) -> Duration {
        let exp = self.backoff_base.mul_f64(2f64.powi(failures.saturating_sub(1).min(16) as i32));
        exp.mul_f64(rand::thread_rng().gen_range(0.5..1.0))
    }

    /// Transient failures are retried up to `max_retries` times; an empty
    /// generation is retried once.
    pub fn simplify_one(&self, report: &Report) -> Result<SimplifiedPair, SimplifyError> {
        let prompt = build_prompt(report)?;
        let request = GenerationRequest { report_id: &report.id, prompt: &prompt, report_text: &report.text };
        let mut attempts = 0u32;
        let mut transient_failures = 0u32;
        let mut empty_seen = false;
        loop {
            self.limiter.acquire();
            attempts += 1;
            match self.backend.generate(&request) {
                Ok(text) if !text.trim().is_empty() => {
                    return Ok(SimplifiedPair {
                        report_id: report.id.clone(),
                        original_text: report.text.clone(),
                        generated_text: text,
                        backend_id: self.backend.backend_id().to_string(),
                        model_id: self.backend.model_id().to_string(),
                        created_at: self.fixed_time.unwrap_or_else(Utc::now),
                        attempt_count: attempts,
                    });
                }
                Ok(_) if empty_seen => {
                    return Err(SimplifyError::EmptyGeneration { report_id: report.id.clone(), attempts });
                }
                Ok(_) => {
                    tracing::warn!(report_id = %report.id, "empty generation, retrying once");
                    empty_seen = true;
                }
                Err(BackendError::Transient(message)) => {
                    transient_failures += 1;
                    if transient_failures > self.max_retries {
                        return Err(SimplifyError::BackendUnavailable { report_id: report.id.clone(), attempts, message });
                    }
                    let wait = self.backoff(transient_failures);
                    tracing::warn!(report_id = %report.id, attempt = attempts, ?wait, %message, "retrying");
                    std::thread::sleep(wait);
                }
                Err(BackendError::Fatal(message)) => {
                    return Err(SimplifyError::Rejected { report_id: report.id.clone(), message });
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchFailure {
    pub report_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub succeeded: usize,
    pub failed: usize,
    pub skipped: usize,
    pub failures: Vec<BatchFailure>,
}

/// Reads a pairs file, failing on the first line that does not parse.
pub fn read_pairs(path: &Path) -> Result<Vec<SimplifiedPair>, SimplifyError> {
    let io = |source| SimplifyError::Io { path: path.to_path_buf(), source };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let pair = serde_json::from_str(&line).map_err(|e| SimplifyError::CorruptOutput {
            path: path.to_path_buf(),
            line: i as u64 + 1,
            message: e.to_string(),
        })?;
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Simplifies every report not already in `output`, appending results in
/// corpus order. Individual failures are collected, never fatal.
///
/// Without `resume` the output file is truncated first.
pub fn batch_simplify(
    simplifier: &Simplifier<'_>,
    corpus: &[Report],
    output: &Path,
    resume: bool,
) -> Result<BatchSummary, SimplifyError> {
    let io = |source| SimplifyError::Io { path: output.to_path_buf(), source };

    let done: HashSet<String> = if resume && output.exists() {
        read_pairs(output)?.into_iter().map(|p| p.report_id).collect()
    } else {
        HashSet::new()
    };
    let mut file = OpenOptions::new()
        .create(true)
        .append(resume)
        .write(true)
        .truncate(!resume)
        .open(output)
        .map_err(io)?;

    let pending: Vec<&Report> = corpus.iter().filter(|r| !done.contains(&r.id)).collect();
    let mut summary = BatchSummary { skipped: corpus.len() - pending.len(), ..Default::default() };

    let next = AtomicUsize::new(0);
    let workers = simplifier.concurrency.min(pending.len()).max(1);
    let (tx, rx) = mpsc::channel();

    std::thread::scope(|scope| -> Result<(), SimplifyError> {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, pending) = (&next, &pending);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(report) = pending.get(i) else { break };
                if tx.send((i, simplifier.simplify_one(report))).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        // reorder buffer: results are written strictly in corpus order
        let mut buffered = BTreeMap::new();
        let mut write_pos = 0;
        for (i, result) in rx {
            buffered.insert(i, result);
            while let Some(result) = buffered.remove(&write_pos) {
                match result {
                    Ok(pair) => {
                        let mut line = serde_json::to_string(&pair).expect("pair serializes");
                        line.push('\n');
                        file.write_all(line.as_bytes()).map_err(io)?;
                        file.flush().map_err(io)?;
                        summary.succeeded += 1;
                    }
                    Err(e) => {
                        tracing::error!(report_id = %pending[write_pos].id, error = %e, "simplification failed");
                        summary.failures.push(BatchFailure { report_id: pending[write_pos].id.clone(), message: e.to_string() });
                        summary.failed += 1;
                    }
                }
                write_pos += 1;
            }
        }
        Ok(())
    })?;
    file.sync_all().map_err(io)?;
    Ok(summary)
}
