//! Regenerates the checked-in fixture corpus.
//!
//! Usage: `cargo run -p precise-core --example gen_fixtures -- <out-dir>`

use std::path::PathBuf;

use chrono::DateTime;
use precise_core::fixtures::{planted_filter_corpus, synthetic_corpus, CORPUS_SEED, CORPUS_SIZE, FIXTURE_TIME};
use precise_core::ingest::write_reports_csv;
use precise_core::simplify::{batch_simplify, BackendConfig, MockBackend, Simplifier};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&out)?;

    let corpus = synthetic_corpus(CORPUS_SEED, CORPUS_SIZE);
    write_reports_csv(&out.join("reports.csv"), &corpus)?;

    let (planted, expected) = planted_filter_corpus(CORPUS_SEED);
    write_reports_csv(&out.join("reports_planted.csv"), &planted)?;
    let expected: Vec<_> = expected.into_iter().map(|(id, reason)| serde_json::json!({"id": id, "reason": reason})).collect();
    std::fs::write(out.join("planted_expected.json"), serde_json::to_string_pretty(&expected)? + "\n")?;

    let at = DateTime::from_timestamp(FIXTURE_TIME, 0).expect("valid timestamp");
    let simplifier = Simplifier::new(&MockBackend, &BackendConfig::mock())?.with_fixed_time(at);
    let summary = batch_simplify(&simplifier, &corpus, &out.join("pairs.jsonl"), false)?;
    eprintln!("wrote {} reports and {} pairs to {}", corpus.len(), summary.succeeded, out.display());
    Ok(())
}
