//! The checked-in fixture files are exactly what the generators produce.

use std::path::PathBuf;

use chrono::DateTime;
use precise_core::fixtures::{planted_filter_corpus, synthetic_corpus, CORPUS_SEED, CORPUS_SIZE, FIXTURE_TIME};
use precise_core::ingest::{load_reports, write_reports_csv, CorpusFormat};
use precise_core::report::sha256_hex;
use precise_core::simplify::{batch_simplify, BackendConfig, MockBackend, Simplifier};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn read(path: &std::path::Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn digests_match_sums_file() {
    let sums = String::from_utf8(read(&fixture("SHA256SUMS"))).unwrap();
    let mut n = 0;
    for line in sums.lines() {
        let (digest, name) = line.split_once("  ").unwrap();
        assert_eq!(sha256_hex(&read(&fixture(name))), digest, "{name}");
        n += 1;
    }
    assert_eq!(n, 4);
}

#[test]
fn corpus_files_regenerate_identically() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic_corpus(CORPUS_SEED, CORPUS_SIZE);
    write_reports_csv(&dir.path().join("reports.csv"), &corpus).unwrap();
    assert_eq!(read(&dir.path().join("reports.csv")), read(&fixture("reports.csv")));

    let (planted, _) = planted_filter_corpus(CORPUS_SEED);
    write_reports_csv(&dir.path().join("planted.csv"), &planted).unwrap();
    assert_eq!(read(&dir.path().join("planted.csv")), read(&fixture("reports_planted.csv")));

    let loaded = load_reports(&fixture("reports.csv"), CorpusFormat::Csv).unwrap();
    assert_eq!(loaded.iter().map(|r| (&r.id, &r.text)).collect::<Vec<_>>(), corpus.iter().map(|r| (&r.id, &r.text)).collect::<Vec<_>>());
}

#[test]
fn mock_pairs_regenerate_identically() {
    let dir = tempfile::tempdir().unwrap();
    let at = DateTime::from_timestamp(FIXTURE_TIME, 0).unwrap();
    let simplifier = Simplifier::new(&MockBackend, &BackendConfig::mock()).unwrap().with_fixed_time(at);
    let corpus = synthetic_corpus(CORPUS_SEED, CORPUS_SIZE);
    let out = dir.path().join("pairs.jsonl");
    batch_simplify(&simplifier, &corpus, &out, false).unwrap();
    assert_eq!(read(&out), read(&fixture("pairs.jsonl")));
}
