//! Report corpus loading and inclusion/exclusion filtering.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::IngestError;
use crate::textseg::{is_digit, is_letter, tokenize_words};

/// One source radiology report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub text: String,
    /// File and record locator the report came from.
    #[serde(default)]
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorpusFormat {
    Csv,
    Jsonl,
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(CorpusFormat::Csv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(format!("unknown corpus format {other:?} (expected csv or jsonl)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RejectReason {
    Empty,
    TooShort,
    InvalidChars,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub report: Report,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterOutcome {
    pub kept: Vec<Report>,
    pub rejected: Vec<Rejection>,
}

/// Characters a report may contain and still be kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharWhitelist {
    pub letters: bool,
    pub digits: bool,
    pub whitespace: bool,
    pub extra: BTreeSet<char>,
}

impl Default for CharWhitelist {
    fn default() -> Self {
        Self {
            letters: true,
            digits: true,
            whitespace: true,
            extra: ".,;:?!'\"()/%-+".chars().collect(),
        }
    }
}

impl CharWhitelist {
    pub fn allows(&self, c: char) -> bool {
        (self.letters && is_letter(c))
            || (self.digits && is_digit(c))
            || (self.whitespace && c.is_whitespace())
            || self.extra.contains(&c)
    }
}

#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub min_words: usize,
    pub whitelist: CharWhitelist,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { min_words: 5, whitelist: CharWhitelist::default() }
    }
}

pub fn load_reports(path: &Path, format: CorpusFormat) -> Result<Vec<Report>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    let records = match format {
        CorpusFormat::Csv => read_csv(path, file)?,
        CorpusFormat::Jsonl => read_jsonl(path, file)?,
    };

    let mut seen = HashSet::new();
    let mut reports = Vec::with_capacity(records.len());
    for (line, id, text) in records {
        if id.is_empty() {
            return Err(IngestError::EmptyId { path: path.to_path_buf(), line });
        }
        if !seen.insert(id.clone()) {
            return Err(IngestError::DuplicateId { path: path.to_path_buf(), line, id });
        }
        let source = format!("{}:{}", path.display(), line);
        reports.push(Report { id, text, source });
    }
    Ok(reports)
}

fn read_csv(path: &Path, file: File) -> Result<Vec<(u64, String, String)>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let malformed = |line: u64, message: String| IngestError::Malformed { path: path.to_path_buf(), line, message };

    let headers = reader.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
    let column = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or(IngestError::MissingColumn { path: path.to_path_buf(), column: name })
    };
    let id_col = column("id")?;
    let text_col = column("text")?;

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).ok_or_else(|| malformed(line, format!("missing field {i}")));
        out.push((line, field(id_col)?.trim().to_string(), field(text_col)?.to_string()));
    }
    Ok(out)
}

#[derive(Deserialize)]
struct JsonRecord {
    id: serde_json::Value,
    text: String,
}

fn read_jsonl(path: &Path, file: File) -> Result<Vec<(u64, String, String)>, IngestError> {
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line.map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonRecord = serde_json::from_str(&line).map_err(|e| IngestError::Malformed {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        let id = match record.id {
            serde_json::Value::String(s) => s.trim().to_string(),
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(IngestError::Malformed {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("id must be a string or number, got {other}"),
                })
            }
        };
        out.push((line_no, id, record.text));
    }
    Ok(out)
}

/// Returns the first failing criterion, checked in the order empty, invalid
/// characters, too short.
pub fn classify(report: &Report, config: &FilterConfig) -> Option<RejectReason> {
    if report.text.trim().is_empty() {
        return Some(RejectReason::Empty);
    }
    if !report.text.chars().all(|c| config.whitelist.allows(c)) {
        return Some(RejectReason::InvalidChars);
    }
    if tokenize_words(&report.text).len() < config.min_words {
        return Some(RejectReason::TooShort);
    }
    None
}

pub fn filter_reports(reports: Vec<Report>, config: &FilterConfig) -> FilterOutcome {
    assert!(config.min_words >= 1, "min_words must be at least 1");
    let mut outcome = FilterOutcome::default();
    for report in reports {
        match classify(&report, config) {
            None => outcome.kept.push(report),
            Some(reason) => outcome.rejected.push(Rejection { report, reason }),
        }
    }
    outcome
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Writes an `id,text` CSV that [`load_reports`] reads back unchanged.
pub fn write_reports_csv(path: &Path, reports: &[Report]) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["id", "text"])?;
    for r in reports {
        writer.write_record([&r.id, &r.text])?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RejectRecord<'a> {
    id: &'a str,
    reason: RejectReason,
}

/// Rejection sidecar: `{id, reason}` per line.
pub fn write_rejections(path: &Path, rejected: &[Rejection]) -> std::io::Result<()> {
    write_jsonl(path, rejected.iter().map(|r| RejectRecord { id: &r.report.id, reason: r.reason }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn report(id: &str, text: &str) -> Report {
        Report { id: id.into(), text: text.into(), source: String::new() }
    }

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn csv_preserves_order_and_quoting() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "r.csv", "id,text\nb,\"Lungs clear, no effusion.\"\na,Heart normal.\nc,\"Multi\nline\"\n");
        let reports = load_reports(&path, CorpusFormat::Csv).unwrap();
        let ids: Vec<_> = reports.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["b", "a", "c"]);
        assert_eq!(reports[0].text, "Lungs clear, no effusion.");
        assert_eq!(reports[2].text, "Multi\nline");
        assert!(reports[1].source.ends_with(":3"));
    }

    #[test]
    fn csv_missing_text_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "r.csv", "id,body\n1,hello\n");
        assert!(matches!(
            load_reports(&path, CorpusFormat::Csv),
            Err(IngestError::MissingColumn { column: "text", .. })
        ));
    }

    #[test]
    fn jsonl_duplicate_id_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "r.jsonl", "{\"id\":\"x1\",\"text\":\"a\"}\n{\"id\":\"x2\",\"text\":\"b\"}\n{\"id\":\"x1\",\"text\":\"c\"}\n");
        match load_reports(&path, CorpusFormat::Jsonl) {
            Err(IngestError::DuplicateId { id, line, .. }) => {
                assert_eq!(id, "x1");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jsonl_malformed_line_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "r.jsonl", "{\"id\":1,\"text\":\"a\"}\n\n{\"id\":2,\"text\":\n");
        match load_reports(&path, CorpusFormat::Jsonl) {
            Err(IngestError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_reports(Path::new("/nonexistent/corpus.csv"), CorpusFormat::Csv),
            Err(IngestError::Io { .. })
        ));
    }

    #[test]
    fn filter_examples() {
        let config = FilterConfig::default();
        assert_eq!(classify(&report("1", ""), &config), Some(RejectReason::Empty));
        assert_eq!(classify(&report("2", "  \n\t"), &config), Some(RejectReason::Empty));
        assert_eq!(classify(&report("3", "Normal chest."), &config), Some(RejectReason::TooShort));
        assert_eq!(
            classify(&report("4", "The lungs are clear \u{7} bilaterally today."), &config),
            Some(RejectReason::InvalidChars)
        );
        let clean = "The heart size is normal. The lungs are clear without focal consolidation, \
                     effusion, or pneumothorax. No acute bony abnormality is seen today.";
        assert!(tokenize_words(clean).len() >= 20);
        assert_eq!(classify(&report("5", clean), &config), None);
    }

    #[test]
    fn invalid_chars_checked_before_length() {
        let config = FilterConfig::default();
        assert_eq!(classify(&report("1", "XXXX #"), &config), Some(RejectReason::InvalidChars));
        assert_eq!(classify(&report("2", "Lungs: 45% clear (left/right) +/- 2."), &config), None);
    }

    #[test]
    fn whitelist_is_configurable() {
        let mut config = FilterConfig::default();
        let r = report("1", "Heart size is #1 normal today.");
        assert_eq!(classify(&r, &config), Some(RejectReason::InvalidChars));
        config.whitelist.extra.insert('#');
        assert_eq!(classify(&r, &config), None);
        config.min_words = 10;
        assert_eq!(classify(&r, &config), Some(RejectReason::TooShort));
    }

    #[test]
    fn partition() {
        let reports = vec![report("a", ""), report("b", "one two three four five"), report("c", "one")];
        let out = filter_reports(reports, &FilterConfig::default());
        assert_eq!(out.kept.len() + out.rejected.len(), 3);
        assert_eq!(out.kept[0].id, "b");
    }
}
