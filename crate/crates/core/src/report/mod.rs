//! Figure data files, their svg renderings, and a digest manifest.
//!
//! Each figure is written as a data file first; the file is then read back
//! and the svg is drawn from the parsed copy alone, so every number in a
//! graphic can be traced to its data file.

mod figures;
mod histogram;
mod svg;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::AnalysisBundle;
use crate::error::ReportError;
use crate::grading::{RubricKind, StudyResults};

pub use figures::{
    histogram_rows, histogram_specs, neg_log10, p_label, pvalue_rows, reliability_figure, render_histograms,
    render_pvalues, render_reliability, render_understandability, understandability_figure, GraderBar, GridLine,
    HistogramRow, KappaCell, PValueRow, PairAgreement, ReliabilityFigure, Segment, UnderstandabilityFigure,
    HISTOGRAM_BINS, NEG_LOG10_CAP, RAMP_HIGH, RAMP_LOW,
};
pub use histogram::{equal_width_edges, histogram, Bins, Histogram, HistogramSpec};
pub use svg::text_nodes;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig6, Figure::Fig7, Figure::Fig8, Figure::Fig9];

    pub fn id(self) -> &'static str {
        match self {
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
        }
    }

    pub fn data_file(self) -> &'static str {
        match self {
            Figure::Fig6 => "fig6_histograms.csv",
            Figure::Fig7 => "fig7_pvalues.csv",
            Figure::Fig8 => "fig8_reliability.json",
            Figure::Fig9 => "fig9_understandability.json",
        }
    }

    pub fn svg_file(self) -> &'static str {
        match self {
            Figure::Fig6 => "fig6_histograms.svg",
            Figure::Fig7 => "fig7_pvalues.svg",
            Figure::Fig8 => "fig8_reliability.svg",
            Figure::Fig9 => "fig9_understandability.svg",
        }
    }

    fn required_study(self) -> Option<(RubricKind, &'static str)> {
        match self {
            Figure::Fig8 => Some((RubricKind::Reliability, "grading.reliability")),
            Figure::Fig9 => Some((RubricKind::Understandability, "grading.understandability")),
            _ => None,
        }
    }

    /// Whether `bundle` has every section this figure draws from.
    pub fn check(self, bundle: &AnalysisBundle) -> Result<(), ReportError> {
        match self.required_study() {
            Some((kind, section)) if study_for(bundle, kind).is_none() => {
                Err(ReportError::MissingSection { figure: self.id(), section })
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Figure::ALL.into_iter().find(|f| f.id() == s).ok_or_else(|| format!("unknown figure {s:?} (expected fig6..fig9)"))
    }
}

/// Figures whose sections are all present in `bundle`.
pub fn available_figures(bundle: &AnalysisBundle) -> Vec<Figure> {
    Figure::ALL.into_iter().filter(|f| f.check(bundle).is_ok()).collect()
}

/// The first complete study of the given rubric.
fn study_for(bundle: &AnalysisBundle, kind: RubricKind) -> Option<&StudyResults> {
    bundle.grading.as_ref()?.studies.iter().find(|s| s.rubric.kind == kind)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Every written file except the manifest itself, sorted by path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, ReportError> {
        let bytes = std::fs::read(path).map_err(|source| ReportError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_slice(&bytes).map_err(|e| ReportError::Encode(format!("{}: {e}", path.display())))
    }

    pub fn sha256_of(&self, path: &str) -> Option<&str> {
        self.files.iter().find(|e| e.path == path).map(|e| e.sha256.as_str())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<ManifestEntry>,
}

impl Writer<'_> {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), ReportError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|source| ReportError::Io { path, source })?;
        self.files.push(ManifestEntry { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    fn read_back(&self, name: &str) -> Result<Vec<u8>, ReportError> {
        let path = self.dir.join(name);
        std::fs::read(&path).map_err(|source| ReportError::Io { path, source })
    }
}

fn encode_err(e: impl fmt::Display) -> ReportError {
    ReportError::Encode(e.to_string())
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(encode_err)?;
    }
    w.into_inner().map_err(encode_err)
}

fn csv_rows<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<Vec<T>, ReportError> {
    csv::Reader::from_reader(bytes).deserialize().collect::<Result<_, _>>().map_err(encode_err)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, ReportError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(encode_err)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes the requested figures plus `manifest.json` into `out_dir`.
/// Every figure is checked against the bundle before anything is written.
pub fn render_outputs(bundle: &AnalysisBundle, out_dir: &Path, figures: &[Figure]) -> Result<Manifest, ReportError> {
    let figures: BTreeSet<Figure> = figures.iter().copied().collect();
    for f in &figures {
        f.check(bundle)?;
    }
    std::fs::create_dir_all(out_dir).map_err(|source| ReportError::Io { path: out_dir.to_path_buf(), source })?;
    let mut w = Writer { dir: out_dir, files: Vec::new() };

    for &fig in &figures {
        let svg = match fig {
            Figure::Fig6 => {
                let bytes = csv_bytes(&histogram_rows(&histogram_specs(bundle, HISTOGRAM_BINS)?))?;
                w.put(fig.data_file(), &bytes)?;
                let rows: Vec<HistogramRow> = csv_rows(&w.read_back(fig.data_file())?)?;
                render_histograms(&rows)
            }
            Figure::Fig7 => {
                let bytes = csv_bytes(&pvalue_rows(bundle))?;
                w.put(fig.data_file(), &bytes)?;
                let rows: Vec<PValueRow> = csv_rows(&w.read_back(fig.data_file())?)?;
                render_pvalues(&rows)
            }
            Figure::Fig8 => {
                let study = study_for(bundle, RubricKind::Reliability).expect("checked above");
                let bytes = json_bytes(&reliability_figure(study))?;
                w.put(fig.data_file(), &bytes)?;
                let parsed: ReliabilityFigure = serde_json::from_slice(&w.read_back(fig.data_file())?).map_err(encode_err)?;
                render_reliability(&parsed)
            }
            Figure::Fig9 => {
                let study = study_for(bundle, RubricKind::Understandability).expect("checked above");
                let bytes = json_bytes(&understandability_figure(study))?;
                w.put(fig.data_file(), &bytes)?;
                let parsed: UnderstandabilityFigure =
                    serde_json::from_slice(&w.read_back(fig.data_file())?).map_err(encode_err)?;
                render_understandability(&parsed)
            }
        };
        w.put(fig.svg_file(), svg.as_bytes())?;
    }

    w.files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest { files: w.files };
    let path = out_dir.join(MANIFEST_FILE);
    std::fs::write(&path, json_bytes(&manifest)?).map_err(|source| ReportError::Io { path, source })?;
    Ok(manifest)
}

/// Every cell of a csv file or every scalar leaf of a json file, as text.
pub fn data_tokens(file_name: &str, bytes: &[u8]) -> Result<BTreeSet<String>, ReportError> {
    let mut out = BTreeSet::new();
    if file_name.ends_with(".csv") {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
        for rec in r.records() {
            out.extend(rec.map_err(encode_err)?.iter().map(str::to_string));
        }
    } else {
        let value: serde_json::Value = serde_json::from_slice(bytes).map_err(encode_err)?;
        collect_leaves(&value, &mut out);
    }
    Ok(out)
}

fn collect_leaves(v: &serde_json::Value, out: &mut BTreeSet<String>) {
    use serde_json::Value;
    match v {
        Value::Null => {}
        Value::Bool(b) => {
            out.insert(b.to_string());
        }
        Value::Number(n) => {
            out.insert(n.to_string());
        }
        Value::String(s) => {
            out.insert(s.clone());
        }
        Value::Array(items) => items.iter().for_each(|i| collect_leaves(i, out)),
        Value::Object(map) => map.values().for_each(|i| collect_leaves(i, out)),
    }
}

/// Svg text nodes that contain a digit yet match no field of the data file.
pub fn untraced_numbers(data_file: &str, data: &[u8], svg: &str) -> Result<Vec<String>, ReportError> {
    let tokens = data_tokens(data_file, data)?;
    Ok(text_nodes(svg)
        .into_iter()
        .filter(|t| t.chars().any(|c| c.is_ascii_digit()) && !tokens.contains(t))
        .collect())
}
