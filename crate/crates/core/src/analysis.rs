//! Score tables and the analysis bundle.
//!
//! `scores.csv` holds one row per (report, arm). The analysis bundle is the
//! single interchange format consumed by figure rendering.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::grading::{Arm, StudyResults};
use crate::readability::score_text;
use crate::simplify::SimplifiedPair;
use crate::stats::{descriptive, pvalue_matrix, Descriptive, MetricSamples, PValueMatrix, Sample, METRICS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub report_id: String,
    pub arm: Arm,
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    pub complex_words: usize,
    pub characters: usize,
    pub fre: f64,
    pub gfi: f64,
    pub ari: f64,
    pub fre_school_level: String,
    pub fre_difficulty: String,
    pub fre_out_of_range: bool,
    pub gfi_grade: i64,
    pub gfi_label: String,
    pub gfi_clamped: bool,
    pub ari_grade: i64,
    pub ari_label: String,
    pub ari_age: String,
    pub ari_clamped: bool,
}

fn score_row(report_id: &str, arm: Arm, text: &str) -> Result<ScoreRow, AnalysisError> {
    let arm_name = match arm {
        Arm::Original => "original",
        Arm::Generated => "generated",
    };
    let s = score_text(text).map_err(|source| AnalysisError::Metric { report_id: report_id.to_string(), arm: arm_name, source })?;
    Ok(ScoreRow {
        report_id: report_id.to_string(),
        arm,
        words: s.stats.words,
        sentences: s.stats.sentences,
        syllables: s.stats.syllables,
        complex_words: s.stats.complex_words,
        characters: s.stats.characters,
        fre: s.fre,
        gfi: s.gfi,
        ari: s.ari,
        fre_school_level: s.fre_band.school_level,
        fre_difficulty: s.fre_band.difficulty,
        fre_out_of_range: s.fre_band.out_of_range,
        gfi_grade: s.gfi_grade.index,
        gfi_label: s.gfi_grade.label,
        gfi_clamped: s.gfi_grade.clamped,
        ari_grade: s.ari_grade.index,
        ari_label: s.ari_grade.label,
        ari_age: s.ari_grade.age,
        ari_clamped: s.ari_grade.clamped,
    })
}

/// Two rows per pair, original first.
pub fn score_pairs(pairs: &[SimplifiedPair]) -> Result<Vec<ScoreRow>, AnalysisError> {
    let mut rows = Vec::with_capacity(pairs.len() * 2);
    for p in pairs {
        rows.push(score_row(&p.report_id, Arm::Original, &p.original_text)?);
        rows.push(score_row(&p.report_id, Arm::Generated, &p.generated_text)?);
    }
    Ok(rows)
}

pub fn write_scores_csv(path: &Path, rows: &[ScoreRow]) -> Result<(), AnalysisError> {
    let csv_err = |e: csv::Error| AnalysisError::Csv { path: path.to_path_buf(), message: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| AnalysisError::Io { path: path.to_path_buf(), source })
}

pub fn read_scores_csv(path: &Path) -> Result<Vec<ScoreRow>, AnalysisError> {
    let csv_err = |e: csv::Error| AnalysisError::Csv { path: path.to_path_buf(), message: e.to_string() };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<Result<Vec<ScoreRow>, _>>().map_err(csv_err)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub original: Descriptive,
    pub generated: Descriptive,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ArmScores {
    pub fre: Vec<f64>,
    pub gfi: Vec<f64>,
    pub ari: Vec<f64>,
}

impl ArmScores {
    pub fn by_metric(&self, metric: &str) -> &[f64] {
        match metric {
            "FRE" => &self.fre,
            "GFI" => &self.gfi,
            _ => &self.ari,
        }
    }

    fn samples(&self, arm: &str) -> MetricSamples {
        let s = |m: &str, v: &[f64]| Sample::new(format!("{arm} {m}"), v.to_vec());
        MetricSamples { fre: s("FRE", &self.fre), gfi: s("GFI", &self.gfi), ari: s("ARI", &self.ari) }
    }
}

/// Raw score vectors, aligned by `report_ids`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawScores {
    pub report_ids: Vec<String>,
    pub original: ArmScores,
    pub generated: ArmScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradingSection {
    /// Complete studies only.
    pub studies: Vec<StudyResults>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisBundle {
    pub n_reports: usize,
    pub descriptives: Vec<MetricSummary>,
    pub pvalue_matrix: PValueMatrix,
    pub scores: RawScores,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<GradingSection>,
}

/// Builds the bundle. Every report must have exactly one row per arm.
pub fn analyze(rows: &[ScoreRow], grading: Option<GradingSection>) -> Result<AnalysisBundle, AnalysisError> {
    let mut ids: Vec<String> = Vec::new();
    let mut by_id: std::collections::HashMap<&str, [Option<&ScoreRow>; 2]> = std::collections::HashMap::new();
    for row in rows {
        let slot = by_id.entry(&row.report_id).or_insert_with(|| {
            ids.push(row.report_id.clone());
            [None, None]
        });
        let k = row.arm as usize;
        if slot[k].replace(row).is_some() {
            return Err(AnalysisError::Inconsistent(format!("report {:?} has two {:?} rows", row.report_id, row.arm)));
        }
    }
    if ids.is_empty() {
        return Err(AnalysisError::Inconsistent("no score rows".into()));
    }

    let mut original = ArmScores::default();
    let mut generated = ArmScores::default();
    for id in &ids {
        let [Some(o), Some(g)] = by_id[id.as_str()] else {
            return Err(AnalysisError::Inconsistent(format!("report {id:?} lacks one of its arms")));
        };
        for (arm, row) in [(&mut original, o), (&mut generated, g)] {
            arm.fre.push(row.fre);
            arm.gfi.push(row.gfi);
            arm.ari.push(row.ari);
        }
    }

    let (os, gs) = (original.samples("original"), generated.samples("generated"));
    let descriptives = METRICS
        .iter()
        .enumerate()
        .map(|(i, m)| {
            Ok(MetricSummary { metric: m.to_string(), original: descriptive(os.by_index(i))?, generated: descriptive(gs.by_index(i))? })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let matrix = pvalue_matrix(&os, &gs)?;

    Ok(AnalysisBundle {
        n_reports: ids.len(),
        descriptives,
        pvalue_matrix: matrix,
        scores: RawScores { report_ids: ids, original, generated },
        grading,
    })
}

pub fn write_bundle(path: &Path, bundle: &AnalysisBundle) -> Result<(), AnalysisError> {
    let mut json = serde_json::to_string_pretty(bundle).expect("bundle serializes");
    json.push('\n');
    std::fs::write(path, json).map_err(|source| AnalysisError::Io { path: path.to_path_buf(), source })
}

pub fn read_bundle(path: &Path) -> Result<AnalysisBundle, AnalysisError> {
    let bytes = std::fs::read(path).map_err(|source| AnalysisError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_slice(&bytes).map_err(|e| AnalysisError::Inconsistent(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::DateTime;

    fn pair(id: &str, original: &str, generated: &str) -> SimplifiedPair {
        SimplifiedPair {
            report_id: id.into(),
            original_text: original.into(),
            generated_text: generated.into(),
            backend_id: "mock".into(),
            model_id: "mock".into(),
            created_at: DateTime::from_timestamp(0, 0).unwrap(),
            attempt_count: 1,
        }
    }

    fn pairs() -> Vec<SimplifiedPair> {
        vec![
            pair("a", "Bibasilar atelectasis with cardiomegaly demonstrated.", "Your heart is big. Part of the lung is flat."),
            pair("b", "Moderate pulmonary edema is identified bilaterally.", "There is some fluid in both lungs."),
            pair("c", "No acute cardiopulmonary abnormality.", "Your heart and lungs look fine."),
        ]
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = score_pairs(&pairs()).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!((rows[0].arm, rows[1].arm), (Arm::Original, Arm::Generated));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        write_scores_csv(&path, &rows).unwrap();
        assert_eq!(read_scores_csv(&path).unwrap(), rows);
    }

    #[test]
    fn bundle_shape_and_round_trip() {
        let rows = score_pairs(&pairs()).unwrap();
        let bundle = analyze(&rows, None).unwrap();
        assert_eq!(bundle.n_reports, 3);
        assert_eq!(bundle.scores.report_ids, ["a", "b", "c"]);
        assert_eq!(bundle.pvalue_matrix.cells.len(), 3);
        assert_eq!(bundle.descriptives[0].original.n, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("analysis.json");
        write_bundle(&path, &bundle).unwrap();
        assert_eq!(read_bundle(&path).unwrap(), bundle);
    }

    #[test]
    fn missing_arm_is_rejected() {
        let rows = score_pairs(&pairs()).unwrap();
        assert!(matches!(analyze(&rows[..5], None), Err(AnalysisError::Inconsistent(_))));
        let mut dup = rows.clone();
        dup.push(rows[0].clone());
        assert!(matches!(analyze(&dup, None), Err(AnalysisError::Inconsistent(_))));
        assert!(matches!(analyze(&[], None), Err(AnalysisError::Inconsistent(_))));
    }

    #[test]
    fn unscoreable_text_names_report() {
        let err = score_pairs(&[pair("z", "Fine text here.", "...")]).unwrap_err();
        assert!(matches!(err, AnalysisError::Metric { ref report_id, arm: "generated", .. } if report_id == "z"));
    }
}
