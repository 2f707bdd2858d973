//! Flesch Reading Ease, Gunning Fog and Automated Readability Index.
//!
//! The formulas are the canonical published ones:
//!
//! * FRE = 206.835 − 1.015·(words/sentences) − 84.6·(syllables/words)
//! * GFI = 0.4·(words/sentences + 100·complex/words)
//! * ARI = 4.71·(characters/words) + 0.5·(words/sentences) − 21.43
//!
//! Raw scores are mapped onto US school grade bands. Out-of-range scores are
//! clamped into the nearest band and flagged rather than rejected.

use serde::{Deserialize, Serialize};

use crate::error::MetricError;
use crate::textseg::{text_stats, TokenStats};

/// One row of the reading-ease interpretation table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandRow {
    pub lower: f64,
    pub upper: f64,
    pub school_level: &'static str,
    pub difficulty: &'static str,
}

/// Reading-ease bands, easiest first. Intervals are `[lower, upper)` except
/// the top band, which is closed at 100.
pub const FRE_TABLE: [BandRow; 8] = [
    BandRow { lower: 90.0, upper: 100.0, school_level: "Fifth Grade", difficulty: "Easily understood by 11yo" },
    BandRow { lower: 80.0, upper: 90.0, school_level: "Sixth Grade", difficulty: "Easy and conversational" },
    BandRow { lower: 70.0, upper: 80.0, school_level: "Seventh Grade", difficulty: "Fairly easy" },
    BandRow { lower: 60.0, upper: 70.0, school_level: "Eighth/Ninth Grade", difficulty: "Plain english, easy for 13-15yo" },
    BandRow { lower: 50.0, upper: 60.0, school_level: "Tenth/Twelfth Grade", difficulty: "Fairly difficult" },
    BandRow { lower: 30.0, upper: 50.0, school_level: "College", difficulty: "Difficult" },
    BandRow { lower: 10.0, upper: 30.0, school_level: "College Graduate", difficulty: "Very difficult" },
    BandRow { lower: 0.0, upper: 10.0, school_level: "Professional", difficulty: "Extremely difficult" },
];

/// Fog index to reading level, indices 6 through 17.
pub const GFI_TABLE: [(i64, &str); 12] = [
    (17, "College Graduate"),
    (16, "College Senior"),
    (15, "College Junior"),
    (14, "College Sophomore"),
    (13, "College Freshman"),
    (12, "Twelfth Grade"),
    (11, "Eleventh Grade"),
    (10, "Tenth Grade"),
    (9, "Ninth Grade"),
    (8, "Eighth Grade"),
    (7, "Seventh Grade"),
    (6, "Sixth Grade"),
];

/// ARI score to (age range, grade level), scores 1 through 14.
pub const ARI_TABLE: [(i64, &str, &str); 14] = [
    (1, "5-6", "Kindergarten"),
    (2, "6-7", "First/Second Grade"),
    (3, "7-9", "Third Grade"),
    (4, "9-10", "Fourth Grade"),
    (5, "10-11", "Fifth Grade"),
    (6, "11-12", "Sixth Grade"),
    (7, "12-13", "Seventh Grade"),
    (8, "13-14", "Eighth Grade"),
    (9, "14-15", "Ninth Grade"),
    (10, "15-16", "Tenth Grade"),
    (11, "16-17", "Eleventh Grade"),
    (12, "17-18", "Twelfth Grade"),
    (13, "18-24", "College Student"),
    (14, "24+", "Professor"),
];

const GFI_MIN: i64 = 6;
const GFI_MAX: i64 = 17;
const ARI_MIN: i64 = 1;
const ARI_MAX: i64 = 14;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreBand {
    pub school_level: String,
    pub difficulty: String,
    /// Score fell outside [0, 100] and was clamped into an end band.
    pub out_of_range: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GfiGrade {
    pub index: i64,
    pub label: String,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AriGrade {
    pub index: i64,
    pub label: String,
    pub age: String,
    pub clamped: bool,
}

/// All three readability scores for one text, with their grade labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityScores {
    pub stats: TokenStats,
    pub fre: f64,
    pub gfi: f64,
    pub ari: f64,
    pub fre_band: FreBand,
    pub gfi_grade: GfiGrade,
    pub ari_grade: AriGrade,
}

fn ratios(stats: &TokenStats) -> Result<(f64, f64), MetricError> {
    if stats.words == 0 || stats.sentences == 0 {
        return Err(MetricError::Undefined { words: stats.words, sentences: stats.sentences });
    }
    let words = stats.words as f64;
    Ok((words / stats.sentences as f64, words))
}

pub fn flesch_reading_ease(stats: &TokenStats) -> Result<f64, MetricError> {
    let (words_per_sentence, words) = ratios(stats)?;
    Ok(206.835 - 1.015 * words_per_sentence - 84.6 * (stats.syllables as f64 / words))
}

pub fn gunning_fog(stats: &TokenStats) -> Result<f64, MetricError> {
    let (words_per_sentence, words) = ratios(stats)?;
    Ok(0.4 * (words_per_sentence + 100.0 * (stats.complex_words as f64 / words)))
}

pub fn ari(stats: &TokenStats) -> Result<f64, MetricError> {
    let (words_per_sentence, words) = ratios(stats)?;
    Ok(4.71 * (stats.characters as f64 / words) + 0.5 * words_per_sentence - 21.43)
}

/// Looks up the reading-ease band. Total over all reals; NaN lands in the
/// bottom band, flagged.
pub fn fre_band(score: f64) -> FreBand {
    let top = &FRE_TABLE[0];
    let bottom = &FRE_TABLE[FRE_TABLE.len() - 1];
    let (row, out_of_range) = if score > top.upper {
        (top, true)
    } else if score >= top.lower {
        (top, false)
    } else if let Some(row) = FRE_TABLE[1..].iter().find(|r| score >= r.lower && score < r.upper) {
        (row, false)
    } else {
        (bottom, true)
    };
    FreBand {
        school_level: row.school_level.to_string(),
        difficulty: row.difficulty.to_string(),
        out_of_range,
    }
}

fn clamp_index(value: i64, min: i64, max: i64) -> (i64, bool) {
    let clamped = value.clamp(min, max);
    (clamped, clamped != value)
}

fn to_index(value: f64) -> i64 {
    if value.is_nan() {
        i64::MIN
    } else {
        value as i64
    }
}

/// Rounds the fog index to the nearest integer and maps it through the table.
pub fn gfi_grade(index: f64) -> GfiGrade {
    let (index, clamped) = clamp_index(to_index(index.round()), GFI_MIN, GFI_MAX);
    let label = GFI_TABLE.iter().find(|(i, _)| *i == index).map(|(_, l)| *l).expect("table covers 6..=17");
    GfiGrade { index, label: label.to_string(), clamped }
}

/// Takes the ceiling of the ARI score and maps it through the table.
pub fn ari_grade(index: f64) -> AriGrade {
    let (index, clamped) = clamp_index(to_index(index.ceil()), ARI_MIN, ARI_MAX);
    let (_, age, label) = ARI_TABLE.iter().find(|(i, _, _)| *i == index).expect("table covers 1..=14");
    AriGrade { index, label: label.to_string(), age: age.to_string(), clamped }
}

pub fn score_stats(stats: TokenStats) -> Result<ReadabilityScores, MetricError> {
    let fre = flesch_reading_ease(&stats)?;
    let gfi = gunning_fog(&stats)?;
    let ari = ari(&stats)?;
    Ok(ReadabilityScores {
        stats,
        fre,
        gfi,
        ari,
        fre_band: fre_band(fre),
        gfi_grade: gfi_grade(gfi),
        ari_grade: ari_grade(ari),
    })
}

pub fn score_text(text: &str) -> Result<ReadabilityScores, MetricError> {
    score_stats(text_stats(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(words: usize, sentences: usize, syllables: usize, complex_words: usize, characters: usize) -> TokenStats {
        TokenStats { words, sentences, syllables, complex_words, characters }
    }

    #[test]
    fn fre_examples() {
        let v = flesch_reading_ease(&stats(10, 2, 13, 0, 0)).unwrap();
        assert!((v - 91.78).abs() < 1e-9, "{v}");
        let v = flesch_reading_ease(&stats(1, 1, 1, 0, 0)).unwrap();
        assert!((v - 121.22).abs() < 1e-9, "{v}");
        assert_eq!(
            flesch_reading_ease(&stats(0, 1, 0, 0, 0)),
            Err(MetricError::Undefined { words: 0, sentences: 1 })
        );
        assert!(flesch_reading_ease(&stats(3, 0, 3, 0, 9)).is_err());
    }

    #[test]
    fn gfi_examples() {
        assert!((gunning_fog(&stats(100, 5, 0, 10, 0)).unwrap() - 12.0).abs() < 1e-9);
        assert!((gunning_fog(&stats(10, 1, 0, 0, 0)).unwrap() - 4.0).abs() < 1e-9);
        assert!((gunning_fog(&stats(10, 2, 0, 10, 0)).unwrap() - 42.0).abs() < 1e-9);
        assert!(gunning_fog(&stats(0, 0, 0, 0, 0)).is_err());
    }

    #[test]
    fn ari_examples() {
        assert!((ari(&stats(100, 10, 0, 0, 500)).unwrap() - 7.12).abs() < 1e-9);
        assert!((ari(&stats(1, 1, 0, 0, 4)).unwrap() - (-2.09)).abs() < 1e-9);
        assert!(ari(&stats(0, 1, 0, 0, 0)).is_err());
    }

    #[test]
    fn fre_band_examples() {
        let b = fre_band(85.0);
        assert_eq!((b.school_level.as_str(), b.difficulty.as_str()), ("Sixth Grade", "Easy and conversational"));
        let b = fre_band(25.0);
        assert_eq!((b.school_level.as_str(), b.difficulty.as_str()), ("College Graduate", "Very difficult"));
        assert_eq!(fre_band(80.0).school_level, "Sixth Grade");
        assert_eq!(fre_band(90.0).school_level, "Fifth Grade");
        assert_eq!(fre_band(100.0), FreBand { school_level: "Fifth Grade".into(), difficulty: "Easily understood by 11yo".into(), out_of_range: false });
        assert!(fre_band(121.22).out_of_range);
        assert_eq!(fre_band(121.22).school_level, "Fifth Grade");
        let low = fre_band(-3.0);
        assert_eq!(low.school_level, "Professional");
        assert!(low.out_of_range);
        assert!(!fre_band(0.0).out_of_range);
        assert!(fre_band(f64::NAN).out_of_range);
    }

    #[test]
    fn gfi_grade_examples() {
        assert_eq!(gfi_grade(12.0).label, "Twelfth Grade");
        assert_eq!(gfi_grade(17.0).label, "College Graduate");
        let g = gfi_grade(3.2);
        assert_eq!((g.label.as_str(), g.index, g.clamped), ("Sixth Grade", 6, true));
        assert_eq!(gfi_grade(6.49).index, 6);
        assert_eq!(gfi_grade(6.5).index, 7);
        assert!(gfi_grade(42.0).clamped);
        assert_eq!(gfi_grade(42.0).label, "College Graduate");
    }

    #[test]
    fn ari_grade_examples() {
        let g = ari_grade(5.3);
        assert_eq!((g.label.as_str(), g.age.as_str(), g.clamped), ("Sixth Grade", "11-12", false));
        assert_eq!(ari_grade(6.0).label, "Sixth Grade");
        let g = ari_grade(13.8);
        assert_eq!((g.label.as_str(), g.age.as_str()), ("Professor", "24+"));
        let g = ari_grade(-2.09);
        assert_eq!((g.label.as_str(), g.age.as_str(), g.clamped), ("Kindergarten", "5-6", true));
        assert!(ari_grade(30.0).clamped);
    }

    #[test]
    fn score_text_smoke() {
        let s = score_text("Heart size normal.").unwrap();
        assert!(s.fre.is_finite() && s.gfi.is_finite() && s.ari.is_finite());
        assert!(!s.fre_band.school_level.is_empty());
        assert!(score_text("").is_err());
        assert!(score_text(" ... ").is_err());
    }
}
