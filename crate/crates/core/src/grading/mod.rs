//! Blind human grading of original and generated texts.
//!
//! A study is a fixed list of items built from simplified pairs. Graders are
//! identified by bearer tokens and score each item 0, 1 or 2. All state is
//! derived from an append-only event log; see [`log`] and [`GradingService`].

pub mod log;
mod results;
mod service;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use results::{ArmDistribution, GraderDistribution, GridRow, StudyResults};
pub use service::{complete_study_results, Ack, GraderProgress, GradingService, ItemView, NextItem, Progress, StudyInfo};

use crate::error::GradingError;
use crate::simplify::SimplifiedPair;

pub const MAX_SCORE: u8 = 2;
pub const SCORES: [u8; 3] = [0, 1, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RubricKind {
    /// Clinicians judge a summary against its source report.
    Reliability,
    /// Lay readers judge one blinded text at a time.
    Understandability,
}

impl RubricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RubricKind::Reliability => "reliability",
            RubricKind::Understandability => "understandability",
        }
    }
}

impl fmt::Display for RubricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RubricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reliability" => Ok(RubricKind::Reliability),
            "understandability" => Ok(RubricKind::Understandability),
            other => Err(format!("unknown rubric {other:?} (expected reliability or understandability)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RubricLabel {
    pub score: u8,
    pub label: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rubric {
    pub kind: RubricKind,
    pub labels: Vec<RubricLabel>,
}

impl Rubric {
    pub fn new(kind: RubricKind) -> Self {
        let rows: [(&str, &str); 3] = match kind {
            RubricKind::Reliability => [
                ("Unreliable", "The summary misstates or omits findings of the original report."),
                ("Inconsistent", "The summary is mostly faithful but contains minor inaccuracies or gaps."),
                ("Appropriate", "The summary completely and accurately reflects the original report."),
            ],
            RubricKind::Understandability => [
                ("Not understandable", "I could not understand what the text is telling me."),
                // implementation label for the middle grade
                ("Partially understandable", "I understood some of the text but not all of it."),
                ("Fully understandable", "I understood what the text is telling me."),
            ],
        };
        let labels = rows
            .iter()
            .zip(SCORES)
            .map(|((label, description), score)| RubricLabel { score, label: (*label).into(), description: (*description).into() })
            .collect();
        Self { kind, labels }
    }

    pub fn label(&self, score: u8) -> &str {
        &self.labels[score as usize].label
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Original,
    Generated,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Original, Arm::Generated];
}

/// One text to be graded. `hidden_arm` must never reach a grader-facing
/// response while the study is open.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyItem {
    pub item_id: String,
    pub text: String,
    pub hidden_arm: Arm,
    pub pair_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub companion_text: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyState {
    Open,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Study {
    pub study_id: String,
    pub rubric: Rubric,
    /// Shared presentation order.
    pub items: Vec<StudyItem>,
    pub grader_tokens: Vec<String>,
    pub seed: u64,
    /// Each grader sees the items in an independent seeded order.
    #[serde(default)]
    pub per_grader_order: bool,
    pub created_at: DateTime<Utc>,
}

impl Study {
    pub fn grader_index(&self, token: &str) -> Option<usize> {
        self.grader_tokens.iter().position(|t| t == token)
    }

    pub fn item_index(&self, item_id: &str) -> Option<usize> {
        self.items.iter().position(|i| i.item_id == item_id)
    }

    /// Public grader names `G1..Gk`, in token order.
    pub fn grader_labels(&self) -> Vec<String> {
        (1..=self.grader_tokens.len()).map(|i| format!("G{i}")).collect()
    }

    /// Item indices in the order grader `g` sees them.
    pub fn presentation_order(&self, g: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.items.len()).collect();
        if self.per_grader_order {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15_u64.wrapping_mul(g as u64 + 1));
            order.shuffle(&mut rng);
        }
        order
    }
}

/// Inputs to [`GradingService::create_study`].
#[derive(Debug, Clone)]
pub struct StudySpec {
    pub pairs: Vec<SimplifiedPair>,
    pub rubric: RubricKind,
    pub grader_tokens: Vec<String>,
    pub seed: u64,
    pub per_grader_order: bool,
}

/// The id a spec receives when no study already holds it.
pub fn base_study_id(spec: &StudySpec) -> String {
    let mut h = Sha256::new();
    h.update(spec.rubric.as_str());
    h.update(spec.seed.to_le_bytes());
    h.update([spec.per_grader_order as u8]);
    for p in &spec.pairs {
        h.update(p.report_id.as_bytes());
        h.update([0]);
    }
    for t in &spec.grader_tokens {
        h.update(t.as_bytes());
        h.update([0]);
    }
    format!("study-{}", &hex::encode(h.finalize())[..12])
}

/// Builds a study. Ids and item order depend only on the spec; `taken`
/// reports study ids already in use so a repeat spec gets a suffixed id.
pub fn build_study(spec: &StudySpec, taken: impl Fn(&str) -> bool, created_at: DateTime<Utc>) -> Result<Study, GradingError> {
    if spec.pairs.is_empty() {
        return Err(GradingError::EmptyPairs);
    }
    if spec.grader_tokens.is_empty() || spec.grader_tokens.iter().any(|t| t.trim().is_empty()) {
        return Err(GradingError::NoGraders);
    }
    let mut seen = HashSet::new();
    if !spec.grader_tokens.iter().all(|t| seen.insert(t)) {
        return Err(GradingError::DuplicateToken);
    }

    let base = base_study_id(spec);
    let study_id = std::iter::once(base.clone())
        .chain((2..).map(|n| format!("{base}-{n}")))
        .find(|id| !taken(id))
        .expect("unbounded candidates");

    let mut items = Vec::new();
    for p in &spec.pairs {
        match spec.rubric {
            RubricKind::Understandability => {
                for (arm, text) in [(Arm::Original, &p.original_text), (Arm::Generated, &p.generated_text)] {
                    items.push(StudyItem {
                        item_id: String::new(),
                        text: text.clone(),
                        hidden_arm: arm,
                        pair_ref: p.report_id.clone(),
                        companion_text: None,
                    });
                }
            }
            RubricKind::Reliability => items.push(StudyItem {
                item_id: String::new(),
                text: p.generated_text.clone(),
                hidden_arm: Arm::Generated,
                pair_ref: p.report_id.clone(),
                companion_text: Some(p.original_text.clone()),
            }),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    items.shuffle(&mut rng);
    let mut ids = HashSet::new();
    for item in &mut items {
        // opaque ids drawn after shuffling carry no arm information
        item.item_id = loop {
            let candidate = format!("{:016x}", rng.gen::<u64>());
            if ids.insert(candidate.clone()) {
                break candidate;
            }
        };
    }

    Ok(Study {
        study_id,
        rubric: Rubric::new(spec.rubric),
        items,
        grader_tokens: spec.grader_tokens.clone(),
        seed: spec.seed,
        per_grader_order: spec.per_grader_order,
        created_at,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn pairs(n: usize) -> Vec<SimplifiedPair> {
        (0..n)
            .map(|i| SimplifiedPair {
                report_id: format!("r{i}"),
                original_text: format!("Original report {i} with cardiomegaly."),
                generated_text: format!("Summary {i}: your heart is big."),
                backend_id: "mock".into(),
                model_id: "mock".into(),
                created_at: DateTime::from_timestamp(0, 0).unwrap(),
                attempt_count: 1,
            })
            .collect()
    }

    pub fn spec(n: usize, rubric: RubricKind, graders: usize, seed: u64) -> StudySpec {
        StudySpec {
            pairs: pairs(n),
            rubric,
            grader_tokens: (0..graders).map(|g| format!("tok-{g}")).collect(),
            seed,
            per_grader_order: false,
        }
    }

    fn build(s: &StudySpec) -> Result<Study, GradingError> {
        build_study(s, |_| false, DateTime::from_timestamp(0, 0).unwrap())
    }

    #[test]
    fn rubric_labels() {
        let r = Rubric::new(RubricKind::Reliability);
        assert_eq!([r.label(0), r.label(1), r.label(2)], ["Unreliable", "Inconsistent", "Appropriate"]);
        let u = Rubric::new(RubricKind::Understandability);
        assert_eq!((u.label(0), u.label(2)), ("Not understandable", "Fully understandable"));
    }

    #[test]
    fn seeded_order_is_reproducible() {
        let a = build(&spec(2, RubricKind::Understandability, 1, 42)).unwrap();
        let b = build(&spec(2, RubricKind::Understandability, 1, 42)).unwrap();
        assert_eq!(a.items.len(), 4);
        assert_eq!(serde_json::to_vec(&a.items).unwrap(), serde_json::to_vec(&b.items).unwrap());
        assert_eq!(a.study_id, b.study_id);
        let c = build(&spec(2, RubricKind::Understandability, 1, 43)).unwrap();
        assert_ne!(a.study_id, c.study_id);
    }

    #[test]
    fn understandability_has_every_text_once() {
        let s = build(&spec(500, RubricKind::Understandability, 4, 7)).unwrap();
        assert_eq!(s.items.len(), 1000);
        for arm in Arm::BOTH {
            let refs: HashSet<_> = s.items.iter().filter(|i| i.hidden_arm == arm).map(|i| &i.pair_ref).collect();
            assert_eq!(refs.len(), 500);
        }
        let ids: HashSet<_> = s.items.iter().map(|i| &i.item_id).collect();
        assert_eq!(ids.len(), 1000);
        // shuffled together: the first 20 items are not all one arm
        assert!(s.items[..20].iter().any(|i| i.hidden_arm == Arm::Original));
        assert!(s.items[..20].iter().any(|i| i.hidden_arm == Arm::Generated));
    }

    #[test]
    fn reliability_items_carry_companion() {
        let s = build(&spec(3, RubricKind::Reliability, 3, 1)).unwrap();
        assert_eq!(s.items.len(), 3);
        for item in &s.items {
            assert_eq!(item.hidden_arm, Arm::Generated);
            assert!(item.companion_text.as_deref().unwrap().starts_with("Original report"));
        }
    }

    #[test]
    fn creation_errors() {
        assert!(matches!(build(&spec(0, RubricKind::Reliability, 1, 1)), Err(GradingError::EmptyPairs)));
        assert!(matches!(build(&spec(1, RubricKind::Reliability, 0, 1)), Err(GradingError::NoGraders)));
        let mut dup = spec(1, RubricKind::Reliability, 2, 1);
        dup.grader_tokens[1] = dup.grader_tokens[0].clone();
        assert!(matches!(build(&dup), Err(GradingError::DuplicateToken)));
    }

    #[test]
    fn colliding_ids_get_suffix() {
        let s = spec(1, RubricKind::Reliability, 1, 1);
        let first = build(&s).unwrap().study_id;
        let second = build_study(&s, |id| id == first, DateTime::from_timestamp(0, 0).unwrap()).unwrap();
        assert_eq!(second.study_id, format!("{first}-2"));
    }

    #[test]
    fn per_grader_orders_differ_only_when_requested() {
        let mut s = build(&spec(10, RubricKind::Understandability, 2, 5)).unwrap();
        assert_eq!(s.presentation_order(0), s.presentation_order(1));
        s.per_grader_order = true;
        assert_ne!(s.presentation_order(0), s.presentation_order(1));
        let mut sorted = s.presentation_order(1);
        sorted.sort();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
    }
}
