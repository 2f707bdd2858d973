//! Seeded synthetic chest X-ray reports.
//!
//! Reports are assembled from hand-written, jargon-dense sentence templates,
//! one per section, with side and severity slots filled from a ChaCha stream.
//! The same seed always yields the same corpus.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chrono::DateTime;

use crate::error::GradingError;
use crate::grading::{GradingService, ItemView, NextItem};
use crate::ingest::{RejectReason, Report};
use crate::simplify::{BackendConfig, MockBackend, SimplifiedPair, Simplifier, MOCK_PREFIX};

pub const CORPUS_SEED: u64 = 20_240_521;
pub const CORPUS_SIZE: usize = 50;
/// Timestamp stamped on the checked-in pairs (2024-01-01T00:00:00Z).
pub const FIXTURE_TIME: i64 = 1_704_067_200;

const SIDES: [&str; 3] = ["right", "left", "bilateral"];
const SEVERITIES: [&str; 4] = ["mild", "moderate", "small", "minimal"];

const TECHNIQUE: &[&str] = &[
    "PA and lateral views of the chest were obtained.",
    "Frontal and lateral radiographs of the chest were obtained and compared with the prior examination.",
    "Single portable AP radiograph of the chest was obtained with the patient in the semi-upright position.",
    "Posteroanterior and lateral chest radiographs demonstrate the following findings in comparison with the previous study.",
];

const HEART: &[&str] = &[
    "The cardiomediastinal silhouette is within normal limits.",
    "There is {sev} cardiomegaly with prominence of the pulmonary vasculature, and the mediastinal contours are otherwise unremarkable.",
    "The cardiac silhouette is enlarged, and there is a tortuous aorta with atherosclerotic calcification of the aortic knob.",
    "Heart size is at the upper limits of normal, but the mediastinal contours are unremarkable and the hilar structures are symmetric.",
    "Stable cardiomegaly is redemonstrated with pulmonary vascular congestion, so interstitial edema cannot be excluded on this examination.",
];

const LUNGS: &[&str] = &[
    "There is {sev} {side} basilar atelectasis, but no focal consolidation or pneumothorax is identified.",
    "The lungs are hyperinflated with flattening of the hemidiaphragms consistent with emphysema, and there are chronic interstitial markings bilaterally.",
    "Patchy opacities are demonstrated in the {side} lower lobe, which may represent infiltrate or consolidation, and clinical correlation is recommended.",
    "No pulmonary edema, pleural effusion, or pneumothorax is visualized.",
    "A calcified granuloma is redemonstrated in the {side} upper lobe without significant interval change.",
    "Streaky {side} perihilar opacities are identified, and these likely represent subsegmental atelectasis or developing airspace disease.",
];

const PLEURA: &[&str] = &[
    "There is a {sev} {side} pleural effusion with associated compressive atelectasis, and the costophrenic angle is blunted.",
    "The costophrenic angles are sharp, and there is no evidence of pneumothorax.",
    "Small {side} pleural effusions are present with adjacent parenchymal opacity, and a superimposed infectious process cannot be excluded.",
    "There is no pleural effusion or pneumothorax.",
];

const BONES: &[&str] = &[
    "Degenerative changes of the thoracic spine are demonstrated, and the osseous structures are otherwise unremarkable.",
    "Median sternotomy wires are intact, and there is {sev} dextroconvex scoliosis of the thoracic spine.",
    "The visualized osseous structures demonstrate no acute abnormality.",
    "Postoperative changes are identified in the {side} shoulder, and multilevel degenerative disease of the thoracic spine is redemonstrated.",
];

const IMPRESSION: &[&str] = &[
    "IMPRESSION: No acute cardiopulmonary abnormality.",
    "IMPRESSION: {Sev} cardiomegaly with pulmonary vascular congestion, which is concerning for early pulmonary edema.",
    "IMPRESSION: Findings are consistent with chronic obstructive pulmonary disease, and there is no acute cardiopulmonary process.",
    "IMPRESSION: {Side} basilar opacity, which may represent atelectasis or pneumonia, and follow-up radiography is recommended.",
    "IMPRESSION: Persistent {side} pleural effusion with associated atelectasis, but no pneumothorax is identified.",
];

fn fill(template: &str, rng: &mut ChaCha8Rng) -> String {
    let side = *SIDES.choose(rng).expect("nonempty");
    let sev = *SEVERITIES.choose(rng).expect("nonempty");
    let cap = |s: &str| {
        let mut c = s.chars();
        c.next().map(|f| f.to_uppercase().chain(c).collect::<String>()).unwrap_or_default()
    };
    template.replace("{side}", side).replace("{sev}", sev).replace("{Side}", &cap(side)).replace("{Sev}", &cap(sev))
}

fn synthetic_text(rng: &mut ChaCha8Rng) -> String {
    let mut sentences = Vec::new();
    for (section, optional) in [(TECHNIQUE, true), (HEART, false), (LUNGS, false), (PLEURA, true), (BONES, true), (IMPRESSION, false)] {
        if optional && rng.gen_bool(0.35) {
            continue;
        }
        let template = section.choose(rng).expect("nonempty");
        sentences.push(fill(template, rng));
    }
    // an occasional second lung finding
    if rng.gen_bool(0.4) {
        sentences.insert(sentences.len() - 1, fill(LUNGS.choose(rng).expect("nonempty"), rng));
    }
    sentences.join(" ")
}

/// `n` synthetic reports with ids `cxr-0001`, `cxr-0002`, ...
pub fn synthetic_corpus(seed: u64, n: usize) -> Vec<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=n)
        .map(|i| Report { id: format!("cxr-{i:04}"), text: synthetic_text(&mut rng), source: String::new() })
        .collect()
}

/// Reports that violate exactly one filter rule each.
const PLANTED: &[(&str, RejectReason)] = &[
    ("", RejectReason::Empty),
    ("   ", RejectReason::Empty),
    ("\n\t", RejectReason::Empty),
    ("Lungs clear.", RejectReason::TooShort),
    ("No interval change.", RejectReason::TooShort),
    ("Stable chest radiograph.", RejectReason::TooShort),
    ("Normal heart and lungs.", RejectReason::TooShort),
    ("Lungs are clear bilaterally <br> heart size is normal.", RejectReason::InvalidChars),
    ("Mild cardiomegaly noted @ the left heart border with no effusion.", RejectReason::InvalidChars),
    ("Small nodule in the right apex #4, follow-up with CT is advised.", RejectReason::InvalidChars),
];

/// The synthetic corpus with ten planted violations interleaved at fixed
/// positions, and the expected rejection reason for each planted id.
pub fn planted_filter_corpus(seed: u64) -> (Vec<Report>, Vec<(String, RejectReason)>) {
    let clean = synthetic_corpus(seed, CORPUS_SIZE);
    let total = clean.len() + PLANTED.len();
    let mut out = Vec::with_capacity(total);
    let mut expected = Vec::new();
    let mut clean_iter = clean.into_iter();
    let mut planted_iter = PLANTED.iter();
    for pos in 0..total {
        let id = format!("rpt-{:04}", pos + 1);
        // every sixth slot holds a planted report
        let planted = if pos % 6 == 5 { planted_iter.next() } else { None };
        match planted {
            Some((text, reason)) => {
                expected.push((id.clone(), *reason));
                out.push(Report { id, text: (*text).to_string(), source: String::new() });
            }
            None => {
                let r = clean_iter.next().expect("enough clean reports");
                out.push(Report { id, text: r.text, source: String::new() });
            }
        }
    }
    (out, expected)
}

/// Mock simplifications of `reports`, stamped with `FIXTURE_TIME`.
pub fn mock_pairs(reports: &[Report]) -> Vec<SimplifiedPair> {
    let at = DateTime::from_timestamp(FIXTURE_TIME, 0).expect("valid timestamp");
    let simplifier = Simplifier::new(&MockBackend, &BackendConfig::mock()).expect("mock config is valid").with_fixed_time(at);
    reports.iter().map(|r| simplifier.simplify_one(r).expect("mock never fails on nonempty text")).collect()
}

/// Has every grader score every item, `score(grader, view)` choosing the grade.
pub fn grade_all(
    service: &GradingService,
    study_id: &str,
    tokens: &[String],
    score: impl Fn(usize, &ItemView) -> i64,
) -> Result<(), GradingError> {
    for (g, token) in tokens.iter().enumerate() {
        while let NextItem::Item(view) = service.next_item(study_id, token)? {
            service.submit_score(study_id, token, &view.item_id, score(g, &view))?;
        }
    }
    Ok(())
}

/// A scripted grader: mock output is fully understandable; originals get 0
/// or 1 depending on grader and position.
pub fn scripted_understandability(grader: usize, view: &ItemView) -> i64 {
    if view.text.starts_with(MOCK_PREFIX) {
        2
    } else {
        (view.position + grader).is_multiple_of(3) as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{classify, FilterConfig};

    #[test]
    fn corpus_is_seeded() {
        assert_eq!(synthetic_corpus(1, 10), synthetic_corpus(1, 10));
        assert_ne!(synthetic_corpus(1, 10), synthetic_corpus(2, 10));
    }

    #[test]
    fn clean_reports_pass_the_filter() {
        let config = FilterConfig::default();
        for r in synthetic_corpus(CORPUS_SEED, 200) {
            assert_eq!(classify(&r, &config), None, "{}", r.text);
        }
    }

    #[test]
    fn planted_corpus_layout() {
        let (reports, expected) = planted_filter_corpus(CORPUS_SEED);
        assert_eq!(reports.len(), 60);
        assert_eq!(expected.len(), 10);
        let config = FilterConfig::default();
        for (id, reason) in &expected {
            let r = reports.iter().find(|r| &r.id == id).unwrap();
            assert_eq!(classify(r, &config), Some(*reason));
        }
    }
}
