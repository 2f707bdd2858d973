use std::path::Path;
use std::sync::{Mutex, MutexGuard};

use chrono::Utc;
use serde::{Deserialize, Serialize};

use super::log::{Event, EventLog, GradingState, LoggedEvent, StudyRecord};
use super::results::{compute_results, StudyResults};
use super::{base_study_id, build_study, Rubric, StudySpec, StudyState, MAX_SCORE};
use crate::error::GradingError;

/// What a grader sees of one item. Deliberately has no arm field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemView {
    pub item_id: String,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub companion_text: Option<String>,
    /// 1-based.
    pub position: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NextItem {
    Item(ItemView),
    Done { done: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub accepted: bool,
    pub sequence: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraderProgress {
    pub grader: String,
    pub scored: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub state: StudyState,
    pub scored: usize,
    pub total: usize,
    pub per_grader: Vec<GraderProgress>,
}

/// Public study description: rubric and size, nothing per item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyInfo {
    pub study_id: String,
    pub rubric: Rubric,
    pub total: usize,
    pub graders: usize,
    pub state: StudyState,
}

struct Inner {
    state: GradingState,
    log: EventLog,
}

/// Event-sourced grading service. All mutations append to the log, durably,
/// before they touch in-memory state; the lock makes check-and-append atomic.
pub struct GradingService {
    inner: Mutex<Inner>,
    reveal_key: Option<String>,
}

impl std::fmt::Debug for GradingService {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GradingService").field("reveal_key", &self.reveal_key.as_ref().map(|_| "<set>")).finish()
    }
}

impl GradingService {
    pub fn open(log_path: &Path) -> Result<Self, GradingError> {
        let (log, state) = EventLog::open(log_path)?;
        Ok(Self { inner: Mutex::new(Inner { state, log }), reveal_key: None })
    }

    /// Enables early unblinding for callers that present `key`.
    pub fn with_reveal_key(mut self, key: impl Into<String>) -> Self {
        self.reveal_key = Some(key.into());
        self
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn commit(inner: &mut Inner, event: Event) -> Result<u64, GradingError> {
        let logged = LoggedEvent { sequence: inner.state.last_sequence + 1, at: Utc::now(), event };
        inner.log.append(&logged)?;
        inner.state.apply(&logged).expect("validated before append");
        Ok(logged.sequence)
    }

    fn record<'a>(inner: &'a Inner, study_id: &str) -> Result<&'a StudyRecord, GradingError> {
        inner.state.studies.get(study_id).ok_or_else(|| GradingError::UnknownStudy(study_id.to_string()))
    }

    pub fn create_study(&self, spec: &StudySpec) -> Result<String, GradingError> {
        let mut inner = self.lock();
        let study = build_study(spec, |id| inner.state.studies.contains_key(id), Utc::now())?;
        let id = study.study_id.clone();
        Self::commit(&mut inner, Event::StudyCreated { study })?;
        Ok(id)
    }

    /// Reuses the study an identical spec created earlier in this log, so a
    /// restarted server resumes it. The flag is true when a study was created.
    pub fn resume_or_create_study(&self, spec: &StudySpec) -> Result<(String, bool), GradingError> {
        let base = base_study_id(spec);
        if self.lock().state.studies.contains_key(&base) {
            return Ok((base, false));
        }
        self.create_study(spec).map(|id| (id, true))
    }

    pub fn study_ids(&self) -> Vec<String> {
        self.lock().state.studies.keys().cloned().collect()
    }

    pub fn info(&self, study_id: &str) -> Result<StudyInfo, GradingError> {
        let inner = self.lock();
        let r = Self::record(&inner, study_id)?;
        Ok(StudyInfo {
            study_id: study_id.to_string(),
            rubric: r.study.rubric.clone(),
            total: r.study.items.len(),
            graders: r.study.grader_tokens.len(),
            state: r.state(),
        })
    }

    pub fn next_item(&self, study_id: &str, token: &str) -> Result<NextItem, GradingError> {
        let inner = self.lock();
        let r = Self::record(&inner, study_id)?;
        let g = r.study.grader_index(token).ok_or(GradingError::UnknownToken)?;
        let order = r.study.presentation_order(g);
        let total = order.len();
        Ok(order
            .iter()
            .enumerate()
            .find(|(_, &i)| !r.scores.contains_key(&(g, i)))
            .map_or(NextItem::Done { done: true }, |(pos, &i)| {
                let item = &r.study.items[i];
                NextItem::Item(ItemView {
                    item_id: item.item_id.clone(),
                    text: item.text.clone(),
                    companion_text: item.companion_text.clone(),
                    position: pos + 1,
                    total,
                })
            }))
    }

    pub fn submit_score(&self, study_id: &str, token: &str, item_id: &str, score: i64) -> Result<Ack, GradingError> {
        let mut inner = self.lock();
        let r = Self::record(&inner, study_id)?;
        let g = r.study.grader_index(token).ok_or(GradingError::UnknownToken)?;
        let i = r.study.item_index(item_id).ok_or_else(|| GradingError::UnknownItem(item_id.to_string()))?;
        let score = u8::try_from(score).ok().filter(|s| *s <= MAX_SCORE).ok_or(GradingError::ScoreOutOfRange(score))?;
        if let Some(prior) = r.scores.get(&(g, i)) {
            return Err(GradingError::DuplicateScore { item_id: item_id.to_string(), prior_sequence: prior.sequence });
        }
        let event = Event::ScoreSubmitted {
            study_id: study_id.to_string(),
            grader_token: token.to_string(),
            item_id: item_id.to_string(),
            score,
        };
        let sequence = Self::commit(&mut inner, event)?;
        Ok(Ack { accepted: true, sequence })
    }

    pub fn progress(&self, study_id: &str) -> Result<Progress, GradingError> {
        let inner = self.lock();
        let r = Self::record(&inner, study_id)?;
        let total = r.study.items.len();
        let per_grader = r
            .study
            .grader_labels()
            .into_iter()
            .enumerate()
            .map(|(g, grader)| GraderProgress { grader, scored: r.scored_by(g), total })
            .collect();
        Ok(Progress { state: r.state(), scored: r.scores.len(), total: r.expected_scores(), per_grader })
    }

    /// Results of a complete study, or of an open one when `reveal` matches
    /// the configured key; an early reveal is recorded in the log.
    pub fn results(&self, study_id: &str, reveal: Option<&str>) -> Result<StudyResults, GradingError> {
        let mut inner = self.lock();
        let open = Self::record(&inner, study_id)?.state() == StudyState::Open;
        if open {
            let authorized = matches!((&self.reveal_key, reveal), (Some(k), Some(r)) if k == r);
            if !authorized {
                return Err(GradingError::BlindingViolation(study_id.to_string()));
            }
            Self::commit(&mut inner, Event::ResultsRevealed { study_id: study_id.to_string() })?;
        }
        compute_results(Self::record(&inner, study_id)?)
    }
}

/// Results for every complete study in a log, without opening it for writing.
pub fn complete_study_results(state: &GradingState) -> Result<Vec<StudyResults>, GradingError> {
    state.studies.values().filter(|r| r.state() == StudyState::Complete).map(compute_results).collect()
}
