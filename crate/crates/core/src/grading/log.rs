//! The append-only event log and the fold that rebuilds state from it.
//!
//! Each line is one JSON event carrying a global sequence number. The state
//! is a pure function of the event sequence; the file is the only store.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{Study, StudyState, MAX_SCORE};
use crate::error::GradingError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    StudyCreated { study: Study },
    ScoreSubmitted { study_id: String, grader_token: String, item_id: String, score: u8 },
    /// Audit record of an early unblinding.
    ResultsRevealed { study_id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedEvent {
    pub sequence: u64,
    pub at: DateTime<Utc>,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreCell {
    pub score: u8,
    pub sequence: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudyRecord {
    pub study: Study,
    /// Keyed by (grader index, item index).
    pub scores: BTreeMap<(usize, usize), ScoreCell>,
    pub reveals: Vec<u64>,
}

impl StudyRecord {
    pub fn expected_scores(&self) -> usize {
        self.study.grader_tokens.len() * self.study.items.len()
    }

    pub fn state(&self) -> StudyState {
        if self.scores.len() == self.expected_scores() {
            StudyState::Complete
        } else {
            StudyState::Open
        }
    }

    pub fn scored_by(&self, grader: usize) -> usize {
        self.scores.range((grader, 0)..(grader + 1, 0)).count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GradingState {
    pub studies: BTreeMap<String, StudyRecord>,
    pub last_sequence: u64,
}

impl GradingState {
    /// Applies one event, rejecting anything the live service would refuse.
    pub fn apply(&mut self, logged: &LoggedEvent) -> Result<(), String> {
        if logged.sequence <= self.last_sequence {
            return Err(format!("sequence {} does not follow {}", logged.sequence, self.last_sequence));
        }
        match &logged.event {
            Event::StudyCreated { study } => {
                if self.studies.contains_key(&study.study_id) {
                    return Err(format!("study {} created twice", study.study_id));
                }
                self.studies.insert(
                    study.study_id.clone(),
                    StudyRecord { study: study.clone(), scores: BTreeMap::new(), reveals: Vec::new() },
                );
            }
            Event::ScoreSubmitted { study_id, grader_token, item_id, score } => {
                let record = self.studies.get_mut(study_id).ok_or_else(|| format!("unknown study {study_id}"))?;
                let g = record.study.grader_index(grader_token).ok_or("unknown grader token")?;
                let i = record.study.item_index(item_id).ok_or_else(|| format!("unknown item {item_id}"))?;
                if *score > MAX_SCORE {
                    return Err(format!("score {score} out of range"));
                }
                if record.scores.contains_key(&(g, i)) {
                    return Err(format!("duplicate score for item {item_id}"));
                }
                record.scores.insert((g, i), ScoreCell { score: *score, sequence: logged.sequence });
            }
            Event::ResultsRevealed { study_id } => {
                let record = self.studies.get_mut(study_id).ok_or_else(|| format!("unknown study {study_id}"))?;
                record.reveals.push(logged.sequence);
            }
        }
        self.last_sequence = logged.sequence;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corruption {
    /// 1-based line number of the first unusable line.
    pub line: u64,
    pub message: String,
    /// Nothing but whitespace follows the corrupt line.
    pub is_last_line: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    pub state: GradingState,
    pub events: usize,
    /// Byte length of the valid prefix.
    pub valid_len: u64,
    pub corruption: Option<Corruption>,
}

/// Folds a log image into state, stopping at the first bad line.
pub fn replay_bytes(bytes: &[u8]) -> Replay {
    let mut state = GradingState::default();
    let mut events = 0;
    let mut offset = 0usize;
    let mut line_no = 0u64;
    while offset < bytes.len() {
        line_no += 1;
        let end = bytes[offset..].iter().position(|&b| b == b'\n').map_or(bytes.len(), |p| offset + p + 1);
        let raw = &bytes[offset..end];
        let text = String::from_utf8_lossy(raw);
        if !text.trim().is_empty() {
            let outcome = serde_json::from_slice::<LoggedEvent>(raw)
                .map_err(|e| e.to_string())
                .and_then(|event| state.apply(&event));
            if let Err(message) = outcome {
                let is_last_line = bytes[end..].iter().all(u8::is_ascii_whitespace);
                return Replay {
                    state,
                    events,
                    valid_len: offset as u64,
                    corruption: Some(Corruption { line: line_no, message, is_last_line }),
                };
            }
            events += 1;
        }
        offset = end;
    }
    Replay { state, events, valid_len: bytes.len() as u64, corruption: None }
}

/// Replays the log at `path` without modifying it. A missing file is an
/// empty log.
pub fn replay_log(path: &Path) -> Result<Replay, GradingError> {
    match std::fs::read(path) {
        Ok(bytes) => Ok(replay_bytes(&bytes)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(replay_bytes(&[])),
        Err(source) => Err(GradingError::Io { path: path.to_path_buf(), source }),
    }
}

/// Durable appender. Every event is synced to disk before `append` returns.
#[derive(Debug)]
pub struct EventLog {
    file: File,
    path: PathBuf,
}

impl EventLog {
    /// Opens (creating if needed) and replays the log. A torn final line is
    /// dropped with a warning; corruption earlier in the file is an error.
    pub fn open(path: &Path) -> Result<(Self, GradingState), GradingError> {
        let io = |source| GradingError::Io { path: path.to_path_buf(), source };
        let replay = replay_log(path)?;
        if let Some(c) = &replay.corruption {
            if !c.is_last_line {
                return Err(GradingError::CorruptLog { path: path.to_path_buf(), line: c.line, message: c.message.clone() });
            }
            tracing::warn!(path = %path.display(), line = c.line, message = %c.message, "dropping torn final event");
        }
        let mut file = OpenOptions::new().create(true).read(true).append(true).open(path).map_err(io)?;
        file.set_len(replay.valid_len).map_err(io)?;
        if replay.valid_len > 0 {
            let bytes = std::fs::read(path).map_err(io)?;
            if bytes.last() != Some(&b'\n') {
                file.write_all(b"\n").map_err(io)?;
            }
        }
        file.sync_all().map_err(io)?;
        Ok((Self { file, path: path.to_path_buf() }, replay.state))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, event: &LoggedEvent) -> Result<(), GradingError> {
        let io = |source| GradingError::Io { path: self.path.clone(), source };
        let mut line = serde_json::to_vec(event).expect("events serialize");
        line.push(b'\n');
        self.file.write_all(&line).map_err(io)?;
        self.file.sync_data().map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::tests::spec;
    use crate::grading::{build_study, RubricKind};

    fn t() -> DateTime<Utc> {
        DateTime::from_timestamp(1_000, 0).unwrap()
    }

    fn sample_events() -> Vec<LoggedEvent> {
        let study = build_study(&spec(2, RubricKind::Understandability, 1, 3), |_| false, t()).unwrap();
        let id = study.study_id.clone();
        let items: Vec<_> = study.items.iter().map(|i| i.item_id.clone()).collect();
        let mut events = vec![LoggedEvent { sequence: 1, at: t(), event: Event::StudyCreated { study } }];
        for (k, item) in items.into_iter().enumerate() {
            events.push(LoggedEvent {
                sequence: k as u64 + 2,
                at: t(),
                event: Event::ScoreSubmitted { study_id: id.clone(), grader_token: "tok-0".into(), item_id: item, score: (k % 3) as u8 },
            });
        }
        events
    }

    fn image(events: &[LoggedEvent]) -> Vec<u8> {
        events.iter().flat_map(|e| [serde_json::to_vec(e).unwrap(), b"\n".to_vec()].concat()).collect()
    }

    #[test]
    fn create_plus_four_scores() {
        let r = replay_bytes(&image(&sample_events()));
        assert_eq!((r.events, r.corruption.clone()), (5, None));
        let record = r.state.studies.values().next().unwrap();
        assert_eq!(record.scores.len(), 4);
        assert_eq!(record.state(), StudyState::Complete);
    }

    #[test]
    fn empty_log_is_empty_state() {
        let r = replay_bytes(b"");
        assert_eq!(r.state, GradingState::default());
        assert_eq!(r.events, 0);
    }

    #[test]
    fn truncated_final_line_recovers_prefix() {
        let full = image(&sample_events());
        let cut = &full[..full.len() - 10];
        let r = replay_bytes(cut);
        assert_eq!(r.events, 4);
        let c = r.corruption.unwrap();
        assert_eq!((c.line, c.is_last_line), (5, true));
    }

    #[test]
    fn mid_file_corruption_reports_line() {
        let events = sample_events();
        let mut bytes = image(&events[..2]);
        bytes.extend_from_slice(b"{garbage\n");
        bytes.extend_from_slice(&image(&events[2..]));
        let r = replay_bytes(&bytes);
        assert_eq!(r.events, 2);
        let c = r.corruption.unwrap();
        assert_eq!((c.line, c.is_last_line), (3, false));
    }

    #[test]
    fn semantic_violations_stop_replay() {
        let mut events = sample_events();
        let dup = events[1].clone();
        events.push(LoggedEvent { sequence: 99, ..dup });
        let r = replay_bytes(&image(&events));
        assert_eq!(r.events, 5);
        assert!(r.corruption.unwrap().message.contains("duplicate"));
    }

    #[test]
    fn replay_of_serialized_events_round_trips() {
        let events = sample_events();
        let once = replay_bytes(&image(&events));
        let parsed: Vec<LoggedEvent> =
            image(&events).split(|b| *b == b'\n').filter(|l| !l.is_empty()).map(|l| serde_json::from_slice(l).unwrap()).collect();
        assert_eq!(parsed, events);
        assert_eq!(replay_bytes(&image(&parsed)).state, once.state);
    }

    #[test]
    fn open_truncates_torn_tail_and_refuses_mid_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let full = image(&sample_events());
        std::fs::write(&path, &full[..full.len() - 7]).unwrap();
        let (_log, state) = EventLog::open(&path).unwrap();
        assert_eq!(state.last_sequence, 4);
        let on_disk = std::fs::read(&path).unwrap();
        assert!(on_disk.ends_with(b"\n"));
        assert_eq!(replay_bytes(&on_disk).corruption, None);

        std::fs::write(&path, [b"oops\n".as_slice(), &full].concat()).unwrap();
        assert!(matches!(EventLog::open(&path), Err(GradingError::CorruptLog { line: 1, .. })));
    }
}
