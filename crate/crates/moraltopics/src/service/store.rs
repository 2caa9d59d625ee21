//! Session and answer state behind the survey service.
//!
//! Every state change is an [`Event`] appended to `events.jsonl` and synced
//! before it is applied, so an acknowledged answer survives a restart. A
//! snapshot of the applied state is rewritten every few hundred events to
//! keep start-up replay short; the log itself is never truncated.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use moraltopics_core::naming::NamingQuestion;
use moraltopics_core::seed::fnv1a64;
use moraltopics_core::survey::{
    post_level_agreement, validate_selection, AgreementRow, ResponseError, SurveyResponse, ValidationQuestion,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bank::BankFile;
use crate::formats::{write_atomic, FormatError};

const SNAPSHOT_EVERY: u64 = 256;
const LOG_FILE: &str = "events.jsonl";
const SNAPSHOT_FILE: &str = "snapshot.json";

/// Answer given to a naming question that has no coherent name.
pub const NO_NAME: &str = "N/A";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoreSettings {
    pub answers_per_question: usize,
    pub questions_per_session: usize,
    pub idle_timeout_secs: u64,
}

impl Default for StoreSettings {
    fn default() -> Self {
        StoreSettings {
            answers_per_question: 3,
            questions_per_session: 20,
            idle_timeout_secs: 3600,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("unknown bank {0:?}")]
    UnknownBank(String),
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("participant {participant:?} already entered bank {bank:?}")]
    DuplicateParticipant { participant: String, bank: String },
    #[error("bank saturated: every question has its answers or is assigned")]
    Saturated,
    #[error("session is {0}")]
    SessionClosed(&'static str),
    #[error("the screening question must be answered first")]
    ScreeningRequired,
    #[error("question {0:?} is not assigned to this session")]
    NotAssigned(String),
    #[error("question {0:?} already has its full number of answers")]
    QuestionFull(String),
    #[error(transparent)]
    Invalid(#[from] ResponseError),
    #[error("invalid name: {0}")]
    InvalidName(String),
    #[error("participant id must be non-empty")]
    EmptyParticipant,
    #[error("store I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("corrupt store {path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredAnswer {
    pub question_id: String,
    pub participant_id: String,
    pub selections: BTreeSet<String>,
    pub timestamp: i64,
}

impl StoredAnswer {
    pub fn to_response(&self) -> SurveyResponse {
        SurveyResponse {
            question_id: self.question_id.clone(),
            participant_id: self.participant_id.clone(),
            selected: self.selections.clone(),
            timestamp: self.timestamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub participant_id: String,
    pub bank_id: String,
    pub assigned_questions: Vec<String>,
    pub answered: BTreeSet<String>,
    pub screening_required: bool,
    pub screening_passed: bool,
    pub terminated: bool,
    pub expired: bool,
    pub last_active: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl Session {
    pub fn completed(&self) -> bool {
        !self.terminated
            && (!self.screening_required || self.screening_passed)
            && self.answered.len() == self.assigned_questions.len()
    }

    /// Still holding its unanswered assignments.
    fn live(&self) -> bool {
        !self.terminated && !self.expired && !self.completed()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum Event {
    SessionCreated {
        seq: u64,
        session_id: String,
        participant_id: String,
        bank_id: String,
        assigned: Vec<String>,
        screening_required: bool,
        at: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metadata: Option<serde_json::Value>,
    },
    Screening {
        seq: u64,
        session_id: String,
        selections: BTreeSet<String>,
        passed: bool,
        at: i64,
    },
    Answer {
        seq: u64,
        session_id: String,
        question_id: String,
        selections: BTreeSet<String>,
        at: i64,
    },
    Expired {
        seq: u64,
        session_id: String,
        at: i64,
    },
}

impl Event {
    fn seq(&self) -> u64 {
        match self {
            Event::SessionCreated { seq, .. }
            | Event::Screening { seq, .. }
            | Event::Answer { seq, .. }
            | Event::Expired { seq, .. } => *seq,
        }
    }
}

/// Replayable state; everything except the banks themselves.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct State {
    next_seq: u64,
    sessions: BTreeMap<String, Session>,
    /// Per bank, answers in commit order.
    answers: BTreeMap<String, Vec<StoredAnswer>>,
}

struct BankEntry {
    bank: BankFile,
    ids: Vec<String>,
    position: BTreeMap<String, usize>,
}

/// What a session should see next.
#[derive(Debug, Clone, PartialEq)]
pub enum Next<'a> {
    Screening(&'a ValidationQuestion),
    Validation(&'a ValidationQuestion),
    Naming(&'a NamingQuestion),
    Done,
    Terminated,
    Expired,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ack {
    pub question_id: String,
    pub accepted: bool,
    /// The question had already been answered; `selections` is the first
    /// answer, which is kept.
    pub duplicate: bool,
    pub selections: BTreeSet<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub screening_passed: Option<bool>,
    pub terminated: bool,
    pub answered: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Progress {
    pub bank_id: String,
    pub kind: &'static str,
    pub questions: usize,
    pub answers_per_question: usize,
    pub total_answers: usize,
    pub complete_questions: usize,
    pub saturated: bool,
    pub live_sessions: usize,
    pub answer_counts: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<Vec<AgreementRow>>,
}

pub struct Store {
    settings: StoreSettings,
    banks: BTreeMap<String, BankEntry>,
    state: State,
    dir: PathBuf,
    log: File,
    since_snapshot: u64,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl Store {
    /// Opens (or creates) the store in `dir`, replaying snapshot and log.
    pub fn open(dir: &Path, banks: Vec<BankFile>, settings: StoreSettings) -> Result<Store, StoreError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let snap_path = dir.join(SNAPSHOT_FILE);
        let mut state: State = if snap_path.exists() {
            let text = std::fs::read_to_string(&snap_path).map_err(io_err(&snap_path))?;
            serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
                path: snap_path.clone(),
                line: e.line(),
                message: e.to_string(),
            })?
        } else {
            State::default()
        };
        let log_path = dir.join(LOG_FILE);
        let mut replayed = 0;
        if log_path.exists() {
            let text = std::fs::read_to_string(&log_path).map_err(io_err(&log_path))?;
            let lines: Vec<&str> = text.lines().collect();
            for (i, line) in lines.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let event: Event = match serde_json::from_str(line) {
                    Ok(e) => e,
                    // A torn final line is a write that was never acknowledged.
                    Err(_) if i + 1 == lines.len() && !text.ends_with('\n') => break,
                    Err(e) => {
                        return Err(StoreError::Corrupt {
                            path: log_path.clone(),
                            line: i + 1,
                            message: e.to_string(),
                        })
                    }
                };
                if event.seq() >= state.next_seq {
                    apply(&mut state, event);
                    replayed += 1;
                }
            }
            if !text.is_empty() && !text.ends_with('\n') {
                // Drop the torn tail so later appends start on a fresh line.
                let keep = text.rfind('\n').map_or(0, |p| p + 1);
                std::fs::write(&log_path, &text[..keep]).map_err(io_err(&log_path))?;
            }
        }
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(io_err(&log_path))?;
        let banks = banks
            .into_iter()
            .map(|bank| {
                let ids = bank.question_ids();
                let position = ids.iter().enumerate().map(|(i, q)| (q.clone(), i)).collect();
                (bank.bank_id().to_string(), BankEntry { bank, ids, position })
            })
            .collect();
        Ok(Store {
            settings,
            banks,
            state,
            dir: dir.to_path_buf(),
            log,
            since_snapshot: replayed,
        })
    }

    pub fn settings(&self) -> StoreSettings {
        self.settings
    }

    pub fn banks(&self) -> impl Iterator<Item = &BankFile> {
        self.banks.values().map(|e| &e.bank)
    }

    fn commit(&mut self, event: Event) -> Result<(), StoreError> {
        let mut line = serde_json::to_string(&event).expect("serializable event");
        line.push('\n');
        let path = self.dir.join(LOG_FILE);
        self.log.write_all(line.as_bytes()).map_err(io_err(&path))?;
        self.log.sync_data().map_err(io_err(&path))?;
        apply(&mut self.state, event);
        self.since_snapshot += 1;
        if self.since_snapshot >= SNAPSHOT_EVERY {
            self.snapshot()?;
        }
        Ok(())
    }

    /// Writes the compacted state; replay then starts after it.
    pub fn snapshot(&mut self) -> Result<(), StoreError> {
        let text = serde_json::to_string(&self.state).expect("serializable state");
        write_atomic(&self.dir.join(SNAPSHOT_FILE), text.as_bytes())?;
        self.since_snapshot = 0;
        Ok(())
    }

    fn next_seq(&self) -> u64 {
        self.state.next_seq
    }

    /// Expires sessions idle for longer than the timeout, releasing their
    /// unanswered assignments.
    pub fn expire_idle(&mut self, now: i64) -> Result<usize, StoreError> {
        let limit = self.settings.idle_timeout_secs as i64;
        let stale: Vec<String> = self
            .state
            .sessions
            .values()
            .filter(|s| s.live() && now - s.last_active > limit)
            .map(|s| s.session_id.clone())
            .collect();
        for session_id in &stale {
            let seq = self.next_seq();
            self.commit(Event::Expired {
                seq,
                session_id: session_id.clone(),
                at: now,
            })?;
        }
        Ok(stale.len())
    }

    /// Recorded answers plus live outstanding assignments, per question.
    fn load(&self, bank_id: &str) -> Vec<usize> {
        let entry = &self.banks[bank_id];
        let mut load = vec![0usize; entry.ids.len()];
        for a in self.state.answers.get(bank_id).into_iter().flatten() {
            if let Some(&i) = entry.position.get(&a.question_id) {
                load[i] += 1;
            }
        }
        for s in self.state.sessions.values().filter(|s| s.bank_id == bank_id && s.live()) {
            for q in s.assigned_questions.iter().filter(|q| !s.answered.contains(*q)) {
                if let Some(&i) = entry.position.get(q) {
                    load[i] += 1;
                }
            }
        }
        load
    }

    pub fn create_session(
        &mut self,
        participant_id: &str,
        bank_id: &str,
        metadata: Option<serde_json::Value>,
        now: i64,
    ) -> Result<Session, StoreError> {
        let session_id = uuid::Uuid::new_v4().to_string();
        self.create_session_with_id(session_id, participant_id, bank_id, metadata, now)
    }

    /// As [`Store::create_session`], with a caller-chosen session id. The id
    /// also seeds the assignment order.
    pub fn create_session_with_id(
        &mut self,
        session_id: String,
        participant_id: &str,
        bank_id: &str,
        metadata: Option<serde_json::Value>,
        now: i64,
    ) -> Result<Session, StoreError> {
        let participant_id = participant_id.trim();
        if participant_id.is_empty() {
            return Err(StoreError::EmptyParticipant);
        }
        if !self.banks.contains_key(bank_id) {
            return Err(StoreError::UnknownBank(bank_id.to_string()));
        }
        self.expire_idle(now)?;
        if self
            .state
            .sessions
            .values()
            .any(|s| s.bank_id == bank_id && s.participant_id == participant_id)
        {
            return Err(StoreError::DuplicateParticipant {
                participant: participant_id.to_string(),
                bank: bank_id.to_string(),
            });
        }
        let n = self.settings.answers_per_question;
        let load = self.load(bank_id);
        let mut candidates: Vec<usize> = (0..load.len()).filter(|&i| load[i] < n).collect();
        if candidates.is_empty() {
            return Err(StoreError::Saturated);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a64(session_id.as_bytes()));
        candidates.shuffle(&mut rng);
        candidates.sort_by_key(|&i| load[i]);
        candidates.truncate(self.settings.questions_per_session);
        candidates.shuffle(&mut rng);
        let entry = &self.banks[bank_id];
        let assigned: Vec<String> = candidates.iter().map(|&i| entry.ids[i].clone()).collect();
        let screening_required = entry.bank.screening().is_some();
        let seq = self.next_seq();
        self.commit(Event::SessionCreated {
            seq,
            session_id: session_id.clone(),
            participant_id: participant_id.to_string(),
            bank_id: bank_id.to_string(),
            assigned,
            screening_required,
            at: now,
            metadata,
        })?;
        Ok(self.state.sessions[&session_id].clone())
    }

    pub fn session(&self, session_id: &str) -> Option<&Session> {
        self.state.sessions.get(session_id)
    }

    pub fn next_question(&mut self, session_id: &str, now: i64) -> Result<Next<'_>, StoreError> {
        self.expire_idle(now)?;
        let s = self
            .state
            .sessions
            .get_mut(session_id)
            .ok_or_else(|| StoreError::UnknownSession(session_id.to_string()))?;
        if s.terminated {
            return Ok(Next::Terminated);
        }
        if s.expired {
            return Ok(Next::Expired);
        }
        s.last_active = now;
        let s = &self.state.sessions[session_id];
        let entry = &self.banks[&s.bank_id];
        if s.screening_required && !s.screening_passed {
            let screening = entry.bank.screening().expect("screening bank");
            return Ok(Next::Screening(&screening.question));
        }
        let Some(q) = s.assigned_questions.iter().find(|q| !s.answered.contains(*q)) else {
            return Ok(Next::Done);
        };
        let i = entry.position[q];
        Ok(match &entry.bank {
            BankFile::Validation { questions, .. } => Next::Validation(&questions[i]),
            BankFile::Naming { questions, .. } => Next::Naming(&questions[i]),
        })
    }

    pub fn submit_answer(
        &mut self,
        session_id: &str,
        question_id: &str,
        selections: &[String],
        now: i64,
    ) -> Result<Ack, StoreError> {
        self.expire_idle(now)?;
        let s = self
            .state
            .sessions
            .get(session_id)
            .ok_or_else(|| StoreError::UnknownSession(session_id.to_string()))?;
        if s.terminated {
            return Err(StoreError::SessionClosed("terminated"));
        }
        if s.expired {
            return Err(StoreError::SessionClosed("expired"));
        }
        let entry = &self.banks[&s.bank_id];
        let selected: BTreeSet<String> = selections.iter().map(|x| x.trim().to_string()).collect();
        let total = s.assigned_questions.len();
        let ack = |s: &Session, question_id: &str, duplicate, selections, screening_passed| Ack {
            question_id: question_id.to_string(),
            accepted: true,
            duplicate,
            selections,
            screening_passed,
            terminated: s.terminated,
            answered: s.answered.len(),
            total,
        };

        if let Some(screening) = entry.bank.screening() {
            if question_id == screening.question.question_id {
                if s.screening_passed {
                    return Ok(ack(s, question_id, true, screening.correct.clone(), Some(true)));
                }
                validate_selection(&selected, &screening.question)?;
                let passed = screening.passes(&selected);
                let seq = self.next_seq();
                self.commit(Event::Screening {
                    seq,
                    session_id: session_id.to_string(),
                    selections: selected.clone(),
                    passed,
                    at: now,
                })?;
                let s = &self.state.sessions[session_id];
                return Ok(ack(s, question_id, false, selected, Some(passed)));
            }
            if !s.screening_passed {
                return Err(StoreError::ScreeningRequired);
            }
        }
        if !s.assigned_questions.iter().any(|q| q == question_id) {
            return Err(StoreError::NotAssigned(question_id.to_string()));
        }
        let answers = self.state.answers.get(&s.bank_id);
        if s.answered.contains(question_id) {
            let first = answers
                .into_iter()
                .flatten()
                .find(|a| a.question_id == question_id && a.participant_id == s.participant_id)
                .map(|a| a.selections.clone())
                .unwrap_or_default();
            return Ok(ack(s, question_id, true, first, None));
        }
        let i = entry.position[question_id];
        match &entry.bank {
            BankFile::Validation { questions, .. } => validate_selection(&selected, &questions[i])?,
            BankFile::Naming { .. } => validate_name(&selected)?,
        }
        let recorded = answers.into_iter().flatten().filter(|a| a.question_id == question_id).count();
        if recorded >= self.settings.answers_per_question {
            return Err(StoreError::QuestionFull(question_id.to_string()));
        }
        let seq = self.next_seq();
        self.commit(Event::Answer {
            seq,
            session_id: session_id.to_string(),
            question_id: question_id.to_string(),
            selections: selected.clone(),
            at: now,
        })?;
        let s = &self.state.sessions[session_id];
        Ok(ack(s, question_id, false, selected, None))
    }

    pub fn answers(&self, bank_id: &str) -> Result<&[StoredAnswer], StoreError> {
        if !self.banks.contains_key(bank_id) {
            return Err(StoreError::UnknownBank(bank_id.to_string()));
        }
        Ok(self.state.answers.get(bank_id).map_or(&[], Vec::as_slice))
    }

    /// Response CSV in commit order: question_id, participant_id,
    /// timestamp, selections joined by `|`.
    pub fn export_responses(&self, bank_id: &str) -> Result<String, StoreError> {
        Ok(format_responses(self.answers(bank_id)?.iter().map(StoredAnswer::to_response)))
    }

    pub fn progress(&self, bank_id: &str) -> Result<Progress, StoreError> {
        let answers = self.answers(bank_id)?;
        let entry = &self.banks[bank_id];
        let n = self.settings.answers_per_question;
        let mut answer_counts: BTreeMap<String, usize> = entry.ids.iter().map(|q| (q.clone(), 0)).collect();
        for a in answers {
            *answer_counts.entry(a.question_id.clone()).or_insert(0) += 1;
        }
        let complete_questions = answer_counts.values().filter(|&&c| c >= n).count();
        let agreement = match &entry.bank {
            BankFile::Validation { questions, .. } => {
                let responses: Vec<SurveyResponse> = answers.iter().map(StoredAnswer::to_response).collect();
                post_level_agreement(&responses, questions).ok()
            }
            BankFile::Naming { .. } => None,
        };
        Ok(Progress {
            bank_id: bank_id.to_string(),
            kind: entry.bank.kind(),
            questions: entry.ids.len(),
            answers_per_question: n,
            total_answers: answers.len(),
            complete_questions,
            saturated: self.load(bank_id).iter().all(|&l| l >= n),
            live_sessions: self
                .state
                .sessions
                .values()
                .filter(|s| s.bank_id == bank_id && s.live())
                .count(),
            answer_counts,
            agreement,
        })
    }
}

fn validate_name(selected: &BTreeSet<String>) -> Result<(), StoreError> {
    let [name] = selected.iter().collect::<Vec<_>>()[..] else {
        return Err(StoreError::InvalidName("exactly one name is required".into()));
    };
    let words = name.split_whitespace().count();
    if name == NO_NAME || (1..=2).contains(&words) {
        Ok(())
    } else {
        Err(StoreError::InvalidName(format!("{name:?} must be one or two words, or {NO_NAME}")))
    }
}

fn apply(state: &mut State, event: Event) {
    state.next_seq = event.seq() + 1;
    match event {
        Event::SessionCreated {
            session_id,
            participant_id,
            bank_id,
            assigned,
            screening_required,
            at,
            metadata,
            ..
        } => {
            state.sessions.insert(
                session_id.clone(),
                Session {
                    session_id,
                    participant_id,
                    bank_id,
                    assigned_questions: assigned,
                    answered: BTreeSet::new(),
                    screening_required,
                    screening_passed: false,
                    terminated: false,
                    expired: false,
                    last_active: at,
                    metadata,
                },
            );
        }
        Event::Screening {
            session_id, passed, at, ..
        } => {
            if let Some(s) = state.sessions.get_mut(&session_id) {
                s.screening_passed = passed;
                s.terminated = !passed;
                s.last_active = at;
            }
        }
        Event::Answer {
            session_id,
            question_id,
            selections,
            at,
            ..
        } => {
            if let Some(s) = state.sessions.get_mut(&session_id) {
                s.answered.insert(question_id.clone());
                s.last_active = at;
                state.answers.entry(s.bank_id.clone()).or_default().push(StoredAnswer {
                    question_id,
                    participant_id: s.participant_id.clone(),
                    selections,
                    timestamp: at,
                });
            }
        }
        Event::Expired { session_id, .. } => {
            if let Some(s) = state.sessions.get_mut(&session_id) {
                s.expired = true;
            }
        }
    }
}

/// Renders responses in the exchange CSV format.
pub fn format_responses(responses: impl IntoIterator<Item = SurveyResponse>) -> String {
    let mut t = crate::formats::Table::new(["question_id", "participant_id", "timestamp", "selections"]);
    for r in responses {
        let joined = r.selected.iter().map(String::as_str).collect::<Vec<_>>().join("|");
        t.push([r.question_id, r.participant_id, r.timestamp.to_string(), joined]);
    }
    t.to_csv()
}

/// Parses the exchange CSV format. Rows that do not parse are returned with
/// their line number.
pub fn parse_responses(text: &str) -> (Vec<SurveyResponse>, Vec<(usize, String)>) {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = match rec {
            Ok(rec) => rec,
            Err(e) => {
                bad.push((line, e.to_string()));
                continue;
            }
        };
        if rec.len() != 4 {
            bad.push((line, format!("expected 4 columns, found {}", rec.len())));
            continue;
        }
        let Ok(timestamp) = rec[2].trim().parse::<i64>() else {
            bad.push((line, format!("bad timestamp {:?}", &rec[2])));
            continue;
        };
        let selected = rec[3].split('|').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
        ok.push(SurveyResponse {
            question_id: rec[0].to_string(),
            participant_id: rec[1].to_string(),
            selected,
            timestamp,
        });
    }
    (ok, bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use moraltopics_core::survey::{BankMode, Provenance, Screening, TopicOption, NONE_OF_THE_ABOVE};

    fn question(id: &str) -> ValidationQuestion {
        let opts = [
            ("a", Provenance::Top1),
            ("b", Provenance::Top2),
            ("c", Provenance::Top3),
            ("d", Provenance::Top4),
        ];
        ValidationQuestion {
            question_id: id.into(),
            post_id: id.into(),
            title: "t".into(),
            body: "b".into(),
            options: opts
                .iter()
                .map(|&(n, p)| TopicOption {
                    name: n.into(),
                    provenance: p,
                })
                .collect(),
            mode: BankMode::Top4,
        }
    }

    fn bank(n: usize, screening: bool) -> BankFile {
        let screening = screening.then(|| {
            let question = question("screen");
            Screening {
                question,
                correct: ["a", "b"].into_iter().map(String::from).collect(),
            }
        });
        BankFile::Validation {
            bank_id: "train".into(),
            screening,
            questions: (0..n).map(|i| question(&format!("q{i:02}"))).collect(),
        }
    }

    fn settings(per_session: usize) -> StoreSettings {
        StoreSettings {
            answers_per_question: 3,
            questions_per_session: per_session,
            idle_timeout_secs: 100,
        }
    }

    fn sel(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn drain(store: &mut Store, sid: &str, now: i64) -> usize {
        let mut n = 0;
        loop {
            let qid = match store.next_question(sid, now).unwrap() {
                Next::Screening(q) | Next::Validation(q) => q.question_id.clone(),
                Next::Done => return n,
                other => panic!("{other:?}"),
            };
            let picks = if qid == "screen" { sel(&["a", "b"]) } else { sel(&["a"]) };
            store.submit_answer(sid, &qid, &picks, now).unwrap();
            n += 1;
        }
    }

    #[test]
    fn saturation_gives_exactly_n_answers() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path(), vec![bank(10, true)], settings(4)).unwrap();
        let mut participants = 0;
        loop {
            let p = format!("p{participants}");
            match store.create_session(&p, "train", None, 0) {
                Ok(s) => {
                    participants += 1;
                    drain(&mut store, &s.session_id, 0);
                }
                Err(StoreError::Saturated) => break,
                Err(e) => panic!("{e}"),
            }
        }
        let progress = store.progress("train").unwrap();
        assert!(progress.answer_counts.values().all(|&c| c == 3), "{progress:?}");
        assert_eq!(progress.total_answers, 30);
        assert!(participants >= 8);
    }

    #[test]
    fn participation_rules() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path(), vec![bank(30, true)], settings(20)).unwrap();
        let s = store.create_session("alice", "train", None, 0).unwrap();
        assert_eq!(s.assigned_questions.len(), 20);
        assert!(matches!(
            store.create_session("alice", "train", None, 1),
            Err(StoreError::DuplicateParticipant { .. })
        ));
        let sid = s.session_id.clone();
        assert!(matches!(store.next_question(&sid, 1).unwrap(), Next::Screening(_)));
        let first = s.assigned_questions[0].clone();
        assert!(matches!(
            store.submit_answer(&sid, &first, &sel(&["a"]), 1),
            Err(StoreError::ScreeningRequired)
        ));
        store.submit_answer(&sid, "screen", &sel(&["a", "b"]), 1).unwrap();
        assert!(matches!(
            store.submit_answer(&sid, &first, &sel(&["a", NONE_OF_THE_ABOVE]), 2),
            Err(StoreError::Invalid(ResponseError::NoneNotExclusive))
        ));
        let ack = store.submit_answer(&sid, &first, &sel(&["b"]), 2).unwrap();
        assert!(!ack.duplicate);
        let again = store.submit_answer(&sid, &first, &sel(&["c"]), 3).unwrap();
        assert!(again.duplicate);
        assert_eq!(again.selections, ["b".to_string()].into_iter().collect());
        assert_eq!(store.answers("train").unwrap().len(), 1);
        assert!(matches!(store.next_question("nope", 3), Err(StoreError::UnknownSession(_))));
    }

    #[test]
    fn failed_screening_terminates() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path(), vec![bank(5, true)], settings(5)).unwrap();
        let sid = store.create_session("bob", "train", None, 0).unwrap().session_id;
        let ack = store.submit_answer(&sid, "screen", &sel(&["a"]), 0).unwrap();
        assert_eq!((ack.screening_passed, ack.terminated), (Some(false), true));
        assert_eq!(store.next_question(&sid, 0).unwrap(), Next::Terminated);
        // Its assignments are released.
        assert!(store.progress("train").unwrap().live_sessions == 0);
    }

    #[test]
    fn idle_sessions_expire_and_release() {
        let dir = tempfile::tempdir().unwrap();
        let st = StoreSettings {
            answers_per_question: 1,
            questions_per_session: 3,
            idle_timeout_secs: 100,
        };
        let mut store = Store::open(dir.path(), vec![bank(3, false)], st).unwrap();
        let a = store.create_session("a", "train", None, 0).unwrap().session_id;
        assert!(matches!(store.create_session("b", "train", None, 50), Err(StoreError::Saturated)));
        let b = store.create_session("c", "train", None, 201).unwrap();
        assert_eq!(b.assigned_questions.len(), 3);
        assert_eq!(store.next_question(&a, 202).unwrap(), Next::Expired);
    }

    #[test]
    fn restart_replays_log_and_snapshot() {
        let dir = tempfile::tempdir().unwrap();
        let sid;
        {
            let mut store = Store::open(dir.path(), vec![bank(6, false)], settings(6)).unwrap();
            sid = store.create_session("p", "train", None, 0).unwrap().session_id;
            store.submit_answer(&sid, "q00", &sel(&["a"]), 1).unwrap();
            store.snapshot().unwrap();
            store.submit_answer(&sid, "q01", &sel(&["b", "c"]), 2).unwrap();
        }
        let store = Store::open(dir.path(), vec![bank(6, false)], settings(6)).unwrap();
        let csv = store.export_responses("train").unwrap();
        assert_eq!(csv, "question_id,participant_id,timestamp,selections\nq00,p,1,a\nq01,p,2,b|c\n");
        assert_eq!(store.session(&sid).unwrap().answered.len(), 2);
    }

    #[test]
    fn torn_log_tail_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut store = Store::open(dir.path(), vec![bank(2, false)], settings(2)).unwrap();
            let sid = store.create_session("p", "train", None, 0).unwrap().session_id;
            store.submit_answer(&sid, "q00", &sel(&["a"]), 1).unwrap();
        }
        let log = dir.path().join(LOG_FILE);
        let mut f = OpenOptions::new().append(true).open(&log).unwrap();
        f.write_all(b"{\"event\":\"answer\",\"seq\":9").unwrap();
        drop(f);
        let mut store = Store::open(dir.path(), vec![bank(2, false)], settings(2)).unwrap();
        assert_eq!(store.answers("train").unwrap().len(), 1);
        store.create_session("q", "train", None, 2).unwrap();
        drop(store);
        let store = Store::open(dir.path(), vec![bank(2, false)], settings(2)).unwrap();
        assert_eq!(store.progress("train").unwrap().live_sessions, 2);
    }

    #[test]
    fn response_csv_round_trip() {
        let rs = vec![SurveyResponse {
            question_id: "q,1".into(),
            participant_id: "p".into(),
            selected: ["x y".to_string(), "z".to_string()].into_iter().collect(),
            timestamp: 5,
        }];
        let (back, bad) = parse_responses(&format_responses(rs.clone()));
        assert!(bad.is_empty());
        assert_eq!(back, rs);
        assert_eq!(parse_responses("question_id,participant_id,timestamp,selections\n").0, vec![]);
    }

    #[test]
    fn naming_answers() {
        assert!(validate_name(&["family".to_string()].into_iter().collect()).is_ok());
        assert!(validate_name(&["social media".to_string()].into_iter().collect()).is_ok());
        assert!(validate_name(&[NO_NAME.to_string()].into_iter().collect()).is_ok());
        assert!(validate_name(&["a b c".to_string()].into_iter().collect()).is_err());
        assert!(validate_name(&BTreeSet::new()).is_err());
    }
}
