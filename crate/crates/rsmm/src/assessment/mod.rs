//! One project's assessment against a model.
//!
//! Assessments are values: every mutating operation returns a new
//! assessment and leaves the receiver untouched. Evidence lists only ever
//! grow.

mod consistency;
mod store;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::model::{Extra, MaturityModel, ModelRef, PracticeCode};

pub use consistency::{check_consistency, ConsistencyFinding, FindingKind};
pub use store::{AssessmentStore, StoreError, StoredAssessment};

#[derive(Debug, thiserror::Error)]
pub enum AssessmentError {
    #[error("practice {0} is not part of the model")]
    UnknownCode(PracticeCode),
    #[error("state {state} for {code} needs at least one evidence record")]
    MissingEvidence { code: PracticeCode, state: PracticeState },
    #[error("invalid evidence for {code}: {reason}")]
    InvalidEvidence { code: PracticeCode, reason: String },
    #[error("assessment was made against {found}, not {expected}")]
    ModelMismatch { expected: ModelRef, found: ModelRef },
    #[error("invalid assessment id `{0}`: use letters, digits, `-`, `_` or `.`")]
    InvalidId(String),
    #[error("project name must not be empty")]
    EmptyProjectName,
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PracticeState {
    Implemented,
    NotImplemented,
    Unknown,
}

impl PracticeState {
    pub fn is_determinate(self) -> bool {
        self != PracticeState::Unknown
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PracticeState::Implemented => "implemented",
            PracticeState::NotImplemented => "not_implemented",
            PracticeState::Unknown => "unknown",
        }
    }
}

impl fmt::Display for PracticeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PracticeState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "implemented" | "yes" | "y" | "true" => Ok(PracticeState::Implemented),
            "not_implemented" | "no" | "n" | "false" => Ok(PracticeState::NotImplemented),
            "unknown" | "?" | "" => Ok(PracticeState::Unknown),
            other => Err(format!("unknown practice state `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceSource {
    Manual,
    Probe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    Certain,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRecord {
    pub source: EvidenceSource,
    pub confidence: Confidence,
    #[serde(default)]
    pub note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locator: Option<String>,
    pub observed_at: DateTime<Utc>,
    /// The state this record argues for, when it argues for one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asserts: Option<PracticeState>,
}

impl EvidenceRecord {
    pub fn manual(note: impl Into<String>, observed_at: DateTime<Utc>) -> Self {
        Self {
            source: EvidenceSource::Manual,
            confidence: Confidence::Certain,
            note: note.into(),
            locator: None,
            observed_at,
            asserts: None,
        }
    }

    pub fn probe(
        confidence: Confidence,
        note: impl Into<String>,
        locator: impl Into<String>,
        observed_at: DateTime<Utc>,
    ) -> Self {
        Self {
            source: EvidenceSource::Probe,
            confidence,
            note: note.into(),
            locator: Some(locator.into()),
            observed_at,
            asserts: None,
        }
    }

    pub fn asserting(mut self, state: PracticeState) -> Self {
        self.asserts = Some(state);
        self
    }

    pub fn with_locator(mut self, locator: impl Into<String>) -> Self {
        self.locator = Some(locator.into());
        self
    }

    fn check(&self) -> Result<(), String> {
        match self.source {
            EvidenceSource::Manual if self.confidence != Confidence::Certain => {
                Err("manual evidence must be certain".into())
            }
            EvidenceSource::Probe if self.locator.as_deref().is_none_or(str::is_empty) => {
                Err("probe evidence must carry a locator".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PracticeStatus {
    pub state: PracticeState,
    #[serde(default)]
    pub evidence: Vec<EvidenceRecord>,
    /// Per-criterion fulfilment, keyed by position in the practice's
    /// criteria list. Reported, never scored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion_checks: Option<BTreeMap<usize, bool>>,
    /// Set when probes disagreed about this practice.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub needs_review: bool,
}

impl PracticeStatus {
    pub fn unknown() -> Self {
        Self {
            state: PracticeState::Unknown,
            evidence: Vec::new(),
            criterion_checks: None,
            needs_review: false,
        }
    }

    pub fn is_implemented(&self) -> bool {
        self.state == PracticeState::Implemented
    }

    pub fn has_manual_evidence(&self) -> bool {
        self.evidence.iter().any(|e| e.source == EvidenceSource::Manual)
    }

    fn check(&self, code: PracticeCode) -> Result<(), AssessmentError> {
        if self.state.is_determinate() && self.evidence.is_empty() {
            return Err(AssessmentError::MissingEvidence {
                code,
                state: self.state,
            });
        }
        for record in &self.evidence {
            record
                .check()
                .map_err(|reason| AssessmentError::InvalidEvidence { code, reason })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectInfo {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repository_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl ProjectInfo {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            repository_url: None,
            description: None,
        }
    }
}

/// Assessment identifier; doubles as the storage file stem.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AssessmentId(String);

impl AssessmentId {
    pub fn new(id: impl Into<String>) -> Result<Self, AssessmentError> {
        let id = id.into();
        let ok = !id.is_empty()
            && id.len() <= 128
            && !id.starts_with('.')
            && id
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b'.'));
        if ok {
            Ok(Self(id))
        } else {
            Err(AssessmentError::InvalidId(id))
        }
    }

    /// Lower-case slug of a project name, e.g. `"My Tool 2"` -> `my-tool-2`.
    pub fn slug(name: &str) -> Result<Self, AssessmentError> {
        let mut slug = String::new();
        for ch in name.chars() {
            if ch.is_ascii_alphanumeric() {
                slug.push(ch.to_ascii_lowercase());
            } else if !slug.ends_with('-') && !slug.is_empty() {
                slug.push('-');
            }
        }
        let slug = slug.trim_end_matches('-').to_string();
        Self::new(if slug.is_empty() { name.to_string() } else { slug })
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for AssessmentId {
    type Error = AssessmentError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<AssessmentId> for String {
    fn from(id: AssessmentId) -> Self {
        id.0
    }
}

impl fmt::Display for AssessmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub id: AssessmentId,
    pub model_ref: ModelRef,
    pub project: ProjectInfo,
    pub statuses: BTreeMap<PracticeCode, PracticeStatus>,
    pub created: DateTime<Utc>,
    pub updated: DateTime<Utc>,
    #[serde(flatten)]
    pub extra: Extra,
}

/// A state change proposed by an automated probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeProposal {
    pub code: PracticeCode,
    pub state: PracticeState,
    pub evidence: EvidenceRecord,
}

/// What [`Assessment::merge_probe_results`] did with each proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutcome {
    pub assessment: Assessment,
    /// Proposals that changed a practice's state.
    pub changed: Vec<PracticeCode>,
    /// Proposals recorded but not applied because manual evidence wins.
    pub overridden: Vec<PracticeCode>,
    /// Practices where probes disagreed with each other.
    pub flagged: Vec<PracticeCode>,
}

impl Assessment {
    /// Fresh assessment with every practice `Unknown`. The id is a slug of
    /// the project name.
    pub fn new(model: &MaturityModel, project: ProjectInfo, now: DateTime<Utc>) -> Result<Self, AssessmentError> {
        let id = AssessmentId::slug(&project.name)?;
        Self::with_id(model, id, project, now)
    }

    pub fn with_id(
        model: &MaturityModel,
        id: AssessmentId,
        project: ProjectInfo,
        now: DateTime<Utc>,
    ) -> Result<Self, AssessmentError> {
        if project.name.trim().is_empty() {
            return Err(AssessmentError::EmptyProjectName);
        }
        let statuses = model.practices().map(|p| (p.code, PracticeStatus::unknown())).collect();
        Ok(Self {
            id,
            model_ref: model.model_ref(),
            project,
            statuses,
            created: now,
            updated: now,
            extra: Extra::new(),
        })
    }

    pub fn from_json(input: &str) -> Result<Self, AssessmentError> {
        serde_json::from_str(input).map_err(|e| AssessmentError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Parses a document and checks it against `model`; practices the
    /// document does not mention are filled in as `Unknown`.
    pub fn from_json_for(input: &str, model: &MaturityModel) -> Result<Self, AssessmentError> {
        let mut a = Self::from_json(input)?;
        a.validate(model)?;
        for code in model.practice_codes() {
            a.statuses.entry(code).or_insert_with(PracticeStatus::unknown);
        }
        Ok(a)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("assessments always serialize")
    }

    pub fn validate(&self, model: &MaturityModel) -> Result<(), AssessmentError> {
        let expected = model.model_ref();
        if self.model_ref != expected {
            return Err(AssessmentError::ModelMismatch {
                expected,
                found: self.model_ref.clone(),
            });
        }
        if self.project.name.trim().is_empty() {
            return Err(AssessmentError::EmptyProjectName);
        }
        for (&code, status) in &self.statuses {
            if !model.contains(code) {
                return Err(AssessmentError::UnknownCode(code));
            }
            status.check(code)?;
        }
        Ok(())
    }

    pub fn state(&self, code: PracticeCode) -> PracticeState {
        self.statuses.get(&code).map_or(PracticeState::Unknown, |s| s.state)
    }

    pub fn is_implemented(&self, code: PracticeCode) -> bool {
        self.state(code) == PracticeState::Implemented
    }

    pub fn count(&self, state: PracticeState) -> usize {
        self.statuses.values().filter(|s| s.state == state).count()
    }

    /// Answered (non-`Unknown`) practices over all practices.
    pub fn completeness(&self) -> f64 {
        if self.statuses.is_empty() {
            return 0.0;
        }
        let answered = self.statuses.values().filter(|s| s.state.is_determinate()).count();
        answered as f64 / self.statuses.len() as f64
    }

    fn touch(&mut self, now: DateTime<Utc>) {
        self.updated = self.updated.max(now);
    }

    /// Records a new state for one practice. Earlier evidence is kept.
    pub fn set_status(
        &self,
        model: &MaturityModel,
        code: PracticeCode,
        state: PracticeState,
        evidence: Option<EvidenceRecord>,
        now: DateTime<Utc>,
    ) -> Result<Self, AssessmentError> {
        if !model.contains(code) {
            return Err(AssessmentError::UnknownCode(code));
        }
        if let Some(record) = &evidence {
            record
                .check()
                .map_err(|reason| AssessmentError::InvalidEvidence { code, reason })?;
        } else if state.is_determinate() {
            return Err(AssessmentError::MissingEvidence { code, state });
        }
        let mut next = self.clone();
        let status = next.statuses.entry(code).or_insert_with(PracticeStatus::unknown);
        status.state = state;
        if let Some(mut record) = evidence {
            record.asserts.get_or_insert(state);
            status.evidence.push(record);
        }
        next.touch(now);
        Ok(next)
    }

    /// Records per-criterion fulfilment for reporting.
    pub fn set_criterion_checks(
        &self,
        model: &MaturityModel,
        code: PracticeCode,
        checks: BTreeMap<usize, bool>,
        now: DateTime<Utc>,
    ) -> Result<Self, AssessmentError> {
        let practice = model.lookup(code).map_err(|_| AssessmentError::UnknownCode(code))?;
        if let Some(&bad) = checks.keys().find(|&&i| i >= practice.criteria.len()) {
            return Err(AssessmentError::InvalidEvidence {
                code,
                reason: format!("criterion index {bad} out of range"),
            });
        }
        let mut next = self.clone();
        next.statuses
            .entry(code)
            .or_insert_with(PracticeStatus::unknown)
            .criterion_checks = Some(checks);
        next.touch(now);
        Ok(next)
    }

    /// Folds probe proposals into the assessment.
    ///
    /// Every proposal's evidence is appended. A proposal changes the state
    /// only if the practice has no manual evidence; manual judgments always
    /// win. When two probes assert different states for one practice the
    /// later one stands and the practice is flagged for review.
    pub fn merge_probe_results(
        &self,
        model: &MaturityModel,
        proposals: &[ProbeProposal],
        now: DateTime<Utc>,
    ) -> Result<MergeOutcome, AssessmentError> {
        if let Some(p) = proposals.iter().find(|p| !model.contains(p.code)) {
            return Err(AssessmentError::UnknownCode(p.code));
        }
        let mut next = self.clone();
        let mut changed = Vec::new();
        let mut overridden = Vec::new();
        let mut flagged = Vec::new();
        for proposal in proposals {
            let mut record = proposal.evidence.clone();
            record.source = EvidenceSource::Probe;
            record.check().map_err(|reason| AssessmentError::InvalidEvidence {
                code: proposal.code,
                reason,
            })?;
            record.asserts.get_or_insert(proposal.state);

            let status = next
                .statuses
                .entry(proposal.code)
                .or_insert_with(PracticeStatus::unknown);
            let disagrees = status
                .evidence
                .iter()
                .filter(|e| e.source == EvidenceSource::Probe)
                .filter_map(|e| e.asserts)
                .any(|s| s != proposal.state);
            if disagrees {
                status.needs_review = true;
                if !flagged.contains(&proposal.code) {
                    flagged.push(proposal.code);
                }
            }
            if status.has_manual_evidence() {
                overridden.push(proposal.code);
            } else if status.state != proposal.state {
                status.state = proposal.state;
                changed.push(proposal.code);
            }
            status.evidence.push(record);
        }
        if !proposals.is_empty() {
            next.touch(now);
        }
        Ok(MergeOutcome {
            assessment: next,
            changed,
            overridden,
            flagged,
        })
    }
}
