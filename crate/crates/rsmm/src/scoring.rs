//! Maturity scoring, gap analysis and what-if simulation.
//!
//! A capability reaches level L when every practice placed at a level up
//! to and including L is implemented; levels without a practice pass
//! vacuously. So its achieved level is one below its lowest practice that
//! is not implemented, or `max_level` when there is none. A focus area is
//! as mature as its weakest capability. No scalar is ever formed across
//! focus areas.
//!
//! `Unknown` and `NotImplemented` score identically.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assessment::{Assessment, AssessmentId, PracticeState};
use crate::model::{Capability, CapabilityRef, MaturityModel, ModelRef, PracticeCode};

#[derive(Debug, thiserror::Error)]
pub enum ScoringError {
    #[error("practice {0} is not part of the model")]
    UnknownCode(PracticeCode),
    #[error("assessment was made against {found}, not {expected}")]
    ModelMismatch { expected: ModelRef, found: ModelRef },
    #[error("malformed profile document: {0}")]
    Syntax(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapabilityScore {
    #[serde(rename = "code")]
    pub capability: CapabilityRef,
    #[serde(rename = "achieved")]
    pub achieved_level: u32,
    /// Lowest-level practice that is not implemented; absent at max level.
    pub blocking_code: Option<PracticeCode>,
}

fn score_capability(
    capability: &Capability,
    cap_ref: CapabilityRef,
    max_level: u32,
    implemented: &impl Fn(PracticeCode) -> bool,
) -> CapabilityScore {
    let blocking = capability
        .practices
        .iter()
        .map(|p| p.code)
        .filter(|&code| !implemented(code))
        .min_by_key(|code| code.level);
    CapabilityScore {
        capability: cap_ref,
        achieved_level: blocking.map_or(max_level, |code| code.level - 1),
        blocking_code: blocking,
    }
}

/// Achieved level of one capability under `assessment`.
pub fn achieved_level(
    max_level: u32,
    focus_area: u32,
    capability: &Capability,
    assessment: &Assessment,
) -> CapabilityScore {
    score_capability(
        capability,
        CapabilityRef::new(focus_area, capability.index),
        max_level,
        &|code| assessment.is_implemented(code),
    )
}

/// Per-focus-area maturity plus the capability scores behind it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaturityProfile {
    pub assessment_id: AssessmentId,
    pub model_ref: ModelRef,
    pub vector: Vec<u32>,
    pub vector_text: String,
    pub capabilities: Vec<CapabilityScore>,
}

/// Dash-joined rendering of a maturity vector, e.g. `4-3-6-7`.
pub fn vector_text(vector: &[u32]) -> String {
    vector.iter().map(ToString::to_string).collect::<Vec<_>>().join("-")
}

impl MaturityProfile {
    pub fn focus_area_maturity(&self, index: u32) -> Option<u32> {
        self.vector.get(index.checked_sub(1)? as usize).copied()
    }

    pub fn capability(&self, cap: CapabilityRef) -> Option<&CapabilityScore> {
        self.capabilities.iter().find(|c| c.capability == cap)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profiles always serialize")
    }

    pub fn from_json(input: &str) -> Result<Self, ScoringError> {
        let profile: Self = serde_json::from_str(input).map_err(|e| ScoringError::Syntax(e.to_string()))?;
        if profile.vector_text != vector_text(&profile.vector) {
            return Err(ScoringError::Syntax(format!(
                "vector_text `{}` does not match vector",
                profile.vector_text
            )));
        }
        Ok(profile)
    }
}

impl fmt::Display for MaturityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.vector_text)
    }
}

fn profile_with(
    model: &MaturityModel,
    assessment_id: &AssessmentId,
    implemented: &impl Fn(PracticeCode) -> bool,
) -> MaturityProfile {
    let mut vector = Vec::with_capacity(model.focus_areas().len());
    let mut capabilities = Vec::with_capacity(model.capability_count());
    for fa in model.focus_areas() {
        let mut maturity = model.max_level();
        for cap in &fa.capabilities {
            let score = score_capability(
                cap,
                CapabilityRef::new(fa.index, cap.index),
                model.max_level(),
                implemented,
            );
            maturity = maturity.min(score.achieved_level);
            capabilities.push(score);
        }
        vector.push(maturity);
    }
    MaturityProfile {
        assessment_id: assessment_id.clone(),
        model_ref: model.model_ref(),
        vector_text: vector_text(&vector),
        vector,
        capabilities,
    }
}

/// Scores an assessment. Pure and deterministic.
pub fn profile(model: &MaturityModel, assessment: &Assessment) -> MaturityProfile {
    profile_with(model, &assessment.id, &|code| assessment.is_implemented(code))
}

/// Like [`profile`] but refuses an assessment made against another model.
pub fn checked_profile(model: &MaturityModel, assessment: &Assessment) -> Result<MaturityProfile, ScoringError> {
    let expected = model.model_ref();
    if assessment.model_ref != expected {
        return Err(ScoringError::ModelMismatch {
            expected,
            found: assessment.model_ref.clone(),
        });
    }
    Ok(profile(model, assessment))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapItem {
    pub focus_area: u32,
    pub code: PracticeCode,
    pub current_level: u32,
    /// Focus-area maturity if only this practice became implemented.
    pub unlocked_level: u32,
}

impl GapItem {
    pub fn lift(&self) -> u32 {
        self.unlocked_level - self.current_level
    }
}

/// One item per blocking practice, largest lift first, ties by code.
pub fn gap_analysis(model: &MaturityModel, assessment: &Assessment) -> Vec<GapItem> {
    let base = profile(model, assessment);
    let mut gaps: Vec<GapItem> = base
        .capabilities
        .iter()
        .filter_map(|score| score.blocking_code)
        .map(|code| {
            let flipped = profile_with(model, &assessment.id, &|c| c == code || assessment.is_implemented(c));
            let fa = code.focus_area;
            GapItem {
                focus_area: fa,
                code,
                current_level: base.focus_area_maturity(fa).unwrap_or(0),
                unlocked_level: flipped.focus_area_maturity(fa).unwrap_or(0),
            }
        })
        .collect();
    gaps.sort_by(|a, b| b.lift().cmp(&a.lift()).then(a.code.cmp(&b.code)));
    gaps
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flip {
    pub code: PracticeCode,
    pub state: PracticeState,
}

impl Flip {
    pub fn implement(code: PracticeCode) -> Self {
        Self {
            code,
            state: PracticeState::Implemented,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhatIfResult {
    pub flipped: Vec<Flip>,
    pub before: MaturityProfile,
    pub after: MaturityProfile,
}

impl WhatIfResult {
    /// Per-focus-area change, `after - before`.
    pub fn delta(&self) -> Vec<i64> {
        self.before
            .vector
            .iter()
            .zip(&self.after.vector)
            .map(|(&b, &a)| i64::from(a) - i64::from(b))
            .collect()
    }
}

/// Scores the assessment as if each flip applied. Nothing is modified.
/// When a code appears twice, the last flip wins.
pub fn what_if(model: &MaturityModel, assessment: &Assessment, flips: &[Flip]) -> Result<WhatIfResult, ScoringError> {
    let mut overlay: BTreeMap<PracticeCode, PracticeState> = BTreeMap::new();
    for flip in flips {
        if !model.contains(flip.code) {
            return Err(ScoringError::UnknownCode(flip.code));
        }
        overlay.insert(flip.code, flip.state);
    }
    let before = profile(model, assessment);
    let after = profile_with(model, &assessment.id, &|code| match overlay.get(&code) {
        Some(state) => *state == PracticeState::Implemented,
        None => assessment.is_implemented(code),
    });
    Ok(WhatIfResult {
        flipped: overlay.into_iter().map(|(code, state)| Flip { code, state }).collect(),
        before,
        after,
    })
}
