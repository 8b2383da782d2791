use serde::{Deserialize, Serialize};

use super::{Assessment, PracticeState};
use crate::model::{MaturityModel, PracticeCode};
use crate::scoring;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    /// A dependent practice is implemented while its prerequisite is not.
    DependencyViolation,
    /// A capability's level is capped by a practice nobody has answered.
    UnknownBlocking,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyFinding {
    pub kind: FindingKind,
    /// For a dependency violation: `[prerequisite, dependent]`.
    pub codes: Vec<PracticeCode>,
    pub message: String,
}

/// Warnings about an assessment. Findings never feed back into scores.
pub fn check_consistency(model: &MaturityModel, assessment: &Assessment) -> Vec<ConsistencyFinding> {
    let mut findings = Vec::new();
    for edge in model.dependencies() {
        let prerequisite = assessment.state(edge.prerequisite);
        if assessment.is_implemented(edge.dependent) && prerequisite != PracticeState::Implemented {
            findings.push(ConsistencyFinding {
                kind: FindingKind::DependencyViolation,
                codes: vec![edge.prerequisite, edge.dependent],
                message: format!(
                    "{} is implemented but its prerequisite {} is {}",
                    edge.dependent, edge.prerequisite, prerequisite
                ),
            });
        }
    }
    for (fa, cap) in model.capabilities() {
        let score = scoring::achieved_level(model.max_level(), fa.index, cap, assessment);
        if let Some(code) = score.blocking_code {
            if assessment.state(code) == PracticeState::Unknown {
                findings.push(ConsistencyFinding {
                    kind: FindingKind::UnknownBlocking,
                    codes: vec![code],
                    message: format!(
                        "capability {} stops at level {} on unanswered practice {}",
                        score.capability, score.achieved_level, code
                    ),
                });
            }
        }
    }
    findings
}
