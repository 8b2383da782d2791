//! Declarative probe rules and their evaluation.
//!
//! A rule fires when every matcher it declares is satisfied:
//!
//! * `paths`: glob list over the snapshot's file index. Matching is
//!   case-insensitive and `*` does not cross `/`; use `**/` for depth.
//! * `content_pattern`: a regular expression (Rust `regex` crate syntax,
//!   flags such as `(?im)` inline) that must match the contents of at
//!   least one file selected by `paths`.
//! * `platform`: a predicate over hosting-platform metadata.

use globset::{GlobBuilder, GlobSet, GlobSetBuilder};
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::snapshot::{PlatformMetadata, RepoSnapshot};
use crate::assessment::Confidence;
use crate::model::{MaturityModel, PracticeCode};

pub const DEFAULT_RULES_JSON: &str = include_str!("../../data/probe-rules.json");

#[derive(Debug, thiserror::Error)]
pub enum RuleError {
    #[error("syntax error in rule file at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("rule `{id}`: {message}")]
    Invalid { id: String, message: String },
    #[error("rule `{id}` targets {target}, which is not part of the model")]
    UnknownTarget { id: String, target: PracticeCode },
    #[error("duplicate rule id `{0}`")]
    DuplicateId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlatformFact {
    License,
    Tags,
    Releases,
    Topics,
    Ci,
    DefaultBranch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlatformPredicate {
    pub fact: PlatformFact,
    /// Without `equals` the fact only has to be present/non-empty. With it,
    /// some value must equal it, ignoring case.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equals: Option<String>,
}

impl PlatformPredicate {
    fn values(&self, meta: &PlatformMetadata) -> Vec<String> {
        match self.fact {
            PlatformFact::License => meta.license.iter().cloned().collect(),
            PlatformFact::Tags => meta.tags.clone(),
            PlatformFact::Releases => meta.releases.clone(),
            PlatformFact::Topics => meta.topics.clone(),
            PlatformFact::DefaultBranch => meta.default_branch.iter().cloned().collect(),
            PlatformFact::Ci => {
                if meta.ci_configured {
                    vec!["true".into()]
                } else {
                    Vec::new()
                }
            }
        }
    }

    fn holds(&self, meta: &PlatformMetadata) -> Option<String> {
        let values = self.values(meta);
        match &self.equals {
            None => values.into_iter().next(),
            Some(wanted) => values.into_iter().find(|v| v.eq_ignore_ascii_case(wanted)),
        }
    }

    fn fact_name(&self) -> &'static str {
        match self.fact {
            PlatformFact::License => "license",
            PlatformFact::Tags => "tags",
            PlatformFact::Releases => "releases",
            PlatformFact::Topics => "topics",
            PlatformFact::Ci => "ci",
            PlatformFact::DefaultBranch => "default_branch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeRule {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub target: PracticeCode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_pattern: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub platform: Option<PlatformPredicate>,
    pub confidence: Confidence,
}

impl ProbeRule {
    /// Structural checks that do not need a model.
    pub fn check(&self) -> Result<(), RuleError> {
        let invalid = |message: &str| RuleError::Invalid {
            id: self.id.clone(),
            message: message.to_string(),
        };
        if self.id.trim().is_empty() {
            return Err(invalid("empty id"));
        }
        if self.paths.is_empty() && self.platform.is_none() {
            return Err(invalid("needs `paths` or a `platform` predicate"));
        }
        if self.content_pattern.is_some() && self.paths.is_empty() {
            return Err(invalid("`content_pattern` needs `paths` to select files"));
        }
        // Only a fact reported by the platform is trusted as certain.
        if self.confidence == Confidence::Certain && (!self.paths.is_empty() || self.platform.is_none()) {
            return Err(invalid("only platform-metadata rules may be certain"));
        }
        build_globset(&self.paths).map_err(|e| invalid(&e))?;
        if let Some(pattern) = &self.content_pattern {
            Regex::new(pattern).map_err(|e| invalid(&e.to_string()))?;
        }
        Ok(())
    }
}

pub(crate) fn build_globset(globs: &[String]) -> Result<GlobSet, String> {
    let mut builder = GlobSetBuilder::new();
    for g in globs {
        let glob = GlobBuilder::new(g)
            .case_insensitive(true)
            .literal_separator(true)
            .build()
            .map_err(|e| e.to_string())?;
        builder.add(glob);
    }
    builder.build().map_err(|e| e.to_string())
}

/// Parses a rule file: a JSON array of rules.
pub fn parse_rules(input: &str) -> Result<Vec<ProbeRule>, RuleError> {
    let rules: Vec<ProbeRule> = serde_json::from_str(input).map_err(|e| RuleError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut seen = std::collections::HashSet::new();
    for rule in &rules {
        rule.check()?;
        if !seen.insert(rule.id.as_str()) {
            return Err(RuleError::DuplicateId(rule.id.clone()));
        }
    }
    Ok(rules)
}

/// Checks every rule target resolves in `model`.
pub fn validate_rules(rules: &[ProbeRule], model: &MaturityModel) -> Result<(), RuleError> {
    for rule in rules {
        if !model.contains(rule.target) {
            return Err(RuleError::UnknownTarget {
                id: rule.id.clone(),
                target: rule.target,
            });
        }
    }
    Ok(())
}

/// The bundled rule set. Targets point at cells of the bundled RSMM v1.0
/// model; several are provisional placements, see each rule's description.
pub fn default_rules() -> Vec<ProbeRule> {
    parse_rules(DEFAULT_RULES_JSON).expect("bundled probe rules are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeOutcome {
    Detected,
    NotDetected,
    /// The snapshot lacks what the rule needs to decide either way.
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub rule_id: String,
    pub target: PracticeCode,
    pub outcome: ProbeOutcome,
    pub confidence: Confidence,
    /// Matched path or platform locator; always set when detected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locator: Option<String>,
    pub detail: String,
}

fn evaluate(rule: &ProbeRule, snapshot: &RepoSnapshot) -> (ProbeOutcome, Option<String>, String) {
    use ProbeOutcome::*;

    let mut locator = None;
    let mut details = Vec::new();

    if !rule.paths.is_empty() {
        let globs = match build_globset(&rule.paths) {
            Ok(g) => g,
            Err(e) => return (Inapplicable, None, format!("bad path glob: {e}")),
        };
        let matched: Vec<&str> = snapshot
            .files
            .iter()
            .map(|f| f.path.as_str())
            .filter(|p| globs.is_match(p))
            .collect();
        if matched.is_empty() {
            return (NotDetected, None, format!("no file matches {}", rule.paths.join(", ")));
        }
        match &rule.content_pattern {
            None => {
                locator = Some(matched[0].to_string());
                details.push(format!("found {}", matched[0]));
            }
            Some(pattern) => {
                let re = match Regex::new(pattern) {
                    Ok(re) => re,
                    Err(e) => return (Inapplicable, None, format!("bad content pattern: {e}")),
                };
                let loaded: Vec<&str> = matched
                    .iter()
                    .copied()
                    .filter(|p| snapshot.contents.contains_key(*p))
                    .collect();
                if loaded.is_empty() {
                    return (
                        Inapplicable,
                        None,
                        format!("contents of {} not available", matched.join(", ")),
                    );
                }
                match loaded.iter().find(|p| re.is_match(&snapshot.contents[**p])) {
                    Some(hit) => {
                        locator = Some(hit.to_string());
                        details.push(format!("{hit} matches /{pattern}/"));
                    }
                    None => {
                        return (
                            NotDetected,
                            None,
                            format!("no match for /{pattern}/ in {}", loaded.join(", ")),
                        )
                    }
                }
            }
        }
    }

    if let Some(predicate) = &rule.platform {
        let Some(meta) = &snapshot.platform else {
            // A local working copy says nothing about the hosting platform.
            return (Inapplicable, None, "no platform metadata".into());
        };
        match predicate.holds(meta) {
            Some(value) => {
                if locator.is_none() {
                    locator = Some(format!("{}#{}", snapshot.origin, predicate.fact_name()));
                }
                details.push(format!("platform {} = {value}", predicate.fact_name()));
            }
            None => {
                return (
                    NotDetected,
                    None,
                    format!("platform {} not satisfied", predicate.fact_name()),
                )
            }
        }
    }
    (Detected, locator, details.join("; "))
}

/// One result per rule, in rule order. Pure in its inputs.
pub fn run_probes(snapshot: &RepoSnapshot, rules: &[ProbeRule]) -> Vec<ProbeResult> {
    rules
        .iter()
        .map(|rule| {
            let (outcome, locator, detail) = evaluate(rule, snapshot);
            ProbeResult {
                rule_id: rule.id.clone(),
                target: rule.target,
                outcome,
                confidence: rule.confidence,
                locator,
                detail,
            }
        })
        .collect()
}
