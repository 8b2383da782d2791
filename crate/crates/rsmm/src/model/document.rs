//! Serialized form of a maturity model file.
//!
//! Every object keeps unrecognised fields in an `extra` map so that a file
//! written by a newer tool survives a load/save cycle untouched.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::code::PracticeCode;

pub type Extra = BTreeMap<String, Value>;

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub metadata: ModelMetadata,
    pub max_level: u32,
    pub focus_areas: Vec<FocusArea>,
    #[serde(default)]
    pub dependencies: Vec<DependencyEdge>,
    /// Named practices or capabilities whose cell is not (yet) known.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<Annotation>,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub model_name: String,
    pub version: String,
    #[serde(default)]
    pub source: String,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusArea {
    pub index: u32,
    pub name: String,
    pub capabilities: Vec<Capability>,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capability {
    pub index: u32,
    pub name: String,
    pub practices: Vec<Practice>,
    /// Set when the name is a stand-in for one not yet published.
    #[serde(default, skip_serializing_if = "is_false")]
    pub placeholder: bool,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Practice {
    pub code: PracticeCode,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub criteria: Vec<CriterionItem>,
    #[serde(default)]
    pub resources: Vec<String>,
    #[serde(default)]
    pub references: Vec<String>,
    /// Cell is known to hold a practice but its description set is not
    /// bundled. Only placeholder practices may have no criteria.
    #[serde(default, skip_serializing_if = "is_false")]
    pub placeholder: bool,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Practice {
    pub fn level(&self) -> u32 {
        self.code.level
    }

    /// Criteria ordered Must, Should, Could, keeping file order within a
    /// priority.
    pub fn criteria_by_priority(&self) -> Vec<&CriterionItem> {
        let mut items: Vec<&CriterionItem> = self.criteria.iter().collect();
        items.sort_by_key(|c| c.priority);
        items
    }
}

/// MoSCoW priority without "Won't".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Priority {
    #[serde(rename = "M")]
    Must,
    #[serde(rename = "S")]
    Should,
    #[serde(rename = "C")]
    Could,
}

impl Priority {
    pub fn letter(self) -> char {
        match self {
            Priority::Must => 'M',
            Priority::Should => 'S',
            Priority::Could => 'C',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionItem {
    pub priority: Priority,
    pub text: String,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyEdge {
    pub prerequisite: PracticeCode,
    pub dependent: PracticeCode,
    #[serde(flatten)]
    pub extra: Extra,
}

impl DependencyEdge {
    pub fn new(prerequisite: PracticeCode, dependent: PracticeCode) -> Self {
        Self {
            prerequisite,
            dependent,
            extra: Extra::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus_area: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capability: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(default)]
    pub note: String,
    #[serde(flatten)]
    pub extra: Extra,
}
