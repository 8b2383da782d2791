//! Focus-area maturity models: loading, validation and lookup.
//!
//! A model is a grid of focus areas, each split into capabilities, each
//! holding practices pinned to maturity levels. The engine makes no
//! assumption about a particular model beyond the file schema, so the
//! bundled RSMM v1.0 definition is just one data file among many.

mod code;
mod document;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use code::{CapabilityRef, CodeParseError, PracticeCode};
pub use document::{
    Annotation, Capability, CriterionItem, DependencyEdge, Extra, FocusArea, ModelDocument, ModelMetadata, Practice,
    Priority,
};

/// The bundled RSMM v1.0 file, shipped verbatim so it can be forked.
pub const RSMM_V1_JSON: &str = include_str!("../../data/rsmm-v1.0.json");

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("cannot read model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("metadata field `{0}` must not be empty")]
    EmptyMetadata(&'static str),
    #[error("max_level must be at least 1")]
    InvalidMaxLevel,
    #[error("model has no focus areas")]
    NoFocusAreas,
    #[error("{what} index {found} out of sequence (expected {expected})")]
    IndexSequence { what: String, expected: u32, found: u32 },
    #[error("{0} has an empty name")]
    EmptyName(String),
    #[error("focus area {0} has no capabilities")]
    EmptyFocusArea(u32),
    #[error("capability {0} has no practices")]
    EmptyCapability(CapabilityRef),
    #[error("practice {code} is listed under capability {found}")]
    MisplacedPractice { code: PracticeCode, found: CapabilityRef },
    #[error("practice {code} has level outside 1..={max_level}")]
    LevelOutOfRange { code: PracticeCode, max_level: u32 },
    #[error("duplicate practice code {0}")]
    DuplicateCode(PracticeCode),
    #[error("practice {0} has no implementation criteria and is not marked as a placeholder")]
    MissingCriteria(PracticeCode),
    #[error("dependency refers to unknown practice {0}")]
    UnknownDependencyEndpoint(PracticeCode),
    #[error("practice {0} depends on itself")]
    SelfDependency(PracticeCode),
    #[error(
        "dependency {prerequisite} -> {dependent} is level-inverted: a prerequisite cannot sit above its dependent"
    )]
    LevelInversion {
        prerequisite: PracticeCode,
        dependent: PracticeCode,
    },
    #[error("dependency cycle through {}", join_codes(.0))]
    DependencyCycle(Vec<PracticeCode>),
    #[error("practice {0} not found")]
    NotFound(PracticeCode),
}

fn join_codes(codes: &[PracticeCode]) -> String {
    codes.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Identifies the model an assessment was made against.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelRef {
    pub name: String,
    pub version: String,
}

impl std::fmt::Display for ModelRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} v{}", self.name, self.version)
    }
}

/// A validated maturity model. Immutable once built.
#[derive(Debug, Clone)]
pub struct MaturityModel {
    doc: ModelDocument,
    // code -> (focus area position, capability position, practice position)
    index: HashMap<PracticeCode, (usize, usize, usize)>,
}

impl PartialEq for MaturityModel {
    fn eq(&self, other: &Self) -> bool {
        self.doc == other.doc
    }
}

impl MaturityModel {
    /// Parses and validates a model file in canonical JSON form.
    pub fn from_json(input: &str) -> Result<Self, ModelError> {
        let doc: ModelDocument = serde_json::from_str(input).map_err(|e| ModelError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::try_from(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Canonical serialization: pretty-printed JSON, fields in schema order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("model documents always serialize")
    }

    pub fn document(&self) -> &ModelDocument {
        &self.doc
    }

    pub fn into_document(self) -> ModelDocument {
        self.doc
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.doc.metadata
    }

    pub fn model_ref(&self) -> ModelRef {
        ModelRef {
            name: self.doc.metadata.model_name.clone(),
            version: self.doc.metadata.version.clone(),
        }
    }

    pub fn max_level(&self) -> u32 {
        self.doc.max_level
    }

    pub fn focus_areas(&self) -> &[FocusArea] {
        &self.doc.focus_areas
    }

    pub fn dependencies(&self) -> &[DependencyEdge] {
        &self.doc.dependencies
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.doc.annotations
    }

    /// Capabilities in display order, with their focus area.
    pub fn capabilities(&self) -> impl Iterator<Item = (&FocusArea, &Capability)> {
        self.doc
            .focus_areas
            .iter()
            .flat_map(|fa| fa.capabilities.iter().map(move |cap| (fa, cap)))
    }

    /// Practices in matrix reading order: focus area, capability, level.
    pub fn practices(&self) -> impl Iterator<Item = &Practice> {
        self.capabilities().flat_map(|(_, cap)| cap.practices.iter())
    }

    pub fn practice_codes(&self) -> Vec<PracticeCode> {
        self.practices().map(|p| p.code).collect()
    }

    pub fn practice_count(&self) -> usize {
        self.index.len()
    }

    pub fn capability_count(&self) -> usize {
        self.capabilities().count()
    }

    pub fn contains(&self, code: PracticeCode) -> bool {
        self.index.contains_key(&code)
    }

    pub fn lookup(&self, code: PracticeCode) -> Result<&Practice, ModelError> {
        let &(f, c, p) = self.index.get(&code).ok_or(ModelError::NotFound(code))?;
        Ok(&self.doc.focus_areas[f].capabilities[c].practices[p])
    }

    pub fn capability(&self, cap: CapabilityRef) -> Option<&Capability> {
        self.doc
            .focus_areas
            .iter()
            .find(|fa| fa.index == cap.focus_area)?
            .capabilities
            .iter()
            .find(|c| c.index == cap.capability)
    }

    pub fn focus_area(&self, index: u32) -> Option<&FocusArea> {
        self.doc.focus_areas.iter().find(|fa| fa.index == index)
    }
}

impl TryFrom<ModelDocument> for MaturityModel {
    type Error = ModelError;

    fn try_from(doc: ModelDocument) -> Result<Self, ModelError> {
        let index = validate(&doc)?;
        Ok(Self { doc, index })
    }
}

impl FocusArea {
    pub fn practice_count(&self) -> usize {
        self.capabilities.iter().map(|c| c.practices.len()).sum()
    }
}

impl Capability {
    /// Practices sorted by level.
    pub fn practices_by_level(&self) -> Vec<&Practice> {
        let mut practices: Vec<&Practice> = self.practices.iter().collect();
        practices.sort_by_key(|p| p.code.level);
        practices
    }

    pub fn levels(&self) -> BTreeSet<u32> {
        self.practices.iter().map(|p| p.code.level).collect()
    }
}

fn check_sequence(what: impl Fn() -> String, expected: u32, found: u32) -> Result<(), ModelError> {
    if expected == found {
        Ok(())
    } else {
        Err(ModelError::IndexSequence {
            what: what(),
            expected,
            found,
        })
    }
}

fn validate(doc: &ModelDocument) -> Result<HashMap<PracticeCode, (usize, usize, usize)>, ModelError> {
    if doc.metadata.model_name.trim().is_empty() {
        return Err(ModelError::EmptyMetadata("model_name"));
    }
    if doc.metadata.version.trim().is_empty() {
        return Err(ModelError::EmptyMetadata("version"));
    }
    if doc.max_level == 0 {
        return Err(ModelError::InvalidMaxLevel);
    }
    if doc.focus_areas.is_empty() {
        return Err(ModelError::NoFocusAreas);
    }

    let mut index = HashMap::new();
    for (fi, fa) in doc.focus_areas.iter().enumerate() {
        check_sequence(|| "focus area".into(), fi as u32 + 1, fa.index)?;
        if fa.name.trim().is_empty() {
            return Err(ModelError::EmptyName(format!("focus area {}", fa.index)));
        }
        if fa.capabilities.is_empty() {
            return Err(ModelError::EmptyFocusArea(fa.index));
        }
        for (ci, cap) in fa.capabilities.iter().enumerate() {
            check_sequence(
                || format!("capability in focus area {}", fa.index),
                ci as u32 + 1,
                cap.index,
            )?;
            let cap_ref = CapabilityRef::new(fa.index, cap.index);
            if cap.name.trim().is_empty() {
                return Err(ModelError::EmptyName(format!("capability {cap_ref}")));
            }
            if cap.practices.is_empty() {
                return Err(ModelError::EmptyCapability(cap_ref));
            }
            for (pi, practice) in cap.practices.iter().enumerate() {
                let code = practice.code;
                if code.capability_ref() != cap_ref {
                    return Err(ModelError::MisplacedPractice { code, found: cap_ref });
                }
                if code.level == 0 || code.level > doc.max_level {
                    return Err(ModelError::LevelOutOfRange {
                        code,
                        max_level: doc.max_level,
                    });
                }
                if practice.name.trim().is_empty() {
                    return Err(ModelError::EmptyName(format!("practice {code}")));
                }
                if practice.criteria.is_empty() && !practice.placeholder {
                    return Err(ModelError::MissingCriteria(code));
                }
                // Code embeds the level, so a second practice on the same
                // level of a capability surfaces as a duplicate code.
                if index.insert(code, (fi, ci, pi)).is_some() {
                    return Err(ModelError::DuplicateCode(code));
                }
            }
        }
    }

    for edge in &doc.dependencies {
        for end in [edge.prerequisite, edge.dependent] {
            if !index.contains_key(&end) {
                return Err(ModelError::UnknownDependencyEndpoint(end));
            }
        }
        if edge.prerequisite == edge.dependent {
            return Err(ModelError::SelfDependency(edge.prerequisite));
        }
        if edge.prerequisite.level > edge.dependent.level {
            return Err(ModelError::LevelInversion {
                prerequisite: edge.prerequisite,
                dependent: edge.dependent,
            });
        }
    }
    check_acyclic(&doc.dependencies)?;
    Ok(index)
}

/// Kahn's algorithm; whatever cannot be peeled off lies on or behind a cycle.
fn check_acyclic(edges: &[DependencyEdge]) -> Result<(), ModelError> {
    let mut indegree: BTreeMap<PracticeCode, usize> = BTreeMap::new();
    let mut out: BTreeMap<PracticeCode, Vec<PracticeCode>> = BTreeMap::new();
    for e in edges {
        indegree.entry(e.prerequisite).or_default();
        *indegree.entry(e.dependent).or_default() += 1;
        out.entry(e.prerequisite).or_default().push(e.dependent);
    }
    let mut queue: VecDeque<PracticeCode> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&c, _)| c).collect();
    while let Some(code) = queue.pop_front() {
        for next in out.get(&code).into_iter().flatten() {
            let d = indegree.get_mut(next).expect("every endpoint has an entry");
            *d -= 1;
            if *d == 0 {
                queue.push_back(*next);
            }
        }
        indegree.remove(&code);
    }
    if indegree.is_empty() {
        Ok(())
    } else {
        Err(ModelError::DependencyCycle(indegree.into_keys().collect()))
    }
}

/// The embedded RSMM v1.0 definition.
pub fn bundled_rsmm() -> MaturityModel {
    MaturityModel::from_json(RSMM_V1_JSON).expect("bundled RSMM v1.0 model is valid")
}
