//! Directory-backed assessment storage, one JSON document per assessment.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use super::{Assessment, AssessmentError, AssessmentId};
use crate::model::MaturityModel;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("assessment `{0}` not found")]
    NotFound(AssessmentId),
    #[error("assessment `{id}` changed: expected version {expected}, found {actual}")]
    Conflict {
        id: AssessmentId,
        expected: String,
        actual: String,
    },
    #[error("invalid assessment `{id}`: {source}")]
    Invalid {
        id: String,
        #[source]
        source: AssessmentError,
    },
    #[error("storage I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct StoredAssessment {
    pub assessment: Assessment,
    /// Content hash of the stored document; used as the HTTP entity tag.
    pub version: String,
    pub bytes: Vec<u8>,
}

pub fn content_version(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest[..12].iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes to one id are serialized; readers never take the lock since
/// documents are replaced by atomic rename.
#[derive(Debug)]
pub struct AssessmentStore {
    dir: PathBuf,
    locks: Mutex<HashMap<AssessmentId, Arc<Mutex<()>>>>,
}

impl AssessmentStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| io_err(&dir, source))?;
        Ok(Self {
            dir,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_of(&self, id: &AssessmentId) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    pub fn exists(&self, id: &AssessmentId) -> bool {
        self.path_of(id).is_file()
    }

    pub fn list(&self) -> Result<Vec<AssessmentId>, StoreError> {
        let entries = fs::read_dir(&self.dir).map_err(|source| io_err(&self.dir, source))?;
        let mut ids = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|source| io_err(&self.dir, source))?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            if let Some(id) = path
                .file_stem()
                .and_then(|s| s.to_str())
                .and_then(|s| AssessmentId::new(s).ok())
            {
                ids.push(id);
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn load(&self, id: &AssessmentId, model: &MaturityModel) -> Result<StoredAssessment, StoreError> {
        let path = self.path_of(id);
        let bytes = match fs::read(&path) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.clone())),
            Err(source) => return Err(io_err(&path, source)),
        };
        let text = String::from_utf8_lossy(&bytes);
        let assessment = Assessment::from_json_for(&text, model).map_err(|source| StoreError::Invalid {
            id: id.to_string(),
            source,
        })?;
        Ok(StoredAssessment {
            assessment,
            version: content_version(&bytes),
            bytes,
        })
    }

    fn lock_for(&self, id: &AssessmentId) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|p| p.into_inner());
        locks.entry(id.clone()).or_default().clone()
    }

    fn current_version(&self, path: &Path) -> Result<Option<String>, StoreError> {
        match fs::read(path) {
            Ok(bytes) => Ok(Some(content_version(&bytes))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(source) => Err(io_err(path, source)),
        }
    }

    /// Persists `assessment`. With `expected_version`, the write only goes
    /// through if the stored document still has that version (`*` matches
    /// any existing document). Returns the new version.
    pub fn save(&self, assessment: &Assessment, expected_version: Option<&str>) -> Result<String, StoreError> {
        let id = &assessment.id;
        let lock = self.lock_for(id);
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        let path = self.path_of(id);

        if let Some(expected) = expected_version {
            let current = self.current_version(&path)?;
            let matches = match (&current, expected) {
                (Some(_), "*") => true,
                (Some(v), e) => v == e,
                (None, _) => false,
            };
            if !matches {
                return Err(StoreError::Conflict {
                    id: id.clone(),
                    expected: expected.to_string(),
                    actual: current.unwrap_or_else(|| "none".into()),
                });
            }
        }

        let mut bytes = assessment.to_json().into_bytes();
        bytes.push(b'\n');
        let tmp = self.dir.join(format!(".{id}.json.tmp"));
        {
            let mut file = fs::File::create(&tmp).map_err(|source| io_err(&tmp, source))?;
            file.write_all(&bytes).map_err(|source| io_err(&tmp, source))?;
            file.sync_all().map_err(|source| io_err(&tmp, source))?;
        }
        fs::rename(&tmp, &path).map_err(|source| io_err(&path, source))?;
        Ok(content_version(&bytes))
    }
}

fn io_err(path: &Path, source: std::io::Error) -> StoreError {
    StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}
