use std::collections::BTreeMap;
use std::path::Path;

use globset::GlobSet;
use serde::{Deserialize, Serialize};

use super::rules::{build_globset, ProbeRule};

pub const DEFAULT_MAX_FILES: usize = 10_000;
pub const DEFAULT_MAX_FILE_BYTES: u64 = 1024 * 1024;
pub const DEFAULT_MAX_DEPTH: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("repository path {0} does not exist")]
    Missing(String),
    #[error("{0} is not a directory")]
    NotADirectory(String),
    #[error("cannot read {path}: {message}")]
    Unreadable { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedFile {
    pub path: String,
    pub size: u64,
}

/// Facts reported by a hosting platform rather than read from files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlatformMetadata {
    pub default_branch: Option<String>,
    pub tags: Vec<String>,
    pub releases: Vec<String>,
    pub topics: Vec<String>,
    /// SPDX identifier as reported by the platform.
    pub license: Option<String>,
    pub ci_configured: bool,
}

/// What the probes get to see of a repository.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoSnapshot {
    pub origin: String,
    /// Repo-root-relative, forward-slash paths, sorted.
    pub files: Vec<IndexedFile>,
    /// Contents of the probe-relevant files that were small enough to load.
    pub contents: BTreeMap<String, String>,
    pub platform: Option<PlatformMetadata>,
    /// Set when the file-count bound cut the index short.
    pub truncated: bool,
    pub warnings: Vec<String>,
}

impl RepoSnapshot {
    pub fn empty(origin: impl Into<String>) -> Self {
        Self {
            origin: origin.into(),
            ..Self::default()
        }
    }

    /// Builds a snapshot from an in-memory file list; handy for tests and
    /// for callers that already have the files.
    pub fn from_files<'a>(origin: impl Into<String>, files: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut snapshot = Self::empty(origin);
        for (path, text) in files {
            snapshot.files.push(IndexedFile {
                path: path.to_string(),
                size: text.len() as u64,
            });
            snapshot.contents.insert(path.to_string(), text.to_string());
        }
        snapshot.files.sort_by(|a, b| a.path.cmp(&b.path));
        snapshot
    }

    pub fn with_platform(mut self, platform: PlatformMetadata) -> Self {
        self.platform = Some(platform);
        self
    }
}

#[derive(Debug, Clone)]
pub struct SnapshotOptions {
    pub max_files: usize,
    pub max_file_bytes: u64,
    pub max_depth: usize,
    /// Files whose contents get loaded; everything else is only indexed.
    pub content_globs: Vec<String>,
}

impl Default for SnapshotOptions {
    fn default() -> Self {
        Self {
            max_files: DEFAULT_MAX_FILES,
            max_file_bytes: DEFAULT_MAX_FILE_BYTES,
            max_depth: DEFAULT_MAX_DEPTH,
            content_globs: Vec::new(),
        }
    }
}

impl SnapshotOptions {
    /// Loads contents for exactly the paths that some rule inspects.
    pub fn for_rules(rules: &[ProbeRule]) -> Self {
        let mut content_globs: Vec<String> = rules
            .iter()
            .filter(|r| r.content_pattern.is_some())
            .flat_map(|r| r.paths.iter().cloned())
            .collect();
        content_globs.sort();
        content_globs.dedup();
        Self {
            content_globs,
            ..Self::default()
        }
    }

    pub(crate) fn content_matcher(&self) -> GlobSet {
        // Globs come from validated rules; a bad one here just loads nothing.
        build_globset(&self.content_globs).unwrap_or_else(|_| GlobSet::empty())
    }
}

fn normalize(rel: &Path) -> String {
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Indexes a local working copy. Version-control metadata is skipped.
pub fn snapshot_local(root: impl AsRef<Path>, options: &SnapshotOptions) -> Result<RepoSnapshot, SnapshotError> {
    let root = root.as_ref();
    let shown = root.display().to_string();
    let meta = std::fs::metadata(root).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => SnapshotError::Missing(shown.clone()),
        _ => SnapshotError::Unreadable {
            path: shown.clone(),
            message: e.to_string(),
        },
    })?;
    if !meta.is_dir() {
        return Err(SnapshotError::NotADirectory(shown));
    }
    std::fs::read_dir(root).map_err(|e| SnapshotError::Unreadable {
        path: shown.clone(),
        message: e.to_string(),
    })?;

    let content = options.content_matcher();
    let mut snapshot = RepoSnapshot::empty(shown);
    let walker = walkdir::WalkDir::new(root)
        .max_depth(options.max_depth)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !(e.file_type().is_dir() && e.file_name() == ".git"));

    for entry in walker {
        let entry = match entry {
            Ok(entry) => entry,
            Err(e) => {
                snapshot.warnings.push(format!("skipped unreadable entry: {e}"));
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        if snapshot.files.len() >= options.max_files {
            snapshot.truncated = true;
            snapshot
                .warnings
                .push(format!("file index truncated at {} files", options.max_files));
            break;
        }
        let rel = normalize(entry.path().strip_prefix(root).unwrap_or(entry.path()));
        let size = entry.metadata().map(|m| m.len()).unwrap_or(0);
        if content.is_match(&rel) {
            if size > options.max_file_bytes {
                snapshot.warnings.push(format!(
                    "{rel}: {size} bytes exceeds the {} byte limit, content skipped",
                    options.max_file_bytes
                ));
            } else {
                match std::fs::read(entry.path()) {
                    Ok(bytes) => {
                        snapshot
                            .contents
                            .insert(rel.clone(), String::from_utf8_lossy(&bytes).into_owned());
                    }
                    Err(e) => snapshot.warnings.push(format!("{rel}: {e}")),
                }
            }
        }
        snapshot.files.push(IndexedFile { path: rel, size });
    }
    Ok(snapshot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn indexes_nested_files_with_forward_slashes() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("docs/guide")).unwrap();
        fs::create_dir_all(dir.path().join(".git/objects")).unwrap();
        fs::write(dir.path().join("LICENSE"), "MIT").unwrap();
        fs::write(dir.path().join("CITATION.cff"), "cff-version: 1.2.0").unwrap();
        fs::write(dir.path().join("docs/guide/intro.md"), "# Intro").unwrap();
        fs::write(dir.path().join(".git/objects/x"), "blob").unwrap();

        let options = SnapshotOptions {
            content_globs: vec!["docs/**".into()],
            ..SnapshotOptions::default()
        };
        let snap = snapshot_local(dir.path(), &options).unwrap();
        let paths: Vec<&str> = snap.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(paths, ["CITATION.cff", "LICENSE", "docs/guide/intro.md"]);
        assert_eq!(snap.contents.keys().collect::<Vec<_>>(), ["docs/guide/intro.md"]);
        assert!(!snap.truncated);
    }

    #[test]
    fn empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        let snap = snapshot_local(dir.path(), &SnapshotOptions::default()).unwrap();
        assert!(snap.files.is_empty());
        assert!(snap.contents.is_empty());
    }

    #[test]
    fn file_count_bound_truncates() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..12 {
            fs::write(dir.path().join(format!("f{i:02}.txt")), "x").unwrap();
        }
        let options = SnapshotOptions {
            max_files: 10,
            ..SnapshotOptions::default()
        };
        let snap = snapshot_local(dir.path(), &options).unwrap();
        assert_eq!(snap.files.len(), 10);
        assert!(snap.truncated);
        assert!(snap.warnings.iter().any(|w| w.contains("truncated")));
    }

    #[test]
    fn oversized_content_is_skipped_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("README.md"), "x".repeat(64)).unwrap();
        let options = SnapshotOptions {
            max_file_bytes: 16,
            content_globs: vec!["README*".into()],
            ..SnapshotOptions::default()
        };
        let snap = snapshot_local(dir.path(), &options).unwrap();
        assert_eq!(snap.files.len(), 1);
        assert!(snap.contents.is_empty());
        assert_eq!(snap.warnings.len(), 1);
    }

    #[test]
    fn missing_and_non_directory_paths() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            snapshot_local(dir.path().join("nope"), &SnapshotOptions::default()),
            Err(SnapshotError::Missing(_))
        ));
        let file = dir.path().join("file");
        fs::write(&file, "x").unwrap();
        assert!(matches!(
            snapshot_local(&file, &SnapshotOptions::default()),
            Err(SnapshotError::NotADirectory(_))
        ));
    }
}
