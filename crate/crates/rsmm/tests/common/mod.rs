#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rsmm::assessment::AssessmentStore;

pub const FROZEN: &str = "2024-03-01T12:00:00Z";

pub fn replay_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/replay")
        .join(name)
}

pub fn case_study_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data/case-studies")
        .join(name)
}

/// Temporary directory populated with `files` (path, contents).
pub fn fixture_repo(files: &[(&str, &str)]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (path, text) in files {
        let full = dir.path().join(path);
        std::fs::create_dir_all(full.parent().unwrap()).unwrap();
        std::fs::write(full, text).unwrap();
    }
    dir
}

pub fn rsmm(data_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsmm"))
        .arg("--data-dir")
        .arg(data_dir)
        .arg("--frozen-time")
        .arg(FROZEN)
        .args(args)
        .env_remove("RSMM_DATA_DIR")
        .env_remove("RSMM_HOST_TOKEN")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Store seeded with the two case-study assessments.
pub fn seeded_store() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let store = AssessmentStore::open(dir.path()).unwrap();
    store.save(&rsmm::case_study::ggir(), None).unwrap();
    store.save(&rsmm::case_study::esmvaltool(), None).unwrap();
    dir
}
