mod common;

use std::io::{BufRead, BufReader};
use std::process::{Command, Stdio};

use rsmm::assessment::{AssessmentId, AssessmentStore, PracticeState};
use rsmm::model::bundled_rsmm;
use rsmm::report::ExportBundle;
use rsmm::scoring::profile;

use common::{case_study_file, fixture_repo, replay_fixture, rsmm, seeded_store, stderr, stdout};

fn stored(dir: &std::path::Path, id: &str) -> rsmm::assessment::Assessment {
    AssessmentStore::open(dir)
        .unwrap()
        .load(&AssessmentId::new(id).unwrap(), &bundled_rsmm())
        .unwrap()
        .assessment
}

#[test]
fn model_show() {
    let dir = tempfile::tempdir().unwrap();
    let out = rsmm(dir.path(), &["model", "show"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("RSMM v1.0: 4 focus areas, 17 capabilities, 79 practices"));

    let out = rsmm(dir.path(), &["--format", "structured", "model", "show"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["practice_count"], 79);
    assert_eq!(v["capability_count"], 17);
}

#[test]
fn broken_model_file_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"metadata\": {\n    \"model_name\": \"X\",\n  }\n}").unwrap();
    let out = rsmm(dir.path(), &["--model", broken.to_str().unwrap(), "model", "show"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
}

#[test]
fn assess_from_case_study_answers() {
    let dir = tempfile::tempdir().unwrap();
    let answers = case_study_file("ggir.json");
    let out = rsmm(dir.path(), &["assess", "--answers", answers.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("maturity 4-3-6-7"));
    let out = rsmm(dir.path(), &["score", "ggir"]);
    assert!(stdout(&out).contains("Maturity profile: 4-3-6-7"));

    // Same id again needs --force.
    let out = rsmm(dir.path(), &["assess", "--answers", answers.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = rsmm(
        dir.path(),
        &["assess", "--force", "--answers", answers.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn assess_from_empty_and_bad_answers() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    let out = rsmm(
        &data,
        &[
            "assess",
            "--project",
            "Blank Tool",
            "--answers",
            empty.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let a = stored(&data, "blank-tool");
    assert_eq!(a.count(PracticeState::Unknown), 79);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"2.3.5": "yes", "2.3.2": "no"}"#).unwrap();
    let out = rsmm(
        &data,
        &["assess", "--project", "Bad", "--answers", bad.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("2.3.2"), "{}", stderr(&out));
    let ids = AssessmentStore::open(&data).unwrap().list().unwrap();
    assert_eq!(
        ids,
        [AssessmentId::new("blank-tool").unwrap()],
        "nothing saved for the bad answers"
    );
}

#[test]
fn score_case_studies_in_every_format() {
    let data = seeded_store();
    let out = rsmm(data.path(), &["score", "ggir"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("Maturity profile: 4-3-6-7"));
    let out = rsmm(data.path(), &["score", "esmvaltool"]);
    assert!(stdout(&out).contains("Maturity profile: 5-4-8-8"));
    let out = rsmm(data.path(), &["--format", "markdown", "score", "ggir"]);
    assert!(stdout(&out).contains("**4-3-6-7**"));
    let out = rsmm(
        data.path(),
        &["--format", "html", "score", "ggir", "--evidence", "--gaps"],
    );
    assert!(stdout(&out).starts_with("<!DOCTYPE html>"));
    let out = rsmm(data.path(), &["--ascii", "score", "ggir"]);
    assert!(stdout(&out).is_ascii());
    let out = rsmm(data.path(), &["--format", "structured", "score", "ggir"]);
    let bundle = ExportBundle::parse(&stdout(&out), &bundled_rsmm()).unwrap();
    assert_eq!(bundle.profile.vector_text, "4-3-6-7");
}

#[test]
fn missing_assessment_exits_2() {
    let data = seeded_store();
    for cmd in [
        &["score", "nope"][..],
        &["gaps", "nope"],
        &["whatif", "nope", "--implement", "1.2.5"],
        &["export", "nope"],
    ] {
        let out = rsmm(data.path(), cmd);
        assert_eq!(out.status.code(), Some(2), "{cmd:?}");
        assert!(stderr(&out).contains("nope"));
    }
}

#[test]
fn whatif_and_gaps() {
    let data = seeded_store();
    let out = rsmm(
        data.path(),
        &["whatif", "ggir", "--implement", "1.2.5", "--implement", "1.2.6"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("before: 4-3-6-7"));
    assert!(text.contains("after:  7-3-6-7"));

    let out = rsmm(data.path(), &["whatif", "ggir", "--unimplement", "2.3.1"]);
    assert!(stdout(&out).contains("after:  4-0-6-7"));

    let out = rsmm(data.path(), &["whatif", "ggir", "--implement", "1.1.1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = rsmm(data.path(), &["gaps", "ggir"]);
    let first = stdout(&out).lines().nth(1).unwrap().to_string();
    assert!(first.contains("1.2.5") && first.contains("4 -> 5"), "{first}");

    // Nothing stored changed.
    assert_eq!(stored(data.path(), "ggir"), rsmm::case_study::ggir());
}

#[test]
fn gaps_on_complete_assessment() {
    let dir = tempfile::tempdir().unwrap();
    let all: serde_json::Map<String, serde_json::Value> = bundled_rsmm()
        .practice_codes()
        .into_iter()
        .map(|c| (c.to_string(), "implemented".into()))
        .collect();
    let answers = dir.path().join("all.json");
    std::fs::write(&answers, serde_json::to_string(&all).unwrap()).unwrap();
    let data = dir.path().join("data");
    let out = rsmm(
        &data,
        &["assess", "--project", "Done", "--answers", answers.to_str().unwrap()],
    );
    assert!(stdout(&out).contains("maturity 10-10-10-10"));
    let out = rsmm(&data, &["gaps", "done"]);
    assert_eq!(stdout(&out), "no gaps\n");
}

#[test]
fn scan_local_repository() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "{}").unwrap();
    rsmm(
        &data,
        &["assess", "--project", "Tool", "--answers", empty.to_str().unwrap()],
    );
    let repo = fixture_repo(&[("CODE_OF_CONDUCT.md", "# Code of Conduct"), ("src/lib.rs", "")]);

    let file = data.join("tool.json");
    let before = std::fs::read(&file).unwrap();
    let out = rsmm(&data, &["scan", "tool", repo.path().to_str().unwrap(), "--dry-run"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("proposal 3.3.2 -> implemented (changed)"));
    assert!(stdout(&out).contains("dry run"));
    assert_eq!(std::fs::read(&file).unwrap(), before, "dry run must not touch the file");

    let out = rsmm(&data, &["scan", "tool", repo.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let a = stored(&data, "tool");
    assert_eq!(a.state("3.3.2".parse().unwrap()), PracticeState::Implemented);
    assert_ne!(std::fs::read(&file).unwrap(), before);
}

#[test]
fn scan_remote_replays_and_exit_codes() {
    let data = seeded_store();
    let url = "https://github.com/example/tool";
    let ggir_file = data.path().join("ggir.json");
    let before = std::fs::read(&ggir_file).unwrap();
    let cases = [
        ("unreachable.json", 3),
        ("upstream_500.json", 3),
        ("rate_limited.json", 4),
        ("rate_limited_403.json", 4),
        ("unauthorized.json", 4),
        ("not_found.json", 2),
    ];
    for (fixture, code) in cases {
        let replay = replay_fixture(fixture);
        let out = rsmm(
            data.path(),
            &["scan", "ggir", url, "--replay", replay.to_str().unwrap()],
        );
        assert_eq!(out.status.code(), Some(code), "{fixture}: {}", stderr(&out));
    }
    assert_eq!(std::fs::read(&ggir_file).unwrap(), before);

    // Every GGIR practice carries a manual answer, so nothing flips.
    let replay = replay_fixture("tool_ok.json");
    let out = rsmm(
        data.path(),
        &["scan", "ggir", url, "--replay", replay.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("kept manual answer"));
    assert!(stdout(&out).contains("maturity 4-3-6-7 -> 4-3-6-7"));
}

#[test]
fn export_round_trips() {
    let data = seeded_store();
    let target = data.path().join("export.json");
    let out = rsmm(data.path(), &["export", "esmvaltool", "-o", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&target).unwrap();
    let model = bundled_rsmm();
    let bundle = ExportBundle::parse(&text, &model).unwrap();
    assert_eq!(profile(&model, &bundle.assessment), bundle.profile);
    assert_eq!(bundle.profile.vector_text, "5-4-8-8");
    let again = rsmm(data.path(), &["export", "esmvaltool"]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn outputs_are_deterministic_with_frozen_time() {
    let answers = case_study_file("esmvaltool.json");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = rsmm(d.path(), &["assess", "--answers", answers.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(
        std::fs::read(a.path().join("esmvaltool.json")).unwrap(),
        std::fs::read(b.path().join("esmvaltool.json")).unwrap()
    );
    let s1 = rsmm(a.path(), &["score", "esmvaltool", "--evidence"]);
    let s2 = rsmm(b.path(), &["score", "esmvaltool", "--evidence"]);
    assert_eq!(s1.stdout, s2.stdout);
}

#[test]
fn check_reports_unanswered_blockers() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("e.json");
    std::fs::write(&empty, "{}").unwrap();
    rsmm(
        dir.path(),
        &["assess", "--project", "New", "--answers", empty.to_str().unwrap()],
    );
    let out = rsmm(dir.path(), &["check", "new"]);
    assert_eq!(stdout(&out).lines().count(), 17);
    let data = seeded_store();
    assert_eq!(stdout(&rsmm(data.path(), &["check", "ggir"])), "no findings\n");
}

#[test]
fn serve_prints_port_and_answers() {
    let data = seeded_store();
    let mut child = Command::new(env!("CARGO_BIN_EXE_rsmm"))
        .args([
            "--data-dir",
            data.path().to_str().unwrap(),
            "serve",
            "--bind",
            "127.0.0.1:0",
        ])
        .env_remove("RSMM_API_TOKEN")
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let base = line
        .trim()
        .strip_prefix("listening on ")
        .expect("prints address")
        .to_string();
    let port: u16 = base.rsplit(':').next().unwrap().parse().unwrap();
    assert_ne!(port, 0);

    let client = reqwest::blocking::Client::new();
    let body = client
        .get(format!("{base}/api/v1/model"))
        .send()
        .unwrap()
        .text()
        .unwrap();
    let model: serde_json::Value = serde_json::from_str(&body).unwrap();
    let practices: usize = model["focus_areas"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|fa| fa["capabilities"].as_array().unwrap())
        .map(|c| c["practices"].as_array().unwrap().len())
        .sum();
    assert_eq!(practices, 79);

    // A second server on the same port cannot bind.
    let out = rsmm(data.path(), &["serve", "--bind", &format!("127.0.0.1:{port}")]);
    assert_eq!(out.status.code(), Some(5), "{}", stderr(&out));

    child.kill().unwrap();
    child.wait().unwrap();
}
