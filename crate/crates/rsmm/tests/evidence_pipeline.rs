mod common;

use std::collections::BTreeSet;
use std::time::Duration;

use chrono::{TimeZone, Utc};
use rsmm::assessment::{Assessment, Confidence, EvidenceRecord, EvidenceSource, PracticeState, ProjectInfo};
use rsmm::evidence::remote::{snapshot_remote, RemoteError, RemoteOptions, ReplayTransport};
use rsmm::evidence::{default_rules, scan_repository, ProbeOutcome, ProbeResult, ScanError, SnapshotOptions};
use rsmm::model::bundled_rsmm;

use common::{fixture_repo, replay_fixture};

fn ids(results: &[ProbeResult], outcome: ProbeOutcome) -> BTreeSet<String> {
    results
        .iter()
        .filter(|r| r.outcome == outcome)
        .map(|r| r.rule_id.clone())
        .collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn local_scan(dir: &std::path::Path) -> rsmm::evidence::ScanReport {
    let now = Utc.timestamp_opt(1_700_000_000, 0).unwrap();
    scan_repository(
        dir.to_str().unwrap(),
        &default_rules(),
        &RemoteOptions::default(),
        None,
        now,
    )
    .unwrap()
}

fn fast() -> RemoteOptions {
    RemoteOptions {
        backoff: Duration::ZERO,
        ..RemoteOptions::default()
    }
}

const ALL_LOCAL: &[&str] = &[
    "citation-file",
    "ci-workflow",
    "code-of-conduct",
    "codemeta",
    "contributing",
    "doi-badge",
    "license-file",
    "readme-usage",
    "releases-changelog",
    "software-directory",
    "tests",
];

#[test]
fn well_kept_repository() {
    let repo = fixture_repo(&[
        ("LICENSE", "MIT License"),
        ("CITATION.cff", "cff-version: 1.2.0\n"),
        ("CODE_OF_CONDUCT.md", "# Contributor Covenant"),
        (".github/workflows/ci.yml", "on: push"),
        ("tests/test_core.py", "def test_x(): pass"),
        ("README.md", "# tool\n\n## Usage\n\nrun it\n"),
        ("src/tool/__init__.py", ""),
    ]);
    let report = local_scan(repo.path());
    assert_eq!(
        ids(&report.results, ProbeOutcome::Detected),
        set(&[
            "citation-file",
            "ci-workflow",
            "code-of-conduct",
            "license-file",
            "readme-usage",
            "tests"
        ])
    );
    assert_eq!(
        ids(&report.results, ProbeOutcome::NotDetected),
        set(&[
            "codemeta",
            "contributing",
            "doi-badge",
            "releases-changelog",
            "software-directory"
        ])
    );
    // No platform facts for a local directory.
    assert_eq!(
        ids(&report.results, ProbeOutcome::Inapplicable),
        set(&["license-platform"])
    );
    let codes: BTreeSet<String> = report.evidence.proposals.iter().map(|p| p.code.to_string()).collect();
    assert_eq!(codes, set(&["1.2.4", "1.2.7", "2.2.2", "2.3.1", "3.3.2", "4.2.2"]));
    assert!(report
        .evidence
        .proposals
        .iter()
        .all(|p| p.evidence.confidence == Confidence::Heuristic && p.evidence.locator.is_some()));
}

#[test]
fn bare_repository() {
    let repo = fixture_repo(&[("main.py", "print('hi')")]);
    let report = local_scan(repo.path());
    assert!(ids(&report.results, ProbeOutcome::Detected).is_empty());
    assert_eq!(ids(&report.results, ProbeOutcome::NotDetected), set(ALL_LOCAL));
    assert!(report.evidence.proposals.is_empty());
    assert_eq!(report.evidence.informational.len(), ALL_LOCAL.len());
}

#[test]
fn each_artifact_alone() {
    let cases: &[(&str, &str, &str)] = &[
        ("LICENSE", "Apache", "license-file"),
        ("CITATION.cff", "cff-version: 1.2.0", "citation-file"),
        ("CODE_OF_CONDUCT.md", "be kind", "code-of-conduct"),
        (".gitlab-ci.yml", "test: script", "ci-workflow"),
        ("pkg/tests/test_a.py", "", "tests"),
    ];
    for (path, text, rule) in cases {
        let repo = fixture_repo(&[(path, text)]);
        let report = local_scan(repo.path());
        assert_eq!(ids(&report.results, ProbeOutcome::Detected), set(&[rule]), "{path}");
    }
}

#[test]
fn probes_never_override_manual_answers() {
    let model = bundled_rsmm();
    let t = Utc.timestamp_opt(1_700_000_000, 0).unwrap();
    let coc = "3.3.2".parse().unwrap();
    let lic = "2.2.2".parse().unwrap();
    let a = Assessment::new(&model, ProjectInfo::named("Tool"), t)
        .unwrap()
        .set_status(
            &model,
            coc,
            PracticeState::NotImplemented,
            Some(EvidenceRecord::manual("code of conduct is a stub, not adopted", t)),
            t,
        )
        .unwrap();
    let repo = fixture_repo(&[("CODE_OF_CONDUCT.md", "TODO"), ("LICENSE", "MIT")]);
    let report = local_scan(repo.path());
    let merged = a.merge_probe_results(&model, &report.evidence.proposals, t).unwrap();
    assert_eq!(merged.assessment.state(coc), PracticeState::NotImplemented);
    assert_eq!(merged.overridden, vec![coc]);
    assert_eq!(merged.assessment.state(lic), PracticeState::Implemented);
    let trail = &merged.assessment.statuses[&coc].evidence;
    assert_eq!(trail.len(), 2, "probe evidence is still recorded");
    assert_eq!(trail[0].source, EvidenceSource::Manual);
    assert_eq!(trail[1].source, EvidenceSource::Probe);
}

#[test]
fn remote_snapshot_from_replay() {
    let replay = ReplayTransport::load(replay_fixture("tool_ok.json")).unwrap();
    let now = Utc.timestamp_opt(1_700_000_000, 0).unwrap();
    let report = scan_repository(
        "https://github.com/example/tool",
        &default_rules(),
        &fast(),
        Some(&replay),
        now,
    )
    .unwrap();
    assert_eq!(report.file_count, 7);
    assert_eq!(
        ids(&report.results, ProbeOutcome::Detected),
        set(&[
            "ci-workflow",
            "citation-file",
            "doi-badge",
            "license-file",
            "license-platform",
            "readme-usage",
            "releases-changelog",
            "software-directory",
            "tests",
        ])
    );
    let platform = report.results.iter().find(|r| r.rule_id == "license-platform").unwrap();
    assert_eq!(platform.confidence, Confidence::Certain);
    assert_eq!(
        platform.locator.as_deref(),
        Some("https://github.com/example/tool#license")
    );

    let requests = replay.requests();
    let base = "https://api.github.com/repos/example/tool";
    assert_eq!(
        &requests[..4],
        [
            base.to_string(),
            format!("{base}/git/trees/main?recursive=1"),
            format!("{base}/tags?per_page=100"),
            format!("{base}/releases?per_page=100"),
        ]
    );
    // Only the files some content rule needs are downloaded.
    let mut fetched: Vec<&String> = requests[4..].iter().collect();
    fetched.sort();
    assert_eq!(
        fetched,
        [
            &format!("{base}/contents/CITATION.cff?ref=main"),
            &format!("{base}/contents/README.md?ref=main")
        ]
    );
}

#[test]
fn remote_failures_map_to_distinct_errors() {
    let now = Utc.timestamp_opt(1_700_000_000, 0).unwrap();
    let cases = [
        ("not_found.json", "not_found", 1),
        ("rate_limited.json", "rate_limited", 4),
        ("rate_limited_403.json", "rate_limited", 4),
        ("upstream_500.json", "upstream", 4),
        ("unauthorized.json", "auth", 1),
        ("unreachable.json", "network", 4),
    ];
    for (fixture, kind, attempts) in cases {
        let replay = ReplayTransport::load(replay_fixture(fixture)).unwrap();
        let err = scan_repository(
            "https://github.com/example/tool",
            &default_rules(),
            &fast(),
            Some(&replay),
            now,
        )
        .unwrap_err();
        let ScanError::Remote(remote) = err else {
            panic!("{fixture}: expected a remote error");
        };
        assert_eq!(remote.kind(), kind, "{fixture}: {remote}");
        assert_eq!(replay.requests().len(), attempts, "{fixture}");
    }
}

#[test]
fn rate_limit_recovers_within_retry_budget() {
    let replay = ReplayTransport::load(replay_fixture("recovers_after_429.json")).unwrap();
    let mut options = fast();
    options.snapshot = SnapshotOptions::for_rules(&default_rules());
    let snap = snapshot_remote("https://github.com/example/tool", &replay, &options).unwrap();
    assert_eq!(snap.files.len(), 7);
    assert_eq!(snap.contents.len(), 2);
    assert_eq!(snap.platform.unwrap().tags, ["v1.1.0", "v1.0.0"]);
}

#[test]
fn content_fetches_respect_concurrency_bound() {
    // Twenty READMEs in subdirectories, all content-probed.
    let base = "https://api.github.com/repos/o/r";
    let mut interactions = vec![
        serde_json::json!({"url": base, "body": {"default_branch": "main"}}),
        serde_json::json!({"url": format!("{base}/tags?per_page=100"), "body": []}),
        serde_json::json!({"url": format!("{base}/releases?per_page=100"), "body": []}),
    ];
    let mut tree = Vec::new();
    for i in 0..20 {
        let path = format!("d{i:02}/README.md");
        tree.push(serde_json::json!({"path": path, "type": "blob", "size": 5}));
        interactions.push(serde_json::json!({
            "url": format!("{base}/contents/{path}?ref=main"),
            "body": {"encoding": "base64", "content": "aGVsbG8="}
        }));
    }
    interactions.push(serde_json::json!({"url": format!("{base}/git/trees/main?recursive=1"), "body": {"tree": tree}}));
    let doc = serde_json::json!({ "interactions": interactions }).to_string();
    let replay = ReplayTransport::from_json(&doc)
        .unwrap()
        .with_latency(Duration::from_millis(15));
    let options = RemoteOptions {
        concurrency: 3,
        snapshot: SnapshotOptions {
            content_globs: vec!["**/README*".into()],
            ..SnapshotOptions::default()
        },
        ..fast()
    };
    let snap = snapshot_remote("o/r", &replay, &options).unwrap();
    assert_eq!(snap.contents.len(), 20);
    assert!(replay.peak_concurrency() <= 3, "peak {}", replay.peak_concurrency());
    assert!(replay.peak_concurrency() >= 2, "fetches should overlap");
}

#[test]
fn invalid_locator_is_rejected_before_any_request() {
    let replay = ReplayTransport::new(Vec::new());
    let err = snapshot_remote("https://github.com/just-owner", &replay, &fast()).unwrap_err();
    assert!(matches!(err, RemoteError::InvalidUrl(_)));
    assert!(replay.requests().is_empty());
}
