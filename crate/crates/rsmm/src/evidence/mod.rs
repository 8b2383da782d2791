//! Automated evidence collection: repository snapshots, declarative probe
//! rules, and conversion of probe results into assessment proposals.
//!
//! Probes never decide a practice is *not* implemented. A rule that finds
//! nothing only leaves an informational note; absence of a file is weak
//! evidence that the practice is missing.

pub mod remote;
pub mod rules;
pub mod snapshot;

use std::path::Path;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::assessment::{EvidenceRecord, EvidenceSource, PracticeState, ProbeProposal};
use crate::model::PracticeCode;
use remote::{HttpTransport, RemoteError, RemoteOptions, Transport};

pub use rules::{
    default_rules, parse_rules, run_probes, validate_rules, ProbeOutcome, ProbeResult, ProbeRule, RuleError,
};
pub use snapshot::{snapshot_local, PlatformMetadata, RepoSnapshot, SnapshotError, SnapshotOptions};

/// Probe results turned into assessment input.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProbeEvidence {
    /// State changes to merge.
    pub proposals: Vec<ProbeProposal>,
    /// Negative findings, kept for the record only.
    pub informational: Vec<Informational>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Informational {
    pub code: PracticeCode,
    pub evidence: EvidenceRecord,
}

pub fn to_probe_evidence(results: &[ProbeResult], observed_at: DateTime<Utc>) -> ProbeEvidence {
    let mut out = ProbeEvidence::default();
    for r in results {
        match r.outcome {
            ProbeOutcome::Detected => {
                let locator = r.locator.clone().unwrap_or_else(|| format!("rule:{}", r.rule_id));
                let record = EvidenceRecord::probe(
                    r.confidence,
                    format!("{}: {}", r.rule_id, r.detail),
                    locator,
                    observed_at,
                )
                .asserting(PracticeState::Implemented);
                out.proposals.push(ProbeProposal {
                    code: r.target,
                    state: PracticeState::Implemented,
                    evidence: record,
                });
            }
            ProbeOutcome::NotDetected => {
                let record = EvidenceRecord {
                    source: EvidenceSource::Probe,
                    confidence: r.confidence,
                    note: format!("{}: {}", r.rule_id, r.detail),
                    locator: Some(format!("rule:{}", r.rule_id)),
                    observed_at,
                    asserts: None,
                };
                out.informational.push(Informational {
                    code: r.target,
                    evidence: record,
                });
            }
            ProbeOutcome::Inapplicable => {}
        }
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
}

/// Everything one scan of a repository produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub origin: String,
    pub file_count: usize,
    pub truncated: bool,
    pub warnings: Vec<String>,
    pub results: Vec<ProbeResult>,
    pub evidence: ProbeEvidence,
}

/// Snapshots `locator` (a local path or a hosted-repository URL), runs
/// `rules` and converts the results. Remote locators use `transport`, or
/// a live HTTP client when none is given.
pub fn scan_repository(
    locator: &str,
    rules: &[ProbeRule],
    remote_options: &RemoteOptions,
    transport: Option<&dyn Transport>,
    observed_at: DateTime<Utc>,
) -> Result<ScanReport, ScanError> {
    let content_globs = SnapshotOptions::for_rules(rules).content_globs;
    let snapshot = if remote::is_remote_locator(locator) {
        let mut options = remote_options.clone();
        options.snapshot.content_globs = content_globs;
        match transport {
            Some(t) => remote::snapshot_remote(locator, t, &options)?,
            None => {
                let live = HttpTransport::new(Duration::from_secs(30)).map_err(|e| RemoteError::Network(e.0))?;
                remote::snapshot_remote(locator, &live, &options)?
            }
        }
    } else {
        let options = SnapshotOptions {
            content_globs,
            ..remote_options.snapshot.clone()
        };
        snapshot_local(Path::new(locator), &options)?
    };
    let results = run_probes(&snapshot, rules);
    let evidence = to_probe_evidence(&results, observed_at);
    Ok(ScanReport {
        origin: snapshot.origin,
        file_count: snapshot.files.len(),
        truncated: snapshot.truncated,
        warnings: snapshot.warnings,
        results,
        evidence,
    })
}
