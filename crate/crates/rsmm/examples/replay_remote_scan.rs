//! Scans a hosted repository from a recorded API session, offline.
//!
//!     cargo run --example replay_remote_scan
//!     cargo run --example replay_remote_scan -- tests/fixtures/replay/rate_limited.json

use std::time::Duration;

use chrono::Utc;
use rsmm::evidence::remote::{RemoteOptions, ReplayTransport};
use rsmm::evidence::{default_rules, scan_repository, ProbeOutcome, ScanError};

fn main() {
    let fixture = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/replay/tool_ok.json").to_string());
    let replay = ReplayTransport::load(&fixture).expect("readable replay file");
    let options = RemoteOptions {
        backoff: Duration::ZERO,
        ..RemoteOptions::default()
    };
    let result = scan_repository(
        "https://github.com/example/tool",
        &default_rules(),
        &options,
        Some(&replay),
        Utc::now(),
    );
    match result {
        Ok(report) => {
            for r in report.results.iter().filter(|r| r.outcome == ProbeOutcome::Detected) {
                println!("detected {:<20} -> {}", r.rule_id, r.target);
            }
        }
        Err(ScanError::Remote(e)) => println!("remote error ({}): {e}", e.kind()),
        Err(e) => println!("error: {e}"),
    }
    println!("{} requests replayed", replay.requests().len());
}
