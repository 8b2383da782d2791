//! Runs the evidence probes against a local checkout (default: this crate).
//!
//!     cargo run --example probe_local_repo -- /path/to/repo

use chrono::Utc;
use rsmm::evidence::remote::RemoteOptions;
use rsmm::evidence::{default_rules, scan_repository};

fn main() {
    let target = std::env::args()
        .nth(1)
        .unwrap_or_else(|| env!("CARGO_MANIFEST_DIR").to_string());
    let report = match scan_repository(&target, &default_rules(), &RemoteOptions::default(), None, Utc::now()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    println!("{} files scanned in {}", report.file_count, report.origin);
    for r in &report.results {
        println!(
            "  {:<20} {:<6} {:?}  {}",
            r.rule_id,
            r.target.to_string(),
            r.outcome,
            r.detail
        );
    }
    for p in &report.evidence.proposals {
        println!("proposal {} -> {}", p.code, p.state);
    }
}
