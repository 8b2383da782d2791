//! Scores the two bundled case studies and prints their maturity profiles.
//!
//!     cargo run --example case_study_profile

use rsmm::model::bundled_rsmm;
use rsmm::scoring::profile;

fn main() {
    let model = bundled_rsmm();
    for assessment in [rsmm::case_study::ggir(), rsmm::case_study::esmvaltool()] {
        let p = profile(&model, &assessment);
        println!("{:<12} {}", assessment.project.name, p.vector_text);
        for cap in &p.capabilities {
            let blocker = cap
                .blocking_code
                .map(|c| format!(" (blocked by {c})"))
                .unwrap_or_default();
            println!("  {}  level {:>2}{blocker}", cap.capability, cap.achieved_level);
        }
    }
}
