//! Lists the next practices to implement for GGIR, most impactful first.
//!
//!     cargo run --example gap_analysis

use rsmm::model::bundled_rsmm;
use rsmm::report::{render_gap_report, ReportFormat, ReportOptions};
use rsmm::scoring::gap_analysis;

fn main() {
    let model = bundled_rsmm();
    let gaps = gap_analysis(&model, &rsmm::case_study::ggir());
    print!(
        "{}",
        render_gap_report(&model, &gaps, &ReportOptions::format(ReportFormat::Text))
    );
}
