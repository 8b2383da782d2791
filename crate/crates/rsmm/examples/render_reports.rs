//! Renders the ESMValTool matrix in every output format.
//!
//!     cargo run --example render_reports -- html > esmvaltool.html

use rsmm::model::bundled_rsmm;
use rsmm::report::{render_matrix, ReportFormat, ReportOptions};
use rsmm::scoring::profile;

fn main() {
    let model = bundled_rsmm();
    let assessment = rsmm::case_study::esmvaltool();
    let p = profile(&model, &assessment);
    let formats: Vec<String> = match std::env::args().nth(1) {
        Some(f) => vec![f],
        None => ["text", "markdown"].map(String::from).to_vec(),
    };
    for name in formats {
        let format: ReportFormat = name.parse().expect("text, markdown, html or structured");
        let options = ReportOptions {
            include_gaps: true,
            ..ReportOptions::format(format)
        };
        print!("{}", render_matrix(&model, &assessment, &p, &options).unwrap());
    }
}
