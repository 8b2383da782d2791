//! Hypothetical flips never touch the stored assessment.
//!
//!     cargo run --example what_if -- 1.2.5 1.2.6

use rsmm::model::{bundled_rsmm, PracticeCode};
use rsmm::report::{render_what_if, ReportOptions};
use rsmm::scoring::{what_if, Flip};

fn main() {
    let model = bundled_rsmm();
    let mut codes: Vec<String> = std::env::args().skip(1).collect();
    if codes.is_empty() {
        codes = vec!["1.2.5".into(), "1.2.6".into()];
    }
    let flips: Vec<Flip> = codes
        .iter()
        .map(|c| Flip::implement(c.parse::<PracticeCode>().expect("practice code like 1.2.5")))
        .collect();
    match what_if(&model, &rsmm::case_study::ggir(), &flips) {
        Ok(result) => print!("{}", render_what_if(&result, &ReportOptions::default())),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
