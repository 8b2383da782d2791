//! Maturity assessment for research software projects.
//!
//! The crate encodes focus-area maturity models (bundled: RSMM v1.0), keeps
//! per-project assessments with an evidence trail, scores them into
//! per-focus-area maturity profiles, and answers "what blocks the next
//! level" and "what if we did X" questions. Repository probes turn files
//! and hosting-platform metadata into heuristic evidence.
//!
//! ```
//! use rsmm::{case_study, model::bundled_rsmm, scoring::profile};
//!
//! let model = bundled_rsmm();
//! assert_eq!(profile(&model, &case_study::ggir()).vector_text, "4-3-6-7");
//! ```

pub mod assessment;
pub mod case_study;
pub mod cli;
pub mod evidence;
pub mod model;
pub mod report;
pub mod scoring;
pub mod service;
