//! Simulation scenarios, replication studies and the real-data workflow.
//!
//! - [`scenario`]: the four data-generating laws and their true AUCs
//! - [`study`]: replication studies and the learning-rate study
//! - [`data`]: `score,group` CSV files
//! - [`analyze`]: single-method fits and the four-method comparison
//! - [`report`]: aligned-text tables for all of the above

pub mod analyze;
pub mod data;
pub mod report;
pub mod scenario;
pub mod study;

pub use analyze::{analyze_data, analyze_file, AnalysisConfig, AnalysisReport, MethodReport};
pub use scenario::{generate, true_auc, Scenario};
pub use study::{omega_study, run_study, Method, OmegaStudyRow, StudyConfig, StudyResult};
