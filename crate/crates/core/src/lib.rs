//! Proof-bundle checking: declaration model, DAG analysis, traceability,
//! runtime witness harness, source-analysis witnesses and evidence reports.

pub mod bundle;
pub mod conformance;
pub mod dag;
pub mod harness;
pub mod outcome;
pub mod profile;
pub mod report;
pub mod trace;

pub use bundle::{load_bundle, parse_bundle, BundleError, BundleErrors, ProofBundle};
pub use outcome::{Outcome, RunSummary, Status};
