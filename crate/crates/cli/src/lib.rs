//! Harness library behind the `stldecomp` binary: scenario ingestion,
//! pipeline orchestration, verification, and report emission.

pub mod pipeline;
pub mod reports;
pub mod scenario;
