//! Differential testing of JavaScript engines.
//!
//! Two ways of finding discrepancies between engines live here: running one
//! engine's regression tests on the others (transplantation), and fuzzing
//! tests that pass everywhere and comparing what the engines do with the
//! mutants. Warnings from either are prioritized, clustered, scheduled for
//! human inspection, and minimized.

pub mod cluster;
pub mod conformance;
pub mod corpus;
pub mod engine;
pub mod fuzz;
pub mod js;
pub mod miner;
pub mod mock;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod runner;
pub mod transplant;
pub mod triage;
