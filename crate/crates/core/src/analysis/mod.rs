//! Verification instruments: redundancy arithmetic, dependency tracing,
//! consistency trials and stationarity tests.

pub mod consistency;
pub mod redundancy;
pub mod stationarity;
pub mod taint;

pub use consistency::{verify_consistency, ConsistencyReport, TrialOutcome};
pub use redundancy::{redundancy_fraction, redundancy_ratio, redundancy_table};
pub use stationarity::{test_cyclostationarity, StationarityReport, Verdict};
pub use taint::{overlap_witness, trace_taint, verify_backward_rect, TaintTensor};
