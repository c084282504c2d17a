//! Library behind the `cogbeam` binary: single-instance solves, sweep
//! execution with deterministic substreams, and the validation suites.

pub mod report;
pub mod solve;
pub mod suites;
pub mod sweep;

/// Substream tags partitioning the global seed; every consumer of randomness
/// owns a disjoint stream so runs are reproducible regardless of scheduling.
pub mod tags {
    /// Secondary-link placement draws (random-placement templates).
    pub const PLACEMENT: u64 = 1;
    /// Channel realization draws.
    pub const CHANNEL: u64 = 2;
    /// Randomized-rounding phase draws.
    pub const ROUNDING: u64 = 3;
    /// Monte Carlo oracle draws.
    pub const ORACLE: u64 = 4;
}
