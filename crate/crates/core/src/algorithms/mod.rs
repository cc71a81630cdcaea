//! The outer path-following loops, their initializers and the baselines.

mod hd;
mod init;
mod run;
mod tighten;

pub use hd::{hd_baseline, HdOutcome};
pub use init::{heuristic_seed, initialize, meets_thresholds, min_threshold_ratio, InitOutcome};
pub use run::{
    extract_grouping, harden, run_algorithm1, run_algorithm2, run_from, Hardened, IterRecord,
    RunOptions, RunTrace, Termination,
};
pub use tighten::{bs_energy, tighten, ul_energy};

/// Which of the two algorithms a run or initialization is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    Alg1,
    Alg2,
}
