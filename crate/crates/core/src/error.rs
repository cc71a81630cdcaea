use fdgroup_conic::{ProgramError, SolveStatus};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("could not parse configuration: {0}")]
    ConfigParse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("layout sampling gave up after {0} draws")]
    LayoutSampling(usize),
    #[error("expansion point unusable at {what} (user {user}, group {group})")]
    ExpansionPoint {
        what: &'static str,
        user: usize,
        group: usize,
    },
    #[error("non-finite coefficient in {what} for user {user}, group {group}")]
    NonFiniteCoefficient {
        what: &'static str,
        user: usize,
        group: usize,
    },
    #[error("degenerate reference in bilinear bound: x_ref={x_ref}, y_ref={y_ref}")]
    DegenerateReference { x_ref: f64, y_ref: f64 },
    #[error("subproblem not solved: {0}")]
    Extraction(SolveStatus),
    #[error("invalid subproblem: {0}")]
    Program(#[from] ProgramError),
    #[error("rate thresholds unattainable: best min ratio {best_ratio:.4} after {iterations} maximin solves")]
    InfeasibleScenario { best_ratio: f64, iterations: usize },
}

pub type Result<T> = std::result::Result<T, CoreError>;
