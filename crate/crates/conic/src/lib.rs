//! Conic programs (linear + second-order cone), a plain-text dump format and
//! a self-contained interior-point solver.

pub mod dump;
pub mod error;
pub mod program;
pub mod solver;

pub use dump::{parse_program, write_program};
pub use error::{ParseError, ProgramError};
pub use program::{
    AffineExpr, ConicProgram, LinearConstraint, ProgramCensus, RotatedCone, SecondOrderCone,
    VarBlock, VarMap, VarRole,
};
pub use solver::{
    solve, solve_warm, IterationLog, KktResiduals, SolveStatus, SolverResult, SolverSettings,
};
