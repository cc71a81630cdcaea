//! Primal-dual interior-point method for LP/SOCP.
//!
//! The program is mapped to `min cᵀx s.t. Ax = b, Gx + s = h, s ∈ K`
//! and solved through the homogeneous self-dual embedding with
//! Nesterov–Todd scaling and Mehrotra predictor-corrector steps.

mod cones;
mod ipm;
mod linsys;
mod standard;

use std::fmt;

use crate::error::ProgramError;
use crate::program::ConicProgram;

pub use cones::{ConeLayout, NtScaling};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Primal and dual residual tolerance (relative to data norms).
    pub feas_tol: f64,
    /// Looser tolerances accepted as `AlmostOptimal` when progress stalls.
    pub reduced_tol: f64,
    pub max_ipm_iters: usize,
    pub static_regularization: f64,
    pub equilibrate: bool,
    pub record_history: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            feas_tol: 1e-8,
            reduced_tol: 1e-5,
            max_ipm_iters: 200,
            static_regularization: 1e-9,
            equilibrate: true,
            record_history: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    AlmostOptimal,
    Infeasible,
    Unbounded,
    IterLimit,
    NumericalFailure,
}

impl SolveStatus {
    /// Whether `x` can be used as a solution.
    pub fn is_solved(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::AlmostOptimal)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::AlmostOptimal => "almost_optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterLimit => "iter_limit",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relative residuals at the returned iterate. For `Infeasible` and
/// `Unbounded` results `primal`/`dual` hold the certificate residual.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// One interior-point iterate, objectives in the maximization sense.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationLog {
    pub primal_obj: f64,
    pub dual_obj: f64,
    /// `|primal_obj − dual_obj − s·z/τ²|`-free bound: the primal objective
    /// may exceed the dual one by at most this residual-driven amount.
    pub residual_bound: f64,
    pub primal_res: f64,
    pub dual_res: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// Objective of the original maximization at `x`.
    pub obj: f64,
    pub kkt: KktResiduals,
    pub iters: usize,
    pub history: Vec<IterationLog>,
}

/// Solves `program` from the default starting point.
pub fn solve(program: &ConicProgram, settings: &SolverSettings) -> Result<SolverResult, ProgramError> {
    solve_warm(program, settings, None)
}

/// Like [`solve`], seeding the primal iterate with `x0` when given.
pub fn solve_warm(
    program: &ConicProgram,
    settings: &SolverSettings,
    x0: Option<&[f64]>,
) -> Result<SolverResult, ProgramError> {
    program.validate()?;
    let sf = standard::StandardForm::new(program, settings.equilibrate);
    let out = ipm::run(&sf, settings, x0);
    let x = sf.unscale_x(&out.x);
    let obj = program.objective_value(&x);
    Ok(SolverResult {
        status: out.status,
        x,
        obj,
        kkt: out.kkt,
        iters: out.iters,
        history: out.history,
    })
}
