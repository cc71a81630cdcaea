use std::time::Instant;

use fdgroup_conic::{solve_warm, ConicProgram, SolveStatus, SolverSettings};

use super::init::{initialize, meets_thresholds};
use super::tighten::tighten;
use super::AlgorithmKind;
use crate::error::Result;
use crate::model::{
    build_subproblem, encode_point, extract_point, FixedAssignment, ProblemClass, SubproblemKind,
};
use crate::point::DesignPoint;
use crate::rates::{check_feasibility, group_rates, weighted_sum_rate};
use crate::system::{ChannelSet, SystemConfig, C64};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub solver: SolverSettings,
    /// Tolerance of the feasibility residuals recorded per iteration.
    pub feas_tol: f64,
    /// Called with every built subproblem, e.g. to dump it.
    pub keep_first_program: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            solver: SolverSettings::default(),
            feas_tol: 1e-6,
            keep_first_program: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    /// Optimal value of the subproblem, nats.
    pub surrogate: f64,
    /// Exact weighted sum rate at the accepted iterate, nats.
    pub exact: f64,
    pub status: SolveStatus,
    /// The solve failed and the iterate is the midpoint toward its output;
    /// `surrogate` then belongs to the undamped point.
    pub damped: bool,
    pub max_residual: f64,
    pub ipm_iters: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// Relative change of the exact objective fell below ε_err.
    Tolerance,
    MaxIters,
    /// The solver returned a point with a lower exact objective than the
    /// expansion point, which is itself feasible for the subproblem; the
    /// expansion point is kept and the run stops.
    RejectedStep { decrease: f64 },
    SolverFailure(SolveStatus),
}

/// Hard 0/1 grouping and the per-user, per-group rates it yields.
#[derive(Debug, Clone, PartialEq)]
pub struct Hardened {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// t_g·α·ln(1+γ) at `user * G + group`, nats.
    pub dl_rates: Vec<f64>,
    pub ul_rates: Vec<f64>,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub kind: AlgorithmKind,
    pub init_solves: usize,
    /// Exact objective of the starting point.
    pub start_objective: f64,
    pub iterations: Vec<IterRecord>,
    pub termination: Termination,
    pub converged: bool,
    /// Final iterate in the caller's units.
    pub point: DesignPoint,
    pub objective: f64,
    pub hardened: Hardened,
    pub first_program: Option<ConicProgram>,
}

impl RunTrace {
    pub fn exact_sequence(&self) -> Vec<f64> {
        std::iter::once(self.start_objective)
            .chain(self.iterations.iter().map(|r| r.exact))
            .collect()
    }

    /// Largest drop between consecutive accepted objectives, or zero.
    pub fn max_decrease(&self) -> f64 {
        self.exact_sequence()
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }

    pub fn rejected_decrease(&self) -> f64 {
        match self.termination {
            Termination::RejectedStep { decrease } => decrease,
            _ => 0.0,
        }
    }
}

/// α = 1 iff ‖w_k^g‖ > ε, β = 1 iff p_ℓ^g > ε.
pub fn extract_grouping(pt: &DesignPoint, eps: f64) -> (Vec<f64>, Vec<f64>) {
    let alpha = pt
        .w
        .iter()
        .map(|w| if w.norm() > eps { 1.0 } else { 0.0 })
        .collect();
    let beta = pt
        .p
        .iter()
        .map(|&p| if p.abs() > eps { 1.0 } else { 0.0 })
        .collect();
    (alpha, beta)
}

pub fn harden(pt: &DesignPoint, ch: &ChannelSet, eps: f64) -> Hardened {
    let (alpha, beta) = extract_grouping(pt, eps);
    let mut hard = pt.clone();
    hard.alpha.clone_from(&alpha);
    hard.beta.clone_from(&beta);
    let r = group_rates(&hard, ch);
    let dl_rates: Vec<f64> = (0..hard.k * hard.g)
        .map(|i| hard.t[i % hard.g] * alpha[i] * r.dl[i])
        .collect();
    let ul_rates: Vec<f64> = (0..hard.l * hard.g)
        .map(|i| hard.t[i % hard.g] * beta[i] * r.ul[i])
        .collect();
    let total = dl_rates.iter().sum::<f64>() + ul_rates.iter().sum::<f64>();
    Hardened {
        alpha,
        beta,
        dl_rates,
        ul_rates,
        total,
    }
}

/// Midpoint of the primary variables of two points.
fn midpoint(a: &DesignPoint, b: &DesignPoint) -> DesignPoint {
    let mut m = a.clone();
    let half = C64::from(0.5);
    for (mw, bw) in m.w.iter_mut().zip(&b.w) {
        *mw = (&*mw + bw) * half;
    }
    let avg = |x: &mut Vec<f64>, y: &[f64]| x.iter_mut().zip(y).for_each(|(u, v)| *u = 0.5 * (*u + v));
    avg(&mut m.p, &b.p);
    avg(&mut m.alpha, &b.alpha);
    avg(&mut m.beta, &b.beta);
    avg(&mut m.t, &b.t);
    m
}

/// The SCA loop from a point that already meets the thresholds. `ch` and
/// `cfg` are in the units the loop runs in; the trace reports the same.
pub fn run_from(
    kind: AlgorithmKind,
    start: DesignPoint,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    fixed: Option<&FixedAssignment>,
    opts: &RunOptions,
) -> Result<RunTrace> {
    let class = match kind {
        AlgorithmKind::Alg1 => ProblemClass::Alg1Main,
        AlgorithmKind::Alg2 => ProblemClass::Alg2Main,
    };
    let sub = SubproblemKind::for_config(class, cfg);
    let mut cur = start;
    if let Some(f) = fixed {
        f.apply(&mut cur);
    }
    tighten(&mut cur, ch, cfg, class);
    let start_objective = weighted_sum_rate(&cur, ch);
    let mut cur_obj = start_objective;
    let mut iterations = Vec::new();
    let mut termination = Termination::MaxIters;
    let mut first_program = None;
    for _ in 0..cfg.max_iters {
        let clock = Instant::now();
        let prog = build_subproblem(sub, &cur, ch, cfg, fixed)?;
        let x0 = encode_point(&prog, &cur, &cur);
        let res = solve_warm(&prog, &opts.solver, Some(&x0))?;
        if opts.keep_first_program && first_program.is_none() {
            first_program = Some(prog.clone());
        }
        let mut damped = false;
        let candidate = match extract_point(&prog, &res, &cur) {
            Ok(p) => Some(p),
            Err(_) if res.x.iter().all(|v| v.is_finite()) => {
                // One damped step toward the previous iterate.
                damped = true;
                let raw = crate::model::extract::decode(&prog, &res.x, &cur);
                Some(midpoint(&cur, &raw))
            }
            Err(_) => None,
        };
        let mut next = match candidate {
            Some(p) => p,
            None => {
                termination = Termination::SolverFailure(res.status);
                break;
            }
        };
        if let Some(f) = fixed {
            f.apply(&mut next);
        }
        tighten(&mut next, ch, cfg, class);
        let next_obj = weighted_sum_rate(&next, ch);
        if !res.status.is_solved() && (next_obj < cur_obj || !meets_thresholds(&next, ch, cfg)) {
            termination = Termination::SolverFailure(res.status);
            break;
        }
        if next_obj < cur_obj {
            termination = Termination::RejectedStep {
                decrease: cur_obj - next_obj,
            };
            break;
        }
        let report = check_feasibility(&next, ch, cfg, opts.feas_tol);
        iterations.push(IterRecord {
            surrogate: res.obj,
            exact: next_obj,
            status: res.status,
            damped,
            max_residual: report.worst,
            ipm_iters: res.iters,
            wall_ms: clock.elapsed().as_secs_f64() * 1e3,
        });
        let change = (next_obj - cur_obj).abs() / next_obj.abs().max(f64::MIN_POSITIVE);
        cur = next;
        cur_obj = next_obj;
        if change <= cfg.eps_err {
            termination = Termination::Tolerance;
            break;
        }
    }
    let converged = matches!(
        termination,
        Termination::Tolerance | Termination::RejectedStep { .. }
    );
    let hardened = harden(&cur, ch, cfg.eps_group);
    Ok(RunTrace {
        kind,
        init_solves: 0,
        start_objective,
        iterations,
        termination,
        converged,
        point: cur,
        objective: cur_obj,
        hardened,
        first_program,
    })
}

fn run_normalized(
    kind: AlgorithmKind,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    fixed: Option<&FixedAssignment>,
    opts: &RunOptions,
) -> Result<RunTrace> {
    cfg.validate()?;
    let cfg_n = cfg.normalized();
    let ch_n = ch.normalized(cfg.p_bs, cfg.p_ul);
    let init = initialize(kind, &ch_n, &cfg_n, fixed, opts)?;
    let mut trace = run_from(kind, init.point, &ch_n, &cfg_n, fixed, opts)?;
    trace.init_solves = init.solves;
    trace.point = trace.point.denormalized(cfg.p_bs, cfg.p_ul, cfg.sigma_dl);
    Ok(trace)
}

/// Algorithm 1: beamformers and UL powers for fixed α, β and t (all ones
/// and 1/G unless given).
pub fn run_algorithm1(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    fixed: Option<&FixedAssignment>,
    opts: &RunOptions,
) -> Result<RunTrace> {
    run_normalized(AlgorithmKind::Alg1, ch, cfg, fixed, opts)
}

/// Algorithm 2: joint grouping, time allocation, beamforming and power.
/// With `fixed` the grouping and time variables are pinned.
pub fn run_algorithm2(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    fixed: Option<&FixedAssignment>,
    opts: &RunOptions,
) -> Result<RunTrace> {
    run_normalized(AlgorithmKind::Alg2, ch, cfg, fixed, opts)
}
