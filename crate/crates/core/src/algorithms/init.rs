use fdgroup_conic::solve_warm;

use super::run::RunOptions;
use super::tighten::tighten;
use super::AlgorithmKind;
use crate::error::{CoreError, Result};
use crate::model::{
    build_subproblem, encode_point, extract_point, threshold, FixedAssignment, ProblemClass,
    SubproblemKind,
};
use crate::point::DesignPoint;
use crate::rates::user_rates;
use crate::system::{ChannelSet, SystemConfig, C64};

pub const INIT_MAX_SOLVES: usize = 30;
/// Consecutive solves without this much gain in the min ratio end the
/// search early.
const STAGNATION_GAIN: f64 = 1e-4;
const STAGNATION_ROUNDS: usize = 3;

/// Smallest rate-to-threshold ratio over users with a positive
/// threshold; infinity when there are none.
pub fn min_threshold_ratio(pt: &DesignPoint, ch: &ChannelSet, cfg: &SystemConfig) -> f64 {
    let r = user_rates(pt, ch);
    let dl = r.dl.iter().filter(|_| cfg.rbar_dl > 0.0).map(|v| v / cfg.rbar_dl);
    let ul = r.ul.iter().filter(|_| cfg.rbar_ul > 0.0).map(|v| v / cfg.rbar_ul);
    dl.chain(ul).fold(f64::INFINITY, f64::min)
}

pub fn meets_thresholds(pt: &DesignPoint, ch: &ChannelSet, cfg: &SystemConfig) -> bool {
    let r = user_rates(pt, ch);
    r.dl.iter().all(|&v| v >= threshold(cfg.rbar_dl)) && r.ul.iter().all(|&v| v >= threshold(cfg.rbar_ul))
}

/// Maximum-ratio beamformers and equal UL amplitudes. Users whose index is
/// congruent to the group index get twice the power weight there, which
/// breaks the symmetry between otherwise identical groups.
pub fn heuristic_seed(kind: AlgorithmKind, ch: &ChannelSet, cfg: &SystemConfig) -> DesignPoint {
    let (k, l, g) = (cfg.k, cfg.l, cfg.g);
    let mut pt = DesignPoint::zeros(k, l, g, cfg.ntx);
    if kind == AlgorithmKind::Alg2 {
        pt.alpha.iter_mut().for_each(|a| *a = 0.5);
        pt.beta.iter_mut().for_each(|b| *b = 0.5);
    }
    let weight = |u: usize, grp: usize| if g > 1 && u % g == grp { 2.0 } else { 1.0 };
    let total: f64 = (0..k)
        .flat_map(|u| (0..g).map(move |grp| (u, grp)))
        .map(|(u, grp)| weight(u, grp))
        .sum();
    for u in 0..k {
        let n = ch.h[u].norm();
        for grp in 0..g {
            let i = pt.dl(u, grp);
            let scale = (cfg.p_bs * weight(u, grp) / total).sqrt();
            if n > 0.0 {
                pt.w[i] = &ch.h[u] * C64::from(scale / n);
            }
        }
    }
    let amp = (cfg.p_ul / g as f64).sqrt();
    pt.p.iter_mut().for_each(|p| *p = amp);
    pt
}

#[derive(Debug, Clone)]
pub struct InitOutcome {
    pub point: DesignPoint,
    pub solves: usize,
    pub min_ratio: f64,
}

/// Finds a point meeting all rate thresholds by repeated maximin solves.
/// Works in whatever units `ch` and `cfg` use.
pub fn initialize(
    kind: AlgorithmKind,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    fixed: Option<&FixedAssignment>,
    opts: &RunOptions,
) -> Result<InitOutcome> {
    let class = match kind {
        AlgorithmKind::Alg1 => ProblemClass::Alg1Init,
        AlgorithmKind::Alg2 => ProblemClass::Alg2Init,
    };
    let mut pt = heuristic_seed(kind, ch, cfg);
    if let Some(f) = fixed {
        f.apply(&mut pt);
    }
    tighten(&mut pt, ch, cfg, class);
    let mut ratio = min_threshold_ratio(&pt, ch, cfg);
    if meets_thresholds(&pt, ch, cfg) {
        return Ok(InitOutcome {
            point: pt,
            solves: 0,
            min_ratio: ratio,
        });
    }
    let sub = SubproblemKind::for_config(class, cfg);
    let mut best = ratio;
    let mut stalled = 0;
    for solves in 1..=INIT_MAX_SOLVES {
        let prog = build_subproblem(sub, &pt, ch, cfg, fixed)?;
        let x0 = encode_point(&prog, &pt, &pt);
        let res = solve_warm(&prog, &opts.solver, Some(&x0))?;
        let mut next = match extract_point(&prog, &res, &pt) {
            Ok(p) => p,
            Err(_) => break,
        };
        if let Some(f) = fixed {
            f.apply(&mut next);
        }
        tighten(&mut next, ch, cfg, class);
        let r = min_threshold_ratio(&next, ch, cfg);
        if r >= ratio {
            pt = next;
            ratio = r;
        }
        if meets_thresholds(&pt, ch, cfg) {
            return Ok(InitOutcome {
                point: pt,
                solves,
                min_ratio: ratio,
            });
        }
        if ratio < best + STAGNATION_GAIN {
            stalled += 1;
            if stalled >= STAGNATION_ROUNDS {
                return Err(CoreError::InfeasibleScenario {
                    best_ratio: ratio,
                    iterations: solves,
                });
            }
        } else {
            stalled = 0;
        }
        best = best.max(ratio);
    }
    Err(CoreError::InfeasibleScenario {
        best_ratio: ratio,
        iterations: INIT_MAX_SOLVES,
    })
}
