//! Per-iteration convex subproblems expressed as conic programs.

mod build;
pub(crate) mod extract;

pub use build::build_subproblem;
pub use extract::{encode_point, extract_point};

use crate::point::DesignPoint;
use crate::system::{PowerMode, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemClass {
    /// Fixed grouping and time fractions.
    Alg1Main,
    /// Maximin feasibility search for `Alg1Main`.
    Alg1Init,
    /// Joint grouping, time and beamforming.
    Alg2Main,
    /// Maximin feasibility search for `Alg2Main`.
    Alg2Init,
}

impl ProblemClass {
    pub fn is_joint(self) -> bool {
        matches!(self, ProblemClass::Alg2Main | ProblemClass::Alg2Init)
    }

    pub fn is_init(self) -> bool {
        matches!(self, ProblemClass::Alg1Init | ProblemClass::Alg2Init)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemClass::Alg1Main => "alg1-main",
            ProblemClass::Alg1Init => "alg1-init",
            ProblemClass::Alg2Main => "alg2-main",
            ProblemClass::Alg2Init => "alg2-init",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubproblemKind {
    pub class: ProblemClass,
    pub with_omega_constraints: bool,
    pub power_mode: PowerMode,
}

impl SubproblemKind {
    /// The kind used by the algorithms for `class` under `cfg`.
    pub fn for_config(class: ProblemClass, cfg: &SystemConfig) -> Self {
        Self {
            class,
            with_omega_constraints: class.is_joint() && cfg.omega > 0.0,
            power_mode: cfg.power_constraint_mode,
        }
    }
}

/// Pinned grouping and time values, flat at `user * G + group`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedAssignment {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub t: Vec<f64>,
}

impl FixedAssignment {
    pub fn from_point(pt: &DesignPoint) -> Self {
        Self {
            alpha: pt.alpha.clone(),
            beta: pt.beta.clone(),
            t: pt.t.clone(),
        }
    }

    pub fn apply(&self, pt: &mut DesignPoint) {
        pt.alpha.clone_from(&self.alpha);
        pt.beta.clone_from(&self.beta);
        pt.t.clone_from(&self.t);
    }
}

/// Rate thresholds inside subproblems are loosened by this fraction of
/// max(1, R̄) so that an expansion point meeting them to rounding stays
/// strictly usable.
pub const THRESHOLD_SLACK: f64 = 1e-7;

/// Upper cap on the maximin variable of the init kinds.
pub const MAXIMIN_CAP: f64 = 4.0;

/// Floors applied to the references of the bilinear power bound.
pub const T_REF_FLOOR: f64 = 1e-6;
pub const POWER_REF_FLOOR: f64 = 1e-9;

pub fn threshold(rbar: f64) -> f64 {
    rbar - THRESHOLD_SLACK * rbar.max(1.0)
}
