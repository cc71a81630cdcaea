use fdgroup_conic::{
    AffineExpr, ConicProgram, LinearConstraint, RotatedCone, SecondOrderCone, VarBlock, VarMap,
    VarRole,
};
use nalgebra::DMatrix;

use super::{
    threshold, FixedAssignment, ProblemClass, SubproblemKind, MAXIMIN_CAP, POWER_REF_FLOOR,
    T_REF_FLOOR,
};
use crate::error::{CoreError, Result};
use crate::point::DesignPoint;
use crate::sca::{dl_minorant_coeffs, psd_factor, ul_minorant_coeffs, DlMinorantCoeffs, UlMinorantCoeffs};
use crate::system::{ChannelSet, CMat, CVec, PowerMode, SystemConfig, C64};

pub(super) struct Blocks {
    pub w: VarBlock,
    pub phi: VarBlock,
    pub theta: VarBlock,
    pub p: VarBlock,
    pub theta_tilde: VarBlock,
    pub joint: Option<JointBlocks>,
    pub s: Option<VarBlock>,
}

pub(super) struct JointBlocks {
    pub alpha: VarBlock,
    pub beta: VarBlock,
    pub t: VarBlock,
    pub tau: VarBlock,
    pub tau_hat: VarBlock,
    pub tau_tilde: VarBlock,
    pub kappa: VarBlock,
    pub kappa_hat: VarBlock,
    pub kappa_tilde: VarBlock,
    pub omega: VarBlock,
    pub p_hat: VarBlock,
}

pub(super) fn register(class: ProblemClass, k: usize, l: usize, g: usize, ntx: usize) -> (VarMap, Blocks) {
    let mut m = VarMap::new();
    let d = VarRole::Decision;
    let w = m.register("w", d, true, k * g, 2 * ntx);
    let phi = m.register("phi", d, false, k * g, 1);
    // θ only closes an epigraph in the fixed-grouping model; the joint
    // model counts it among its decision variables.
    let theta_role = if class.is_joint() { d } else { VarRole::Epigraph };
    let theta = m.register("theta", theta_role, false, k * g, 1);
    let p = m.register("p", d, false, l * g, 1);
    let theta_tilde = m.register("theta_tilde", d, false, l * g, 1);
    let joint = class.is_joint().then(|| JointBlocks {
        alpha: m.register("alpha", d, false, k * g, 1),
        beta: m.register("beta", d, false, l * g, 1),
        t: m.register("t", d, false, g, 1),
        tau: m.register("tau", d, false, k * g, 1),
        tau_hat: m.register("tau_hat", d, false, k * g, 1),
        tau_tilde: m.register("tau_tilde", d, false, k * g, 1),
        kappa: m.register("kappa", d, false, l * g, 1),
        kappa_hat: m.register("kappa_hat", d, false, l * g, 1),
        kappa_tilde: m.register("kappa_tilde", d, false, l * g, 1),
        omega: m.register("omega", d, false, g, 1),
        p_hat: m.register("p_hat", d, false, l * g, 1),
    });
    let s = class
        .is_init()
        .then(|| m.register("s", VarRole::Internal, false, 1, 1));
    (
        m,
        Blocks {
            w,
            phi,
            theta,
            p,
            theta_tilde,
            joint,
            s,
        },
    )
}

fn var(b: &VarBlock, e: usize) -> AffineExpr {
    AffineExpr::var(b.index(e, 0))
}

/// Re{hᴴw} and Im{hᴴw} as linear forms in the stacked real parts of w.
fn hw_forms(h: &CVec, w: &VarBlock, e: usize) -> (AffineExpr, AffineExpr) {
    let n = h.len();
    let mut re = AffineExpr::zero();
    let mut im = AffineExpr::zero();
    for i in 0..n {
        let (hr, hi) = (h[i].re, h[i].im);
        let wr = w.index(e, i);
        let wi = w.index(e, n + i);
        re.add_term(wr, hr).add_term(wi, hi);
        im.add_term(wi, hr).add_term(wr, -hi);
    }
    re.normalize();
    im.normalize();
    (re, im)
}

/// Rows of `r` applied to the stacked entry `e` of the w block.
fn stacked_rows(r: &DMatrix<f64>, w: &VarBlock, e: usize) -> Vec<AffineExpr> {
    (0..r.nrows())
        .map(|i| {
            let mut x = AffineExpr::zero();
            for c in 0..r.ncols() {
                x.add_term(w.index(e, c), r[(i, c)]);
            }
            x.normalize();
            x
        })
        .collect()
}

fn all_w_entries(w: &VarBlock, entries: impl Iterator<Item = usize>, scale: f64) -> Vec<AffineExpr> {
    entries
        .flat_map(|e| (0..w.entry_len).map(move |o| (e, o)))
        .map(|(e, o)| AffineExpr::term(w.index(e, o), scale))
        .collect()
}

struct Ctx<'a> {
    kind: SubproblemKind,
    x: &'a DesignPoint,
    ch: &'a ChannelSet,
    cfg: &'a SystemConfig,
    b: Blocks,
    dl: Vec<DlMinorantCoeffs>,
    ul: Vec<UlMinorantCoeffs>,
    /// α, β, t used as constants in the fixed-grouping kinds.
    fixed: FixedAssignment,
}

impl Ctx<'_> {
    fn ddf(&self, k: usize, g: usize) -> AffineExpr {
        let e = self.x.dl(k, g);
        let c = &self.dl[e];
        let (re, _) = hw_forms(&self.ch.h[k], &self.b.w, e);
        let mut f = re.scaled(c.chi);
        let s = self.x.aux.phi[e];
        f.add_term(self.b.theta.index(e, 0), -c.varpi * s * s);
        f.add_constant(c.varphi);
        f
    }

    fn ddp(&self, l: usize, g: usize) -> AffineExpr {
        let e = self.x.ul(l, g);
        let c = &self.ul[e];
        AffineExpr::constant(c.vartheta)
            .with_term(self.b.p.index(e, 0), c.psi)
            .with_term(self.b.theta_tilde.index(e, 0), -1.0)
    }

    /// User rate surrogate entering the objective and the thresholds.
    fn dl_rate(&self, k: usize) -> AffineExpr {
        let mut r = AffineExpr::zero();
        for g in 0..self.x.g {
            let e = self.x.dl(k, g);
            match &self.b.joint {
                None => {
                    r.add_scaled(&self.ddf(k, g), self.fixed.t[g] * self.fixed.alpha[e]);
                }
                Some(j) => {
                    let n = self.x.aux.tau_tilde[e];
                    r.add_term(j.tau_tilde.index(e, 0), 2.0 * n).add_constant(-n * n);
                }
            }
        }
        r.normalize();
        r
    }

    fn ul_rate(&self, l: usize) -> AffineExpr {
        let mut r = AffineExpr::zero();
        for g in 0..self.x.g {
            let e = self.x.ul(l, g);
            match &self.b.joint {
                None => {
                    r.add_scaled(&self.ddp(l, g), self.fixed.t[g] * self.fixed.beta[e]);
                }
                Some(j) => {
                    let n = self.x.aux.kappa_tilde[e];
                    r.add_term(j.kappa_tilde.index(e, 0), 2.0 * n).add_constant(-n * n);
                }
            }
        }
        r.normalize();
        r
    }
}

fn dims_ok(x: &DesignPoint, ch: &ChannelSet, cfg: &SystemConfig) -> Result<()> {
    let ok = x.k == cfg.k
        && x.l == cfg.l
        && x.g == cfg.g
        && x.ntx == cfg.ntx
        && ch.k() == cfg.k
        && ch.l() == cfg.l
        && ch.ntx() == cfg.ntx
        && ch.nrx() == cfg.nrx
        && x.w.iter().all(|w| w.len() == cfg.ntx);
    if ok {
        Ok(())
    } else {
        Err(CoreError::Domain("expansion point, channels and config disagree on dimensions".into()))
    }
}

/// Builds the convex subproblem of `kind` around `expansion`, which must
/// carry consistent auxiliaries (φ, τ̃, κ̃, ω, p̂ as used by the kind).
pub fn build_subproblem(
    kind: SubproblemKind,
    expansion: &DesignPoint,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    fixed: Option<&FixedAssignment>,
) -> Result<ConicProgram> {
    dims_ok(expansion, ch, cfg)?;
    if kind.with_omega_constraints && !kind.class.is_joint() {
        return Err(CoreError::Config(
            "grouping-forcing constraints apply only to the joint model".into(),
        ));
    }
    let x = expansion;
    let (kk, ll, gg) = (x.k, x.l, x.g);
    let mut dl = Vec::with_capacity(kk * gg);
    for k in 0..kk {
        for g in 0..gg {
            dl.push(dl_minorant_coeffs(x, ch, k, g)?);
        }
    }
    let mut ul = Vec::with_capacity(ll * gg);
    for l in 0..ll {
        for g in 0..gg {
            ul.push(ul_minorant_coeffs(x, ch, l, g)?);
        }
    }
    let (map, b) = register(kind.class, kk, ll, gg, x.ntx);
    let fixed_vals = fixed.cloned().unwrap_or_else(|| FixedAssignment::from_point(x));
    if fixed_vals.alpha.len() != kk * gg || fixed_vals.beta.len() != ll * gg || fixed_vals.t.len() != gg {
        return Err(CoreError::Domain("fixed assignment has wrong dimensions".into()));
    }
    let cx = Ctx {
        kind,
        x,
        ch,
        cfg,
        b,
        dl,
        ul,
        fixed: fixed_vals,
    };
    let mut prog = ConicProgram::new(map);
    add_common(&cx, &mut prog);
    match &cx.b.joint {
        None => add_fixed_power(&cx, &mut prog),
        Some(j) => add_joint(&cx, j, fixed, &mut prog),
    }
    add_objective_and_thresholds(&cx, &mut prog);
    prog.normalize();
    Ok(prog)
}

/// DL epigraph and interference cones, the λ cones, and sign constraints.
fn add_common(cx: &Ctx, prog: &mut ConicProgram) {
    let (x, ch, b) = (cx.x, cx.ch, &cx.b);
    for g in 0..x.g {
        for k in 0..x.k {
            let e = x.dl(k, g);
            let (re, _) = hw_forms(&ch.h[k], &b.w, e);
            // φ and θ are stored as φ/s and θ/s² with s the expansion φ.
            // θ ≥ φ² + Re², i.e. 2·θ·½ ≥ ‖(φ, Re/s)‖².
            let s = x.aux.phi[e];
            prog.add_rotated(RotatedCone {
                u: var(&b.theta, e),
                v: AffineExpr::constant(0.5),
                body: vec![var(&b.phi, e), re.scaled(1.0 / s)],
            });
            let mut body = Vec::with_capacity(2 * x.k + x.l);
            for i in (0..x.k).filter(|&i| i != k) {
                let (r, m) = hw_forms(&ch.h[k], &b.w, x.dl(i, g));
                body.push(r.scaled(1.0 / s));
                body.push(m.scaled(1.0 / s));
            }
            for l in 0..x.l {
                body.push(AffineExpr::term(b.p.index(x.ul(l, g), 0), ch.g_hat[(l, k)].norm() / s));
            }
            body.push(AffineExpr::constant(ch.sigma_dl.sqrt() / s));
            prog.add_soc(SecondOrderCone {
                head: var(&b.phi, e),
                body,
            });
            prog.add_inequality(LinearConstraint::at_least(re, 0.0));
        }
        for l in 0..x.l {
            let e = x.ul(l, g);
            let theta = &cx.ul[e].theta;
            let mut body = Vec::new();
            for j in l..x.l {
                let c = ch.g[j].dotc(&(theta * &ch.g[j])).re.max(0.0);
                if c > 0.0 {
                    body.push(AffineExpr::term(b.p.index(x.ul(j, g), 0), c.sqrt()));
                }
            }
            if ch.rho > 0.0 && x.k > 0 {
                let a: CMat = &ch.g_i * theta * ch.g_i.adjoint() * C64::from(ch.rho);
                let r = psd_factor(&a);
                for k in 0..x.k {
                    body.extend(stacked_rows(&r, &b.w, x.dl(k, g)));
                }
            }
            if body.is_empty() {
                body.push(AffineExpr::zero());
            }
            let tr = ch.sigma_ul * theta.trace().re;
            prog.add_rotated(RotatedCone {
                u: var(&b.theta_tilde, e).with_constant(-tr),
                v: AffineExpr::constant(0.5),
                body,
            });
            prog.add_inequality(LinearConstraint::at_least(var(&b.p, e), 0.0));
        }
    }
}

/// Power budgets with t, α, β held constant.
fn add_fixed_power(cx: &Ctx, prog: &mut ConicProgram) {
    let (x, b) = (cx.x, &cx.b);
    let weight = |g: usize| match cx.kind.power_mode {
        PowerMode::TimeWeighted => cx.fixed.t[g].max(0.0).sqrt(),
        PowerMode::Relaxed => 1.0,
    };
    if x.k > 0 {
        let mut body = Vec::new();
        for g in 0..x.g {
            body.extend(all_w_entries(&b.w, (0..x.k).map(|k| x.dl(k, g)), weight(g)));
        }
        prog.add_soc(SecondOrderCone {
            head: AffineExpr::constant(cx.cfg.p_bs.sqrt()),
            body,
        });
    }
    for l in 0..x.l {
        let body = (0..x.g)
            .map(|g| AffineExpr::term(b.p.index(x.ul(l, g), 0), weight(g)))
            .collect();
        prog.add_soc(SecondOrderCone {
            head: AffineExpr::constant(cx.cfg.p_ul.sqrt()),
            body,
        });
    }
}

fn add_joint(cx: &Ctx, j: &JointBlocks, fixed: Option<&FixedAssignment>, prog: &mut ConicProgram) {
    let (x, b, cfg) = (cx.x, &cx.b, cx.cfg);
    let a = &x.aux;
    for g in 0..x.g {
        for k in 0..x.k {
            let e = x.dl(k, g);
            // α·ddF ≥ τ².
            prog.add_rotated(RotatedCone {
                u: var(&j.alpha, e),
                v: cx.ddf(k, g).scaled(0.5),
                body: vec![var(&j.tau, e)],
            });
            // τ̂ ≤ 2τₙτ − τₙ², τ̂ ≥ 0.
            let n = a.tau[e];
            prog.add_inequality(LinearConstraint::at_least(
                AffineExpr::term(j.tau.index(e, 0), 2.0 * n)
                    .with_term(j.tau_hat.index(e, 0), -1.0)
                    .with_constant(-n * n),
                0.0,
            ));
            prog.add_inequality(LinearConstraint::at_least(var(&j.tau_hat, e), 0.0));
            // t·τ̂ ≥ τ̃².
            prog.add_rotated(RotatedCone {
                u: var(&j.t, g),
                v: var(&j.tau_hat, e).scaled(0.5),
                body: vec![var(&j.tau_tilde, e)],
            });
            prog.add_inequality(LinearConstraint::between(var(&j.alpha, e), 0.0, 1.0));
            if cx.kind.with_omega_constraints {
                let mut c = cx.ddf(k, g).scaled(cfg.omega);
                c.add_term(j.alpha.index(e, 0), -1.0);
                prog.add_inequality(LinearConstraint::at_least(c, 0.0));
            }
        }
        for l in 0..x.l {
            let e = x.ul(l, g);
            prog.add_rotated(RotatedCone {
                u: var(&j.beta, e),
                v: cx.ddp(l, g).scaled(0.5),
                body: vec![var(&j.kappa, e)],
            });
            let n = a.kappa[e];
            prog.add_inequality(LinearConstraint::at_least(
                AffineExpr::term(j.kappa.index(e, 0), 2.0 * n)
                    .with_term(j.kappa_hat.index(e, 0), -1.0)
                    .with_constant(-n * n),
                0.0,
            ));
            prog.add_inequality(LinearConstraint::at_least(var(&j.kappa_hat, e), 0.0));
            prog.add_rotated(RotatedCone {
                u: var(&j.t, g),
                v: var(&j.kappa_hat, e).scaled(0.5),
                body: vec![var(&j.kappa_tilde, e)],
            });
            prog.add_inequality(LinearConstraint::between(var(&j.beta, e), 0.0, 1.0));
            if cx.kind.with_omega_constraints {
                let mut c = cx.ddp(l, g).scaled(cfg.omega);
                c.add_term(j.beta.index(e, 0), -1.0);
                prog.add_inequality(LinearConstraint::at_least(c, 0.0));
            }
            // p² ≤ p̂.
            prog.add_rotated(RotatedCone {
                u: var(&j.p_hat, e),
                v: AffineExpr::constant(0.5),
                body: vec![var(&b.p, e)],
            });
        }
        // Σ_k ‖w_k^g‖² ≤ ω_g.
        if x.k > 0 {
            prog.add_rotated(RotatedCone {
                u: var(&j.omega, g),
                v: AffineExpr::constant(0.5),
                body: all_w_entries(&b.w, (0..x.k).map(|k| x.dl(k, g)), 1.0),
            });
        }
        prog.add_inequality(LinearConstraint::at_least(var(&j.t, g), 0.0));
    }
    let mut sum_t = AffineExpr::zero();
    for g in 0..x.g {
        sum_t.add_term(j.t.index(g, 0), 1.0);
    }
    prog.add_inequality(LinearConstraint::at_most(sum_t, 1.0));

    match (cx.kind.power_mode, fixed) {
        (PowerMode::TimeWeighted, Some(f)) => {
            // t is a constant here, so the budgets are linear.
            if x.k > 0 {
                let mut s = AffineExpr::zero();
                for g in 0..x.g {
                    s.add_term(j.omega.index(g, 0), f.t[g]);
                }
                prog.add_inequality(LinearConstraint::at_most(s, cfg.p_bs));
            }
            for l in 0..x.l {
                let mut s = AffineExpr::zero();
                for g in 0..x.g {
                    s.add_term(j.p_hat.index(x.ul(l, g), 0), f.t[g]);
                }
                prog.add_inequality(LinearConstraint::at_most(s, cfg.p_ul));
            }
        }
        (PowerMode::TimeWeighted, None) => {
            // Σ_g ½t²/r + ½y²r ≤ P as ‖(t/√r, y√r)‖² ≤ 2P.
            let cap = |refs: Vec<(usize, f64, usize, f64)>, y: &VarBlock, budget: f64| {
                let mut body = Vec::new();
                for (g, t_ref, ye, y_ref) in refs {
                    let r = t_ref.max(T_REF_FLOOR) / y_ref.max(POWER_REF_FLOOR * budget);
                    body.push(AffineExpr::term(j.t.index(g, 0), 1.0 / r.sqrt()));
                    body.push(AffineExpr::term(y.index(ye, 0), r.sqrt()));
                }
                SecondOrderCone {
                    head: AffineExpr::constant((2.0 * budget).sqrt()),
                    body,
                }
            };
            if x.k > 0 {
                let refs = (0..x.g).map(|g| (g, x.t[g], g, a.omega[g])).collect();
                prog.add_soc(cap(refs, &j.omega, cfg.p_bs));
            }
            for l in 0..x.l {
                let refs = (0..x.g)
                    .map(|g| (g, x.t[g], x.ul(l, g), a.p_hat[x.ul(l, g)]))
                    .collect();
                prog.add_soc(cap(refs, &j.p_hat, cfg.p_ul));
            }
        }
        (PowerMode::Relaxed, _) => {
            if x.k > 0 {
                let mut s = AffineExpr::zero();
                for g in 0..x.g {
                    s.add_term(j.omega.index(g, 0), 1.0);
                }
                prog.add_inequality(LinearConstraint::at_most(s, cfg.p_bs));
            }
            for l in 0..x.l {
                let mut s = AffineExpr::zero();
                for g in 0..x.g {
                    s.add_term(j.p_hat.index(x.ul(l, g), 0), 1.0);
                }
                prog.add_inequality(LinearConstraint::at_most(s, cfg.p_ul));
            }
        }
    }

    if let Some(f) = fixed {
        for (e, &v) in f.alpha.iter().enumerate() {
            prog.add_equality(LinearConstraint::equal(var(&j.alpha, e), v));
        }
        for (e, &v) in f.beta.iter().enumerate() {
            prog.add_equality(LinearConstraint::equal(var(&j.beta, e), v));
        }
        for (g, &v) in f.t.iter().enumerate() {
            prog.add_equality(LinearConstraint::equal(var(&j.t, g), v));
        }
    }
}

fn add_objective_and_thresholds(cx: &Ctx, prog: &mut ConicProgram) {
    let (x, cfg) = (cx.x, cx.cfg);
    match &cx.b.s {
        None => {
            for k in 0..x.k {
                let r = cx.dl_rate(k);
                prog.add_objective(&r, 1.0);
                prog.add_inequality(LinearConstraint::at_least(r, threshold(cfg.rbar_dl)));
            }
            for l in 0..x.l {
                let r = cx.ul_rate(l);
                prog.add_objective(&r, 1.0);
                prog.add_inequality(LinearConstraint::at_least(r, threshold(cfg.rbar_ul)));
            }
        }
        Some(s) => {
            let si = s.index(0, 0);
            prog.add_objective(&AffineExpr::var(si), 1.0);
            prog.add_inequality(LinearConstraint::at_most(AffineExpr::var(si), MAXIMIN_CAP));
            let mut ratio = |r: AffineExpr, rbar: f64| {
                if rbar > 0.0 {
                    let mut c = r.scaled(1.0 / rbar);
                    c.add_term(si, -1.0);
                    prog.add_inequality(LinearConstraint::at_least(c, 0.0));
                }
            };
            for k in 0..x.k {
                ratio(cx.dl_rate(k), cfg.rbar_dl);
            }
            for l in 0..x.l {
                ratio(cx.ul_rate(l), cfg.rbar_ul);
            }
        }
    }
}
