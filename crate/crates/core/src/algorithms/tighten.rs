use crate::model::ProblemClass;
use crate::point::DesignPoint;
use crate::rates::{dl_interference, group_rates, inner, ul_sinr_mmse_sic};
use crate::system::{ChannelSet, PowerMode, SystemConfig, C64};

/// Σ_g weight_g·‖w^g‖² for the configured power mode.
pub fn bs_energy(pt: &DesignPoint, mode: PowerMode) -> f64 {
    (0..pt.g)
        .map(|g| match mode {
            PowerMode::TimeWeighted => pt.t[g] * pt.group_power(g),
            PowerMode::Relaxed => pt.group_power(g),
        })
        .sum()
}

pub fn ul_energy(pt: &DesignPoint, l: usize, mode: PowerMode) -> f64 {
    (0..pt.g)
        .map(|g| {
            let e = pt.p(l, g).powi(2);
            match mode {
                PowerMode::TimeWeighted => pt.t[g] * e,
                PowerMode::Relaxed => e,
            }
        })
        .sum()
}

/// Repairs the primary variables so they satisfy the sign, box, simplex
/// and power constraints, then sets every auxiliary to the value that
/// makes its defining constraint tight. Surrogates built at the result
/// agree with the exact rates.
pub fn tighten(pt: &mut DesignPoint, ch: &ChannelSet, cfg: &SystemConfig, class: ProblemClass) {
    let mode = cfg.power_constraint_mode;
    pt.p.iter_mut().for_each(|p| *p = p.max(0.0));
    if class.is_joint() {
        pt.alpha.iter_mut().for_each(|a| *a = a.clamp(0.0, 1.0));
        pt.beta.iter_mut().for_each(|b| *b = b.clamp(0.0, 1.0));
        pt.t.iter_mut().for_each(|t| *t = t.max(0.0));
        let s: f64 = pt.t.iter().sum();
        if s > 1.0 {
            pt.t.iter_mut().for_each(|t| *t /= s);
        }
    }
    let e = bs_energy(pt, mode);
    if e > cfg.p_bs {
        let f = C64::from((cfg.p_bs / e).sqrt());
        pt.w.iter_mut().for_each(|w| *w *= f);
    }
    for l in 0..pt.l {
        let e = ul_energy(pt, l, mode);
        if e > cfg.p_ul {
            let f = (cfg.p_ul / e).sqrt();
            for g in 0..pt.g {
                let i = pt.ul(l, g);
                pt.p[i] *= f;
            }
        }
    }
    for k in 0..pt.k {
        for g in 0..pt.g {
            let i = pt.dl(k, g);
            let z = inner(&ch.h[k], &pt.w[i]);
            if z.norm() > 0.0 {
                let rot = z.conj() / z.norm();
                pt.w[i] *= rot;
            }
        }
    }
    for k in 0..pt.k {
        for g in 0..pt.g {
            let i = pt.dl(k, g);
            let phi2 = dl_interference(k, g, pt, ch);
            let re = inner(&ch.h[k], &pt.w[i]).re;
            pt.aux.phi[i] = phi2.sqrt();
            pt.aux.theta[i] = phi2 + re * re;
        }
    }
    for l in 0..pt.l {
        for g in 0..pt.g {
            let i = pt.ul(l, g);
            pt.aux.theta_tilde[i] = ul_sinr_mmse_sic(l, g, pt, ch);
        }
    }
    if class.is_joint() {
        let r = group_rates(pt, ch);
        let omega = cfg.omega;
        let forcing = omega > 0.0;
        for g in 0..pt.g {
            let t = pt.t[g];
            for k in 0..pt.k {
                let i = pt.dl(k, g);
                if forcing {
                    pt.alpha[i] = pt.alpha[i].min(omega * r.dl[i]);
                }
                let tau2 = pt.alpha[i] * r.dl[i];
                pt.aux.tau[i] = tau2.sqrt();
                pt.aux.tau_hat[i] = tau2;
                pt.aux.tau_tilde[i] = (t * tau2).sqrt();
            }
            for l in 0..pt.l {
                let i = pt.ul(l, g);
                if forcing {
                    pt.beta[i] = pt.beta[i].min(omega * r.ul[i]);
                }
                let k2 = pt.beta[i] * r.ul[i];
                pt.aux.kappa[i] = k2.sqrt();
                pt.aux.kappa_hat[i] = k2;
                pt.aux.kappa_tilde[i] = (t * k2).sqrt();
                pt.aux.p_hat[i] = pt.p[i] * pt.p[i];
            }
            pt.aux.omega[g] = pt.group_power(g);
        }
    }
}
