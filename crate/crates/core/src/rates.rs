use nalgebra::Cholesky;

use crate::point::DesignPoint;
use crate::system::{ChannelSet, CMat, PowerMode, SystemConfig, C64};

/// hᴴw.
pub fn inner(h: &crate::system::CVec, w: &crate::system::CVec) -> C64 {
    h.dotc(w)
}

/// Interference plus noise seen by DLU k in group g.
pub fn dl_interference(k: usize, g: usize, pt: &DesignPoint, ch: &ChannelSet) -> f64 {
    let h = &ch.h[k];
    let mut s = ch.sigma_dl;
    for i in (0..pt.k).filter(|&i| i != k) {
        s += inner(h, pt.w(i, g)).norm_sqr();
    }
    for l in 0..pt.l {
        s += (pt.p(l, g) * ch.g_hat[(l, k)].norm()).powi(2);
    }
    s
}

pub fn dl_sinr(k: usize, g: usize, pt: &DesignPoint, ch: &ChannelSet) -> f64 {
    inner(&ch.h[k], pt.w(k, g)).norm_sqr() / dl_interference(k, g, pt, ch)
}

/// Σ_{j≥from} p_j² g_j g_jᴴ + ρ Σ_k G_Iᴴ w_k w_kᴴ G_I + σ² I for group g.
pub fn ul_covariance(from: usize, g: usize, pt: &DesignPoint, ch: &ChannelSet) -> CMat {
    let nrx = ch.nrx();
    let mut xi = CMat::identity(nrx, nrx) * C64::from(ch.sigma_ul);
    for j in from..pt.l {
        let p2 = pt.p(j, g).powi(2);
        if p2 > 0.0 {
            let gj = &ch.g[j];
            xi += gj * gj.adjoint() * C64::from(p2);
        }
    }
    if ch.rho > 0.0 {
        for k in 0..pt.k {
            let v = ch.g_i.adjoint() * pt.w(k, g);
            xi += &v * v.adjoint() * C64::from(ch.rho);
        }
    }
    xi
}

/// gᴴ M⁻¹ g via a Cholesky solve.
pub fn quad_inv(m: &CMat, g: &crate::system::CVec) -> f64 {
    let chol = Cholesky::new(m.clone()).expect("covariance is positive definite");
    g.dotc(&chol.solve(g)).re
}

/// SINR of ULU ℓ in group g with MMSE-SIC in ascending index order.
pub fn ul_sinr_mmse_sic(l: usize, g: usize, pt: &DesignPoint, ch: &ChannelSet) -> f64 {
    let p = pt.p(l, g);
    if p == 0.0 {
        return 0.0;
    }
    let xi = ul_covariance(l + 1, g, pt, ch);
    p * p * quad_inv(&xi, &ch.g[l])
}

/// Unweighted per-group rates ln(1+SINR), flat at `user * G + group`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRates {
    pub dl: Vec<f64>,
    pub ul: Vec<f64>,
}

pub fn group_rates(pt: &DesignPoint, ch: &ChannelSet) -> GroupRates {
    let mut dl = vec![0.0; pt.k * pt.g];
    let mut ul = vec![0.0; pt.l * pt.g];
    for g in 0..pt.g {
        for k in 0..pt.k {
            dl[pt.dl(k, g)] = dl_sinr(k, g, pt, ch).ln_1p();
        }
        for l in 0..pt.l {
            ul[pt.ul(l, g)] = ul_sinr_mmse_sic(l, g, pt, ch).ln_1p();
        }
    }
    GroupRates { dl, ul }
}

/// Per-user rates Σ_g t_g α ln(1+γ), in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct UserRates {
    pub dl: Vec<f64>,
    pub ul: Vec<f64>,
}

impl UserRates {
    pub fn total(&self) -> f64 {
        self.dl.iter().sum::<f64>() + self.ul.iter().sum::<f64>()
    }
}

pub fn user_rates_from(pt: &DesignPoint, r: &GroupRates) -> UserRates {
    let dl = (0..pt.k)
        .map(|k| (0..pt.g).map(|g| pt.t[g] * pt.alpha[pt.dl(k, g)] * r.dl[pt.dl(k, g)]).sum())
        .collect();
    let ul = (0..pt.l)
        .map(|l| (0..pt.g).map(|g| pt.t[g] * pt.beta[pt.ul(l, g)] * r.ul[pt.ul(l, g)]).sum())
        .collect();
    UserRates { dl, ul }
}

pub fn user_rates(pt: &DesignPoint, ch: &ChannelSet) -> UserRates {
    user_rates_from(pt, &group_rates(pt, ch))
}

pub fn weighted_sum_rate(pt: &DesignPoint, ch: &ChannelSet) -> f64 {
    user_rates(pt, ch).total()
}

/// Residuals of the original constraints, each scaled by its natural size;
/// a residual ≤ 0 means satisfied.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub rate_dl: Vec<f64>,
    pub rate_ul: Vec<f64>,
    pub power_bs: f64,
    pub power_ul: Vec<f64>,
    pub nonnegativity: f64,
    pub alpha_box: f64,
    pub beta_box: f64,
    pub time_simplex: f64,
    pub worst: f64,
    pub worst_non_rate: f64,
    pub feasible: bool,
}

pub fn check_feasibility(
    pt: &DesignPoint,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    tol: f64,
) -> FeasibilityReport {
    let rates = user_rates(pt, ch);
    let rate_dl: Vec<f64> = rates
        .dl
        .iter()
        .map(|r| (cfg.rbar_dl - r) / cfg.rbar_dl.max(1.0))
        .collect();
    let rate_ul: Vec<f64> = rates
        .ul
        .iter()
        .map(|r| (cfg.rbar_ul - r) / cfg.rbar_ul.max(1.0))
        .collect();
    let weight = |g: usize| match cfg.power_constraint_mode {
        PowerMode::TimeWeighted => pt.t[g],
        PowerMode::Relaxed => 1.0,
    };
    let bs: f64 = (0..pt.g).map(|g| weight(g) * pt.group_power(g)).sum();
    let power_bs = (bs - cfg.p_bs) / cfg.p_bs;
    let power_ul: Vec<f64> = (0..pt.l)
        .map(|l| {
            let e: f64 = (0..pt.g).map(|g| weight(g) * pt.p(l, g).powi(2)).sum();
            (e - cfg.p_ul) / cfg.p_ul
        })
        .collect();
    let nonnegativity = pt
        .p
        .iter()
        .map(|&p| -p / cfg.p_ul.sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    let boxed = |v: &[f64]| {
        v.iter()
            .map(|&a| (a - 1.0).max(-a))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let alpha_box = boxed(&pt.alpha);
    let beta_box = boxed(&pt.beta);
    let time_simplex = pt
        .t
        .iter()
        .map(|&t| -t)
        .fold(pt.t.iter().sum::<f64>() - 1.0, f64::max);
    let worst_non_rate = power_ul
        .iter()
        .copied()
        .chain([power_bs, nonnegativity, alpha_box, beta_box, time_simplex])
        .fold(f64::NEG_INFINITY, f64::max);
    let worst = rate_dl
        .iter()
        .chain(&rate_ul)
        .copied()
        .fold(worst_non_rate, f64::max);
    FeasibilityReport {
        rate_dl,
        rate_ul,
        power_bs,
        power_ul,
        nonnegativity,
        alpha_box,
        beta_box,
        time_simplex,
        worst,
        worst_non_rate,
        feasible: worst <= tol,
    }
}
