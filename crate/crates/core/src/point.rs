use crate::system::{CVec, C64};

/// Auxiliary SCA variables, stored with the same (user, group) layout as
/// the primary variables. All zero when unused.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Auxiliary {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_tilde: Vec<f64>,
    pub tau: Vec<f64>,
    pub tau_hat: Vec<f64>,
    pub tau_tilde: Vec<f64>,
    pub kappa: Vec<f64>,
    pub kappa_hat: Vec<f64>,
    pub kappa_tilde: Vec<f64>,
    pub omega: Vec<f64>,
    pub p_hat: Vec<f64>,
}

impl Auxiliary {
    pub fn zeros(k: usize, l: usize, g: usize) -> Self {
        Self {
            phi: vec![0.0; k * g],
            theta: vec![0.0; k * g],
            theta_tilde: vec![0.0; l * g],
            tau: vec![0.0; k * g],
            tau_hat: vec![0.0; k * g],
            tau_tilde: vec![0.0; k * g],
            kappa: vec![0.0; l * g],
            kappa_hat: vec![0.0; l * g],
            kappa_tilde: vec![0.0; l * g],
            omega: vec![0.0; g],
            p_hat: vec![0.0; l * g],
        }
    }
}

/// A full variable assignment. Per-user, per-group quantities are stored
/// flat at index `user * G + group`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint {
    pub k: usize,
    pub l: usize,
    pub g: usize,
    pub ntx: usize,
    pub w: Vec<CVec>,
    pub p: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub t: Vec<f64>,
    pub aux: Auxiliary,
}

impl DesignPoint {
    /// Zero beamformers and powers, α = β = 1 and equal time fractions.
    pub fn zeros(k: usize, l: usize, g: usize, ntx: usize) -> Self {
        Self {
            k,
            l,
            g,
            ntx,
            w: vec![CVec::zeros(ntx); k * g],
            p: vec![0.0; l * g],
            alpha: vec![1.0; k * g],
            beta: vec![1.0; l * g],
            t: vec![1.0 / g as f64; g],
            aux: Auxiliary::zeros(k, l, g),
        }
    }

    #[inline]
    pub fn dl(&self, k: usize, g: usize) -> usize {
        k * self.g + g
    }

    #[inline]
    pub fn ul(&self, l: usize, g: usize) -> usize {
        l * self.g + g
    }

    pub fn w(&self, k: usize, g: usize) -> &CVec {
        &self.w[self.dl(k, g)]
    }

    pub fn p(&self, l: usize, g: usize) -> f64 {
        self.p[self.ul(l, g)]
    }

    /// Total BS transmit energy of group g, Σ_k ‖w_k^g‖².
    pub fn group_power(&self, g: usize) -> f64 {
        (0..self.k).map(|k| self.w(k, g).norm_squared()).sum()
    }

    /// Multiplies beamformers by `w_scale`, UL amplitudes by `p_scale` and
    /// DL interference amplitudes by `phi_scale`, carrying the auxiliaries
    /// that depend on them.
    pub fn rescaled(&self, w_scale: f64, p_scale: f64, phi_scale: f64) -> Self {
        let mut out = self.clone();
        let ws = C64::from(w_scale);
        for w in &mut out.w {
            *w *= ws;
        }
        out.p.iter_mut().for_each(|v| *v *= p_scale);
        out.aux.phi.iter_mut().for_each(|v| *v *= phi_scale);
        out.aux.theta.iter_mut().for_each(|v| *v *= phi_scale * phi_scale);
        out.aux.omega.iter_mut().for_each(|v| *v *= w_scale * w_scale);
        out.aux.p_hat.iter_mut().for_each(|v| *v *= p_scale * p_scale);
        out
    }

    /// Into units where P_bs, P_ul and σ_dl are one.
    pub fn normalized(&self, p_bs: f64, p_ul: f64, sigma_dl: f64) -> Self {
        self.rescaled(1.0 / p_bs.sqrt(), 1.0 / p_ul.sqrt(), 1.0 / sigma_dl.sqrt())
    }

    pub fn denormalized(&self, p_bs: f64, p_ul: f64, sigma_dl: f64) -> Self {
        self.rescaled(p_bs.sqrt(), p_ul.sqrt(), sigma_dl.sqrt())
    }
}
