use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::config::SystemConfig;
use super::layout::UserLayout;
use crate::error::{CoreError, Result};

pub type C64 = Complex64;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathLossKind {
    Los,
    Nlos,
}

/// Path loss in dB for a distance in whatever unit the caller chose.
pub fn path_loss_db(kind: PathLossKind, d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(CoreError::Domain(format!("path loss needs a positive distance, got {d}")));
    }
    Ok(match kind {
        PathLossKind::Los => 103.8 + 20.9 * d.log10(),
        PathLossKind::Nlos => 145.4 + 37.5 * d.log10(),
    })
}

pub fn db_to_gain(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

/// One channel realization together with the noise and residual
/// self-interference levels the rates are evaluated against.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h: Vec<CVec>,
    pub g: Vec<CVec>,
    /// `g_hat[(l, k)]`: ULU l to DLU k.
    pub g_hat: CMat,
    /// Ntx x Nrx loop channel, unscaled.
    pub g_i: CMat,
    pub pl_dl: Vec<f64>,
    pub pl_ul: Vec<f64>,
    pub pl_cross: DMatrix<f64>,
    pub sigma_dl: f64,
    pub sigma_ul: f64,
    pub rho: f64,
}

pub fn cn01<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

fn cn_vec<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> CVec {
    CVec::from_fn(n, |_, _| cn01(rng) * scale)
}

fn gain(kind: PathLossKind, d_m: f64, cfg: &SystemConfig) -> Result<f64> {
    let pl = db_to_gain(path_loss_db(kind, cfg.path_loss_distance_unit.from_meters(d_m))?);
    if !(pl > 0.0 && pl < 1.0) {
        return Err(CoreError::Domain(format!(
            "path-loss gain {pl} at {d_m} m is outside (0, 1)"
        )));
    }
    Ok(pl)
}

impl ChannelSet {
    pub fn k(&self) -> usize {
        self.h.len()
    }

    pub fn l(&self) -> usize {
        self.g.len()
    }

    pub fn ntx(&self) -> usize {
        self.g_i.nrows()
    }

    pub fn nrx(&self) -> usize {
        self.g_i.ncols()
    }

    /// Same path losses and noise, fresh small-scale fading for arrays of
    /// the given sizes.
    pub fn refade<R: Rng + ?Sized>(&self, ntx: usize, nrx: usize, rng: &mut R) -> Self {
        let h = self.pl_dl.iter().map(|pl| cn_vec(ntx, pl.sqrt(), rng)).collect();
        let g = self.pl_ul.iter().map(|pl| cn_vec(nrx, pl.sqrt(), rng)).collect();
        let g_hat = CMat::from_fn(self.l(), self.k(), |l, k| cn01(rng) * self.pl_cross[(l, k)].sqrt());
        let g_i = CMat::from_fn(ntx, nrx, |_, _| cn01(rng));
        Self {
            h,
            g,
            g_hat,
            g_i,
            ..self.clone()
        }
    }

    /// Channels seen in units where the power budgets and noise powers are
    /// one; SINRs are unchanged.
    pub fn normalized(&self, p_bs: f64, p_ul: f64) -> Self {
        let dl = (p_bs / self.sigma_dl).sqrt();
        let cross = (p_ul / self.sigma_dl).sqrt();
        let ul = (p_ul / self.sigma_ul).sqrt();
        Self {
            h: self.h.iter().map(|v| v * C64::from(dl)).collect(),
            g: self.g.iter().map(|v| v * C64::from(ul)).collect(),
            g_hat: &self.g_hat * C64::from(cross),
            g_i: self.g_i.clone(),
            sigma_dl: 1.0,
            sigma_ul: 1.0,
            rho: self.rho * p_bs / self.sigma_ul,
            ..self.clone()
        }
    }
}

/// Draws h, g, g_hat and the loop channel in that order.
pub fn generate_channels<R: Rng + ?Sized>(
    layout: &UserLayout,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<ChannelSet> {
    if layout.dl_positions.len() != cfg.k || layout.ul_positions.len() != cfg.l {
        return Err(CoreError::Domain("layout does not match the user counts".into()));
    }
    let pl_dl = (0..cfg.k)
        .map(|k| gain(PathLossKind::Los, layout.dl_distance(k), cfg))
        .collect::<Result<Vec<_>>>()?;
    let pl_ul = (0..cfg.l)
        .map(|l| gain(PathLossKind::Los, layout.ul_distance(l), cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut pl_cross = DMatrix::zeros(cfg.l, cfg.k);
    for l in 0..cfg.l {
        for k in 0..cfg.k {
            let d = layout.cross_distance(l, k).max(cfg.min_cross_distance);
            pl_cross[(l, k)] = gain(PathLossKind::Nlos, d, cfg)?;
        }
    }
    let h = pl_dl.iter().map(|pl| cn_vec(cfg.ntx, pl.sqrt(), rng)).collect();
    let g = pl_ul.iter().map(|pl| cn_vec(cfg.nrx, pl.sqrt(), rng)).collect();
    let g_hat = CMat::from_fn(cfg.l, cfg.k, |l, k| cn01(rng) * pl_cross[(l, k)].sqrt());
    let g_i = CMat::from_fn(cfg.ntx, cfg.nrx, |_, _| cn01(rng));
    Ok(ChannelSet {
        h,
        g,
        g_hat,
        g_i,
        pl_dl,
        pl_ul,
        pl_cross,
        sigma_dl: cfg.sigma_dl,
        sigma_ul: cfg.sigma_ul,
        rho: cfg.rho,
    })
}
