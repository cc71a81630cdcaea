use nalgebra::DMatrix;

use super::run::{run_algorithm1, RunOptions, RunTrace};
use crate::error::Result;
use crate::system::{rng_from_seed, sub_seed, ChannelSet, CMat, SystemConfig};

#[derive(Debug, Clone)]
pub struct HdOutcome {
    pub dl: Option<RunTrace>,
    pub ul: Option<RunTrace>,
    /// (R_DL + R_UL) / 2, nats.
    pub rate: f64,
}

/// Half-duplex reference: the BS serves DL and UL in separate halves of
/// the block with all Ntx + Nrx antennas. Each half runs Algorithm 1 with
/// G = 1 and per-user thresholds doubled so the block average still meets
/// R̄. Fading is redrawn for the larger arrays from a sub-stream of `seed`.
pub fn hd_baseline(ch: &ChannelSet, cfg: &SystemConfig, seed: u64, opts: &RunOptions) -> Result<HdOutcome> {
    let n = cfg.ntx + cfg.nrx;
    let mut rng = rng_from_seed(sub_seed(seed, 0x4844));
    let wide = ch.refade(n, n, &mut rng);
    let dl = if cfg.k > 0 {
        let c = SystemConfig {
            l: 0,
            g: 1,
            ntx: n,
            rbar_dl: 2.0 * cfg.rbar_dl,
            rho: 0.0,
            ..cfg.clone()
        };
        let chd = ChannelSet {
            g: Vec::new(),
            g_hat: CMat::zeros(0, cfg.k),
            pl_ul: Vec::new(),
            pl_cross: DMatrix::zeros(0, cfg.k),
            g_i: CMat::zeros(n, cfg.nrx),
            rho: 0.0,
            ..wide.clone()
        };
        Some(run_algorithm1(&chd, &c, None, opts)?)
    } else {
        None
    };
    let ul = if cfg.l > 0 {
        let c = SystemConfig {
            k: 0,
            g: 1,
            nrx: n,
            rbar_ul: 2.0 * cfg.rbar_ul,
            rho: 0.0,
            ..cfg.clone()
        };
        let chu = ChannelSet {
            h: Vec::new(),
            g_hat: CMat::zeros(cfg.l, 0),
            pl_dl: Vec::new(),
            pl_cross: DMatrix::zeros(cfg.l, 0),
            g_i: CMat::zeros(cfg.ntx, n),
            rho: 0.0,
            ..wide
        };
        Some(run_algorithm1(&chu, &c, None, opts)?)
    } else {
        None
    };
    let half = |t: &Option<RunTrace>| t.as_ref().map_or(0.0, |t| t.objective);
    let rate = 0.5 * (half(&dl) + half(&ul));
    Ok(HdOutcome { dl, ul, rate })
}
