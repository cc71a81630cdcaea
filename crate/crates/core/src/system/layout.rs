use rand::Rng;

use super::config::SystemConfig;
use crate::error::{CoreError, Result};

pub const MAX_RESAMPLES: usize = 1_000_000;

/// User positions in meters; the BS sits at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct UserLayout {
    pub dl_positions: Vec<[f64; 2]>,
    pub ul_positions: Vec<[f64; 2]>,
    pub bs_position: [f64; 2],
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl UserLayout {
    pub fn dl_distance(&self, k: usize) -> f64 {
        distance(self.dl_positions[k], self.bs_position)
    }

    pub fn ul_distance(&self, l: usize) -> f64 {
        distance(self.ul_positions[l], self.bs_position)
    }

    pub fn cross_distance(&self, l: usize, k: usize) -> f64 {
        distance(self.ul_positions[l], self.dl_positions[k])
    }
}

fn draw_position<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<[f64; 2]> {
    for _ in 0..MAX_RESAMPLES {
        let r = cfg.cell_radius * rng.random::<f64>().sqrt();
        let a = std::f64::consts::TAU * rng.random::<f64>();
        if r >= cfg.min_bs_distance {
            return Ok([r * a.cos(), r * a.sin()]);
        }
    }
    Err(CoreError::LayoutSampling(MAX_RESAMPLES))
}

/// Uniform placement over the disk, rejecting draws closer to the BS than
/// `min_bs_distance`. DL users are drawn first, then UL users.
pub fn generate_layout<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<UserLayout> {
    let dl_positions = (0..cfg.k)
        .map(|_| draw_position(cfg, rng))
        .collect::<Result<Vec<_>>>()?;
    let ul_positions = (0..cfg.l)
        .map(|_| draw_position(cfg, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(UserLayout {
        dl_positions,
        ul_positions,
        bs_position: [0.0, 0.0],
    })
}
