pub mod channels;
pub mod config;
pub mod layout;

pub use channels::{generate_channels, path_loss_db, ChannelSet, PathLossKind, CMat, CVec, C64};
pub use config::{
    bps_to_nats, db_to_linear, dbm_to_watts, nats_to_bps, parse_config, ConfigFile, ConfigFormat, DistanceUnit,
    PowerMode, ScenarioSection, SystemConfig,
};
pub use layout::{generate_layout, UserLayout};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one Monte-Carlo trial; independent of how many trials run.
pub fn trial_seed(base: u64, grid_index: u64, trial_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ grid_index) ^ trial_index)
}

/// Seed for a named sub-stream derived from a trial seed.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0x5eed)))
}

/// Layout and channels drawn from a single stream seeded with `seed`.
pub fn draw_instance(cfg: &SystemConfig, seed: u64) -> Result<(UserLayout, ChannelSet)> {
    let mut rng = rng_from_seed(seed);
    let layout = generate_layout(cfg, &mut rng)?;
    let ch = generate_channels(&layout, cfg, &mut rng)?;
    Ok((layout, ch))
}
