use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerMode {
    /// Per-group powers weighted by the time fractions.
    TimeWeighted,
    /// Plain sums of per-group powers.
    Relaxed,
}

/// Unit that distances are expressed in before entering the path-loss
/// formulas. Layouts are always generated in meters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceUnit {
    Meters,
    Kilometers,
}

impl DistanceUnit {
    pub fn from_meters(self, d: f64) -> f64 {
        match self {
            DistanceUnit::Meters => d,
            DistanceUnit::Kilometers => d / 1000.0,
        }
    }
}

/// Scenario parameters. Powers in Watts, rates in nats per channel use,
/// distances in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "G")]
    pub g: usize,
    #[serde(rename = "Ntx")]
    pub ntx: usize,
    #[serde(rename = "Nrx")]
    pub nrx: usize,
    #[serde(rename = "P_bs")]
    pub p_bs: f64,
    #[serde(rename = "P_ul")]
    pub p_ul: f64,
    pub rho: f64,
    pub sigma_dl: f64,
    pub sigma_ul: f64,
    #[serde(rename = "Rbar_dl")]
    pub rbar_dl: f64,
    #[serde(rename = "Rbar_ul")]
    pub rbar_ul: f64,
    pub cell_radius: f64,
    pub min_bs_distance: f64,
    /// Floor on ULU-to-DLU distances, meters.
    pub min_cross_distance: f64,
    pub eps_group: f64,
    pub eps_err: f64,
    /// Zero disables the grouping-forcing constraints.
    pub omega: f64,
    pub power_constraint_mode: PowerMode,
    pub path_loss_distance_unit: DistanceUnit,
    pub max_iters: usize,
    pub seed: u64,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn bps_to_nats(bps: f64) -> f64 {
    bps * std::f64::consts::LN_2
}

pub fn nats_to_bps(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

/// Thermal noise over 10 MHz: -174 dBm/Hz + 70 dB.
pub const DEFAULT_NOISE_DBM: f64 = -104.0;

pub fn default_eps_group(p_bs: f64, k: usize) -> f64 {
    1e-3 * (p_bs / k.max(1) as f64).sqrt()
}

impl Default for SystemConfig {
    fn default() -> Self {
        let p_bs = dbm_to_watts(26.0);
        let noise = dbm_to_watts(DEFAULT_NOISE_DBM);
        Self {
            k: 4,
            l: 4,
            g: 2,
            ntx: 4,
            nrx: 4,
            p_bs,
            p_ul: dbm_to_watts(10.0),
            rho: db_to_linear(-75.0),
            sigma_dl: noise,
            sigma_ul: noise,
            rbar_dl: bps_to_nats(1.0),
            rbar_ul: bps_to_nats(1.0),
            cell_radius: 100.0,
            min_bs_distance: 10.0,
            min_cross_distance: 1.0,
            eps_group: default_eps_group(p_bs, 4),
            eps_err: 1e-3,
            omega: 10.0,
            power_constraint_mode: PowerMode::TimeWeighted,
            path_loss_distance_unit: DistanceUnit::Kilometers,
            max_iters: 100,
            seed: 1,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CoreError::Config(m));
        if self.k + self.l == 0 {
            return bad("at least one user is required".into());
        }
        if self.g == 0 {
            return bad("G must be at least 1".into());
        }
        if self.ntx == 0 || self.nrx == 0 {
            return bad("antenna counts must be positive".into());
        }
        let positive = [
            ("P_bs", self.p_bs),
            ("P_ul", self.p_ul),
            ("sigma_dl", self.sigma_dl),
            ("sigma_ul", self.sigma_ul),
            ("cell_radius", self.cell_radius),
            ("min_bs_distance", self.min_bs_distance),
            ("min_cross_distance", self.min_cross_distance),
            ("eps_group", self.eps_group),
            ("eps_err", self.eps_err),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        let nonneg = [
            ("Rbar_dl", self.rbar_dl),
            ("Rbar_ul", self.rbar_ul),
            ("omega", self.omega),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be nonnegative and finite, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return bad(format!("rho must lie in [0, 1], got {}", self.rho));
        }
        if self.min_bs_distance >= self.cell_radius {
            return bad("min_bs_distance must be below cell_radius".into());
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        Ok(())
    }

    /// The same scenario in units where both power budgets and both noise
    /// powers are one. Rates and SINRs are unchanged by this rescaling.
    pub fn normalized(&self) -> Self {
        Self {
            p_bs: 1.0,
            p_ul: 1.0,
            sigma_dl: 1.0,
            sigma_ul: 1.0,
            rho: self.rho * self.p_bs / self.sigma_ul,
            eps_group: self.eps_group / self.p_bs.sqrt(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigFormat {
    Toml,
    Json,
}

impl ConfigFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ConfigFormat::Json,
            _ => ConfigFormat::Toml,
        }
    }
}

/// Optional sweep description carried alongside the system parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub grid: Option<Vec<f64>>,
    pub methods: Option<Vec<String>>,
    pub trials: Option<usize>,
}

/// On-disk configuration. Every field is optional; missing fields take
/// the defaults. Quantities may be given in linear units or, via the
/// `_dbm`, `_db`, `_bps` variants, in the units of the simulation table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    #[serde(rename = "G")]
    pub g: Option<usize>,
    #[serde(rename = "Ntx")]
    pub ntx: Option<usize>,
    #[serde(rename = "Nrx")]
    pub nrx: Option<usize>,
    #[serde(rename = "P_bs")]
    pub p_bs: Option<f64>,
    #[serde(rename = "P_bs_dbm")]
    pub p_bs_dbm: Option<f64>,
    #[serde(rename = "P_ul")]
    pub p_ul: Option<f64>,
    #[serde(rename = "P_ul_dbm")]
    pub p_ul_dbm: Option<f64>,
    pub rho: Option<f64>,
    pub rho_db: Option<f64>,
    pub sigma_dl: Option<f64>,
    pub sigma_ul: Option<f64>,
    pub noise_dbm: Option<f64>,
    #[serde(rename = "Rbar_dl")]
    pub rbar_dl: Option<f64>,
    #[serde(rename = "Rbar_ul")]
    pub rbar_ul: Option<f64>,
    #[serde(rename = "Rbar_bps")]
    pub rbar_bps: Option<f64>,
    pub cell_radius: Option<f64>,
    pub min_bs_distance: Option<f64>,
    pub min_cross_distance: Option<f64>,
    pub eps_group: Option<f64>,
    pub eps_err: Option<f64>,
    pub omega: Option<f64>,
    pub power_constraint_mode: Option<PowerMode>,
    pub path_loss_distance_unit: Option<DistanceUnit>,
    pub max_iters: Option<usize>,
    pub seed: Option<u64>,
    pub scenario: Option<ScenarioSection>,
}

fn pick(name: &str, linear: Option<f64>, alt: Option<f64>, conv: fn(f64) -> f64) -> Result<Option<f64>> {
    match (linear, alt) {
        (Some(_), Some(_)) => Err(CoreError::Config(format!(
            "{name} given in two units at once"
        ))),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(v)) => Ok(Some(conv(v))),
        (None, None) => Ok(None),
    }
}

impl ConfigFile {
    pub fn parse(text: &str, format: ConfigFormat) -> Result<Self> {
        match format {
            ConfigFormat::Toml => {
                toml::from_str(text).map_err(|e| CoreError::ConfigParse(e.to_string()))
            }
            ConfigFormat::Json => {
                serde_json::from_str(text).map_err(|e| CoreError::ConfigParse(e.to_string()))
            }
        }
    }

    /// Applies this file over `base`, converting alternate units, then
    /// validates the result.
    pub fn resolve(&self, base: &SystemConfig) -> Result<SystemConfig> {
        let mut c = base.clone();
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = self.$field {
                    c.$field = v;
                }
            };
        }
        set!(k);
        set!(l);
        set!(g);
        set!(ntx);
        set!(nrx);
        set!(cell_radius);
        set!(min_bs_distance);
        set!(min_cross_distance);
        set!(eps_err);
        set!(omega);
        set!(power_constraint_mode);
        set!(path_loss_distance_unit);
        set!(max_iters);
        set!(seed);
        if let Some(v) = pick("P_bs", self.p_bs, self.p_bs_dbm, dbm_to_watts)? {
            c.p_bs = v;
        }
        if let Some(v) = pick("P_ul", self.p_ul, self.p_ul_dbm, dbm_to_watts)? {
            c.p_ul = v;
        }
        if let Some(v) = pick("rho", self.rho, self.rho_db, db_to_linear)? {
            c.rho = v;
        }
        if let Some(n) = self.noise_dbm {
            if self.sigma_dl.is_some() || self.sigma_ul.is_some() {
                return Err(CoreError::Config("noise given in two units at once".into()));
            }
            c.sigma_dl = dbm_to_watts(n);
            c.sigma_ul = dbm_to_watts(n);
        }
        set!(sigma_dl);
        set!(sigma_ul);
        if let Some(b) = self.rbar_bps {
            if self.rbar_dl.is_some() || self.rbar_ul.is_some() {
                return Err(CoreError::Config("rate threshold given in two units at once".into()));
            }
            c.rbar_dl = bps_to_nats(b);
            c.rbar_ul = bps_to_nats(b);
        }
        set!(rbar_dl);
        set!(rbar_ul);
        c.eps_group = match self.eps_group {
            Some(v) => v,
            None if self.p_bs.is_some() || self.p_bs_dbm.is_some() || self.k.is_some() => {
                default_eps_group(c.p_bs, c.k)
            }
            None => base.eps_group,
        };
        c.validate()?;
        Ok(c)
    }
}

/// Parses a configuration text and resolves it against the defaults.
pub fn parse_config(text: &str, format: ConfigFormat) -> Result<(SystemConfig, Option<ScenarioSection>)> {
    let file = ConfigFile::parse(text, format)?;
    let cfg = file.resolve(&SystemConfig::default())?;
    Ok((cfg, file.scenario))
}
