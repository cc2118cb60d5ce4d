use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::channel::{LinkParams, DEFAULT_GRID_LEN, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::sim::RxPowerNorm;
use crate::wiener::Variant;

/// Minimum symbols per sweep point.
pub const MIN_SYMBOLS: usize = 10_000;

/// Complete description of one experiment. Every section and key has a
/// default, so an empty file describes the reference 20 km / 27 GBaud link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub link: LinkParams,
    pub modulation: ModulationConfig,
    pub cir: CirConfig,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModulationConfig {
    pub pam_order: usize,
    /// Cap on the accumulated nonlinear phase, rad.
    pub phi_max_rad: f64,
    /// Fixed launch power, W, instead of the phase-rotation cap. Needed for
    /// back-to-back links, where the cap does not bound the power.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub launch_power_w: Option<f64>,
}

impl Default for ModulationConfig {
    fn default() -> Self {
        Self {
            pam_order: 4,
            phi_max_rad: 0.1,
            launch_power_w: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CirConfig {
    /// Leading/trailing taps below this fraction of the peak magnitude are dropped.
    pub truncation_rel: f64,
    /// Points of the inverse-FFT grid used to sample the response.
    pub grid_len: usize,
}

impl Default for CirConfig {
    fn default() -> Self {
        Self {
            truncation_rel: DEFAULT_TRUNCATION,
            grid_len: DEFAULT_GRID_LEN,
        }
    }
}

/// Observation window length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KPolicy {
    Fixed(usize),
    Named(NamedK),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedK {
    /// `K = M`
    CirLength,
}

impl Default for KPolicy {
    fn default() -> Self {
        KPolicy::Named(NamedK::CirLength)
    }
}

impl KPolicy {
    pub fn resolve(&self, cir_len: usize) -> usize {
        match self {
            KPolicy::Fixed(k) => *k,
            KPolicy::Named(NamedK::CirLength) => cir_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub snr_grid_db: Vec<f64>,
    pub variants: Vec<Variant>,
    pub n_symbols: usize,
    pub master_seed: u64,
    pub observations: KPolicy,
    pub rx_power_norm: RxPowerNorm,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            // 5 dB steps ending at the top of the reference sweep
            snr_grid_db: (0..23).map(|i| (656 - 50 * (22 - i)) as f64 / 10.0).collect(),
            variants: Variant::ALL.to_vec(),
            n_symbols: 100_000,
            master_seed: 1,
            observations: KPolicy::default(),
            rx_power_norm: RxPowerNorm::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        let bad = |msg: String| Err(Error::Config(msg));
        if self.modulation.pam_order < 2 {
            return bad(format!("pam_order must be >= 2, got {}", self.modulation.pam_order));
        }
        if !(self.modulation.phi_max_rad > 0.0 && self.modulation.phi_max_rad.is_finite()) {
            return bad(format!("phi_max_rad must be positive, got {}", self.modulation.phi_max_rad));
        }
        if let Some(p) = self.modulation.launch_power_w {
            if !(p > 0.0 && p.is_finite()) {
                return bad(format!("launch_power_w must be positive, got {p}"));
            }
        }
        if !(self.cir.truncation_rel > 0.0 && self.cir.truncation_rel <= 1.0) {
            return bad(format!("truncation_rel must lie in (0, 1], got {}", self.cir.truncation_rel));
        }
        let s = &self.sweep;
        if s.snr_grid_db.is_empty() {
            return bad("snr_grid_db must not be empty".into());
        }
        if s.snr_grid_db.iter().any(|x| !x.is_finite()) {
            return bad("snr_grid_db entries must be finite".into());
        }
        if s.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return bad("snr_grid_db must be strictly increasing".into());
        }
        if s.variants.is_empty() {
            return bad("at least one filter variant is required".into());
        }
        for (i, v) in s.variants.iter().enumerate() {
            if s.variants[..i].contains(v) {
                return bad(format!("variant `{v}` listed twice"));
            }
        }
        if s.n_symbols < MIN_SYMBOLS {
            return bad(format!("n_symbols must be >= {MIN_SYMBOLS}, got {}", s.n_symbols));
        }
        if s.observations == KPolicy::Fixed(0) {
            return bad("observations must be >= 1".into());
        }
        Ok(())
    }
}
