//! Application catalog and end-node platform presets.

use serde::{Deserialize, Serialize};

const DEFAULT_CATALOG: &str = include_str!("../data/applications.json");

/// Requirements of one application, used to build its demands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplicationSpec {
    pub name: String,
    pub min_fidelity: f64,
    pub pairs: u32,
    /// Seconds.
    pub window: f64,
    pub minsep: f64,
    pub n_inst: u64,
    /// Expiry relative to the submission interval start, seconds.
    pub expiry_rel: f64,
    pub resubmit_mean: f64,
    /// Shortest memory lifetime an end node needs to run the application.
    pub platform_window_floor: f64,
}

impl ApplicationSpec {
    pub fn is_teleportation(&self) -> bool {
        self.name.contains("teleportation")
    }

    /// Name of the first invalid field and why.
    pub fn check(&self) -> Result<(), (String, String)> {
        let positive = [
            ("window", self.window),
            ("expiry_rel", self.expiry_rel),
            ("resubmit_mean", self.resubmit_mean),
            ("platform_window_floor", self.platform_window_floor),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err((field.into(), format!("must be positive, got {v}")));
            }
        }
        if !(self.minsep >= 0.0 && self.minsep.is_finite()) {
            return Err(("minsep".into(), format!("must be non-negative, got {}", self.minsep)));
        }
        if self.pairs == 0 {
            return Err(("pairs".into(), "must be at least 1".into()));
        }
        if self.n_inst == 0 {
            return Err(("n_inst".into(), "must be at least 1".into()));
        }
        if !(self.min_fidelity > 0.5 && self.min_fidelity <= 1.0) {
            return Err(("min_fidelity".into(), format!("must lie in (0.5, 1], got {}", self.min_fidelity)));
        }
        Ok(())
    }
}

/// The shipped catalog.
pub fn default_catalog() -> Vec<ApplicationSpec> {
    serde_json::from_str(DEFAULT_CATALOG).expect("bundled catalog parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Platform {
    Nv,
    TrappedIon,
}

/// Memory lifetimes (seconds) of the two platform presets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformPresets {
    pub nv: f64,
    #[serde(rename = "trapped-ion")]
    pub trapped_ion: f64,
    /// Probability that an end node is a trapped-ion node.
    pub trapped_ion_share: f64,
}

impl Default for PlatformPresets {
    fn default() -> Self {
        PlatformPresets { nv: 1.0, trapped_ion: 10.0, trapped_ion_share: 0.5 }
    }
}

impl PlatformPresets {
    pub fn lifetime(&self, platform: Platform) -> f64 {
        match platform {
            Platform::Nv => self.nv,
            Platform::TrappedIon => self.trapped_ion,
        }
    }
}
