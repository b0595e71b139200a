//! Scenario configuration: parsing, overrides and validation.

use std::path::{Path, PathBuf};

use qnet_core::capabilities::CapabilityModel;
use qnet_core::demand::PgtConfig;
use qnet_core::network::TopologyParams;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::catalog::{default_catalog, ApplicationSpec, PlatformPresets};

/// Invalid configuration, located by a dotted field path.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { path: path.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologySpec {
    Dumbbell,
    /// Random member of the topology family; `seed` defaults to the run seed.
    Random {
        backbones: usize,
        local_areas: usize,
        end_nodes: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    File {
        path: PathBuf,
    },
}

impl TopologySpec {
    pub fn random(params: TopologyParams) -> Self {
        TopologySpec::Random { backbones: params.backbones, local_areas: params.local_areas, end_nodes: params.end_nodes, seed: None }
    }
}

/// Share of end-node pairs given an application, per cell kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fractions {
    pub interface: f64,
    pub junction: f64,
    pub backbone: f64,
}

impl Fractions {
    pub const DUMBBELL: Fractions = Fractions { interface: 0.8, junction: 0.1, backbone: 0.1 };
    pub const RANDOM: Fractions = Fractions { interface: 0.2, junction: 0.15, backbone: 0.05 };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub topology: TopologySpec,
    pub capabilities: CapabilityModel,
    pub applications: Vec<ApplicationSpec>,
    pub platforms: PlatformPresets,
    /// Probability that an end node not marked in the topology is discoverable.
    pub server_probability: f64,
    pub fractions: Fractions,
    pub epsilon_service: f64,
    #[serde(rename = "T_SI_seconds", alias = "t_si_seconds")]
    pub t_si_seconds: f64,
    pub horizon_intervals: u64,
    /// Initial submissions are spread over this many seconds; by default
    /// over the first start time plus the application's relative expiry.
    pub initial_window_s: Option<f64>,
    pub bonus_enabled: bool,
    /// Wall-clock cap on the bonus phase per interval.
    pub bonus_budget_s: Option<f64>,
    /// Validate every computed schedule and count violations.
    pub check_invariants: bool,
    pub seeds: Vec<u64>,
    pub pgt: PgtConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            topology: TopologySpec::Dumbbell,
            capabilities: CapabilityModel::default(),
            applications: default_catalog(),
            platforms: PlatformPresets::default(),
            server_probability: 0.6,
            fractions: Fractions::DUMBBELL,
            epsilon_service: 1e-5,
            t_si_seconds: 1800.0,
            horizon_intervals: 200,
            initial_window_s: None,
            bonus_enabled: true,
            bonus_budget_s: None,
            check_invariants: false,
            seeds: vec![0],
            pgt: PgtConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Parses JSON text, applying `key.path=value` overrides first.
    pub fn from_json_str(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut value: Value = serde_json::from_str(text)
            .map_err(|e| ConfigError::new("<root>", format!("invalid JSON at line {} column {}: {e}", e.line(), e.column())))?;
        if !overrides.is_empty() {
            // Overrides act on the complete tree, defaults included.
            value = serde_json::to_value(Self::deserialize_value(value)?).expect("config serializes");
            for o in overrides {
                apply_override(&mut value, o)?;
            }
        }
        Self::from_value(value)
    }

    fn deserialize_value(value: Value) -> Result<Self, ConfigError> {
        serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(if path == "." { "<root>".to_string() } else { path }, e.inner().to_string())
        })
    }

    pub fn from_value(value: Value) -> Result<Self, ConfigError> {
        let cfg = Self::deserialize_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(path.display().to_string(), format!("cannot read config: {e}")))?;
        let mut cfg = Self::from_json_str(&text, overrides)?;
        if let TopologySpec::File { path: topo } = &mut cfg.topology {
            if topo.is_relative() {
                if let Some(dir) = path.parent() {
                    *topo = dir.join(&*topo);
                }
            }
        }
        Ok(cfg)
    }

    pub fn t_si_ns(&self) -> i64 {
        qnet_core::time::secs_to_nanos(self.t_si_seconds)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit = |path: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ConfigError::new(path, format!("must lie in [0, 1], got {v}")))
            }
        };
        unit("fractions.interface", self.fractions.interface)?;
        unit("fractions.junction", self.fractions.junction)?;
        unit("fractions.backbone", self.fractions.backbone)?;
        unit("server_probability", self.server_probability)?;
        unit("platforms.trapped_ion_share", self.platforms.trapped_ion_share)?;
        if !(self.epsilon_service > 0.0 && self.epsilon_service < 1.0) {
            return Err(ConfigError::new("epsilon_service", format!("must lie in (0, 1), got {}", self.epsilon_service)));
        }
        if !(self.t_si_seconds > 0.0 && self.t_si_seconds.is_finite()) {
            return Err(ConfigError::new("T_SI_seconds", format!("must be positive, got {}", self.t_si_seconds)));
        }
        if self.horizon_intervals == 0 {
            return Err(ConfigError::new("horizon_intervals", "must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(ConfigError::new("seeds", "at least one seed is required"));
        }
        for (name, v) in [("platforms.nv", self.platforms.nv), ("platforms.trapped-ion", self.platforms.trapped_ion)] {
            if v.is_nan() || v <= 0.0 {
                return Err(ConfigError::new(name, format!("lifetime must be positive, got {v}")));
            }
        }
        if let Some(w) = self.initial_window_s {
            if w.is_nan() || w <= 0.0 {
                return Err(ConfigError::new("initial_window_s", format!("must be positive, got {w}")));
            }
        }
        if let Some(b) = self.bonus_budget_s {
            if b.is_nan() || b <= 0.0 {
                return Err(ConfigError::new("bonus_budget_s", format!("must be positive, got {b}")));
            }
        }
        for (i, app) in self.applications.iter().enumerate() {
            app.check().map_err(|(field, msg)| ConfigError::new(format!("applications[{i}].{field}"), msg))?;
        }
        self.capabilities.check().map_err(|(field, msg)| ConfigError::new(format!("capabilities.{field}"), msg))?;
        if self.pgt.p_grid.is_empty() || self.pgt.p_grid.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(ConfigError::new("pgt.p_grid", "values must lie in (0, 1] and the grid must be non-empty"));
        }
        if self.pgt.attempt_period_s.is_nan() || self.pgt.attempt_period_s <= 0.0 {
            return Err(ConfigError::new("pgt.attempt_period_s", "must be positive"));
        }
        if let TopologySpec::Random { local_areas, end_nodes, .. } = self.topology {
            if local_areas == 0 || end_nodes < 2 {
                return Err(ConfigError::new("topology", "need at least one local area and two end nodes"));
            }
        }
        Ok(())
    }
}

/// Sets `a.b.c=value` in a JSON tree. The value is parsed as JSON when
/// possible and taken as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| ConfigError::new(assignment, "override must look like key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::new(assignment, "empty override key"));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let parent = if i == 0 { "<root>".to_string() } else { parts[..i].join(".") };
        let obj = node.as_object_mut().ok_or_else(|| ConfigError::new(parent, "cannot descend into a non-object value"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!()
}
