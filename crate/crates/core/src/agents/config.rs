use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::vitals::{HardLimits, NoiseScales, VitalThresholds};
use crate::ids::LayerAssignment;
use crate::nslkdd::AttackCatalog;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Toml(#[from] Box<toml::de::Error>),
    #[error("traffic pool {0:?} is empty but its mix weight is positive")]
    EmptyPool(String),
    #[error("no model available for layer {0}")]
    MissingModel(crate::ids::IdsLayer),
    #[error(transparent)]
    Ids(#[from] crate::ids::IdsError),
}

/// Full simulation configuration; every field has a default, so a config
/// file only lists what it overrides. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Cohort size.
    pub patient_count: u32,
    /// Number of synchronous rounds to run.
    pub tick_count: u32,
    /// Seed for every random draw in the run.
    pub seed: u64,
    /// Probability that an emitted message carries an attack record.
    pub injection_rate: f64,
    /// Relative weights of the attack classes used for injection.
    pub attack_mix: BTreeMap<String, f64>,
    /// Number of environmental zones.
    pub ambient_zone_count: u16,
    /// Per-tick probability of smoke in a zone.
    pub smoke_prob: f64,
    /// Per-tick probability of an over-temperature spike in a zone.
    pub heat_spike_prob: f64,
    /// Ambient temperature alarm limit (degrees C).
    pub ambient_temp_high: f64,
    /// Per-tick probability that a patient sends an explicit request.
    pub patient_request_prob: f64,
    /// Per-tick probability that the physician requests a treatment.
    pub treat_request_prob: f64,
    /// Per-tick probability that the physician polls a patient's status.
    pub status_request_prob: f64,
    /// Fraction of vitals draws pushed past an alarm threshold.
    pub abnormal_vitals_prob: f64,
    pub vitals_noise: NoiseScales,
    pub thresholds: VitalThresholds,
    pub hard_limits: HardLimits,
    pub assignment: LayerAssignment,
}

impl Default for SimConfig {
    fn default() -> Self {
        let catalog = AttackCatalog::standard();
        SimConfig {
            patient_count: 1000,
            tick_count: 100,
            seed: 42,
            injection_rate: 0.05,
            attack_mix: catalog.names().map(|n| (n.to_string(), 1.0)).collect(),
            ambient_zone_count: 25,
            smoke_prob: 0.002,
            heat_spike_prob: 0.001,
            ambient_temp_high: 45.0,
            patient_request_prob: 0.02,
            treat_request_prob: 0.2,
            status_request_prob: 0.2,
            abnormal_vitals_prob: 0.05,
            vitals_noise: NoiseScales::default(),
            thresholds: VitalThresholds::default(),
            hard_limits: HardLimits::default(),
            assignment: LayerAssignment::standard(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.patient_count < 1 {
            return Err(SimError::InvalidConfig(
                "patient_count must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.injection_rate) {
            return Err(SimError::InvalidConfig(format!(
                "injection_rate must lie in [0, 1], got {}",
                self.injection_rate
            )));
        }
        for (name, prob) in [
            ("smoke_prob", self.smoke_prob),
            ("heat_spike_prob", self.heat_spike_prob),
            ("patient_request_prob", self.patient_request_prob),
            ("treat_request_prob", self.treat_request_prob),
            ("status_request_prob", self.status_request_prob),
            ("abnormal_vitals_prob", self.abnormal_vitals_prob),
        ] {
            if !(0.0..=1.0).contains(&prob) {
                return Err(SimError::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {prob}"
                )));
            }
        }
        if self.attack_mix.values().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(SimError::InvalidConfig(
                "attack_mix weights must be non-negative".into(),
            ));
        }
        if self.injection_rate > 0.0 && self.attack_mix.values().sum::<f64>() <= 0.0 {
            return Err(SimError::InvalidConfig(
                "injection_rate is positive but every attack_mix weight is zero".into(),
            ));
        }
        if !self.assignment.is_total() {
            return Err(SimError::InvalidConfig(
                "layer assignment must cover all five agent kinds".into(),
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let config: SimConfig = toml::from_str(text).map_err(Box::new)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, SimError> {
        let text = fs::read_to_string(path).map_err(|source| SimError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
