use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Ward/bed a patient is assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BedLocation {
    pub ward: u16,
    pub bed: u16,
}

/// One reading from a patient's wearable sensors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VitalSigns {
    pub systolic: f64,
    pub diastolic: f64,
    pub heart_rate: f64,
    pub body_temp: f64,
    pub location: BedLocation,
    pub in_bed: bool,
    pub timestamp: u64,
}

/// One reading from a zone's environmental sensors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbientReading {
    pub smoke_detected: bool,
    pub ambient_temp: f64,
    pub zone: u16,
    pub timestamp: u64,
}

/// Alarm limits; a reading outside any of them raises a health alert.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VitalThresholds {
    pub systolic_high: f64,
    pub systolic_low: f64,
    pub heart_rate_high: f64,
    pub heart_rate_low: f64,
    pub body_temp_high: f64,
    pub body_temp_low: f64,
}

impl Default for VitalThresholds {
    fn default() -> Self {
        VitalThresholds {
            systolic_high: 180.0,
            systolic_low: 90.0,
            heart_rate_high: 120.0,
            heart_rate_low: 50.0,
            body_temp_high: 38.5,
            body_temp_low: 35.0,
        }
    }
}

impl VitalThresholds {
    pub fn is_abnormal(&self, vitals: &VitalSigns) -> bool {
        vitals.systolic > self.systolic_high
            || vitals.systolic < self.systolic_low
            || vitals.heart_rate > self.heart_rate_high
            || vitals.heart_rate < self.heart_rate_low
            || vitals.body_temp > self.body_temp_high
            || vitals.body_temp < self.body_temp_low
    }
}

/// Hard physical clamps applied to every generated reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardLimits {
    pub systolic: (f64, f64),
    pub diastolic: (f64, f64),
    pub heart_rate: (f64, f64),
    pub body_temp: (f64, f64),
}

impl Default for HardLimits {
    fn default() -> Self {
        HardLimits {
            systolic: (40.0, 260.0),
            diastolic: (20.0, 180.0),
            heart_rate: (15.0, 260.0),
            body_temp: (30.0, 45.0),
        }
    }
}

/// Per-vital noise amplitudes around a patient's baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseScales {
    pub systolic: f64,
    pub diastolic: f64,
    pub heart_rate: f64,
    pub body_temp: f64,
}

impl Default for NoiseScales {
    fn default() -> Self {
        NoiseScales {
            systolic: 8.0,
            diastolic: 6.0,
            heart_rate: 6.0,
            body_temp: 0.25,
        }
    }
}

impl NoiseScales {
    pub const ZERO: NoiseScales = NoiseScales {
        systolic: 0.0,
        diastolic: 0.0,
        heart_rate: 0.0,
        body_temp: 0.0,
    };
}

/// A patient's resting baseline, drawn once at cohort setup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatientProfile {
    pub id: u32,
    pub baseline_systolic: f64,
    pub baseline_diastolic: f64,
    pub baseline_heart_rate: f64,
    pub baseline_body_temp: f64,
    pub location: BedLocation,
}

impl PatientProfile {
    pub fn draw(id: u32, rng: &mut ChaCha8Rng) -> Self {
        PatientProfile {
            id,
            baseline_systolic: rng.random_range(105.0..145.0),
            baseline_diastolic: rng.random_range(65.0..90.0),
            baseline_heart_rate: rng.random_range(60.0..95.0),
            baseline_body_temp: rng.random_range(36.2..37.2),
            location: BedLocation {
                ward: (id / 40) as u16,
                bed: (id % 40) as u16,
            },
        }
    }
}

fn jitter(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    if scale == 0.0 {
        0.0
    } else {
        rng.random_range(-scale..=scale)
    }
}

/// Draws one vitals reading: baseline plus bounded noise, with a configured
/// fraction of draws pushed past an alarm threshold.
pub fn generate_vitals(
    rng: &mut ChaCha8Rng,
    profile: &PatientProfile,
    noise: &NoiseScales,
    abnormal_prob: f64,
    thresholds: &VitalThresholds,
    limits: &HardLimits,
    timestamp: u64,
) -> VitalSigns {
    let mut vitals = VitalSigns {
        systolic: profile.baseline_systolic + jitter(rng, noise.systolic),
        diastolic: profile.baseline_diastolic + jitter(rng, noise.diastolic),
        heart_rate: profile.baseline_heart_rate + jitter(rng, noise.heart_rate),
        body_temp: profile.baseline_body_temp + jitter(rng, noise.body_temp),
        location: profile.location,
        in_bed: rng.random_range(0.0..1.0) < 0.9,
        timestamp,
    };
    if rng.random_range(0.0..1.0) < abnormal_prob {
        // Strictly past the threshold even after rounding.
        let margin = 1.01 + rng.random_range(0.0..0.2);
        let high_side = rng.random_range(0.0..1.0) < 0.5;
        match rng.random_range(0..3u8) {
            0 => {
                vitals.systolic = if high_side {
                    thresholds.systolic_high * margin
                } else {
                    thresholds.systolic_low / margin
                };
            }
            1 => {
                vitals.heart_rate = if high_side {
                    thresholds.heart_rate_high * margin
                } else {
                    thresholds.heart_rate_low / margin
                };
            }
            _ => {
                vitals.body_temp = if high_side {
                    thresholds.body_temp_high * margin
                } else {
                    thresholds.body_temp_low / margin
                };
            }
        }
    }
    vitals.systolic = vitals.systolic.clamp(limits.systolic.0, limits.systolic.1);
    vitals.diastolic = vitals
        .diastolic
        .clamp(limits.diastolic.0, limits.diastolic.1);
    vitals.heart_rate = vitals
        .heart_rate
        .clamp(limits.heart_rate.0, limits.heart_rate.1);
    vitals.body_temp = vitals
        .body_temp
        .clamp(limits.body_temp.0, limits.body_temp.1);
    vitals
}

/// Draws one ambient reading for a zone; heat spikes model nearby fires.
pub fn generate_ambient(
    rng: &mut ChaCha8Rng,
    zone: u16,
    smoke_prob: f64,
    heat_spike_prob: f64,
    timestamp: u64,
) -> AmbientReading {
    let smoke_detected = rng.random_range(0.0..1.0) < smoke_prob;
    let ambient_temp = if rng.random_range(0.0..1.0) < heat_spike_prob {
        rng.random_range(46.0..80.0)
    } else {
        rng.random_range(18.0..27.0)
    };
    AmbientReading {
        smoke_detected,
        ambient_temp,
        zone,
        timestamp,
    }
}
