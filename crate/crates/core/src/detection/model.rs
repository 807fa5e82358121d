use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Single-photon detector and the optical path in front of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    /// Detection efficiency.
    pub efficiency: f64,
    /// Dark count rate, Hz.
    pub dark_rate: f64,
    /// Transmission from the sample output to the detector.
    pub path_transmission: f64,
    /// Fraction of spontaneously emitted photons that reach the detection
    /// mode, per excited-ion equivalent.
    pub fluorescence_collection: f64,
    /// Whether the chopper passes light during the storage window.
    pub chopper_open: bool,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            efficiency: 0.07,
            dark_rate: 10.0,
            path_transmission: 0.15,
            fluorescence_collection: 0.0,
            chopper_open: true,
        }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("efficiency", self.efficiency),
            ("path_transmission", self.path_transmission),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(
                    name,
                    format!("probability must lie in [0, 1], got {p}"),
                ));
            }
        }
        if !(self.dark_rate >= 0.0) {
            return Err(invalid("dark_rate", "must be >= 0"));
        }
        if !(self.fluorescence_collection >= 0.0) {
            return Err(invalid("fluorescence_collection", "must be >= 0"));
        }
        Ok(())
    }

    /// Probability that a photon leaving the sample is counted.
    pub fn signal_gain(&self) -> f64 {
        if self.chopper_open {
            self.path_transmission * self.efficiency
        } else {
            0.0
        }
    }

    /// Counts per excited-ion-equivalent emission.
    pub fn fluorescence_gain(&self) -> f64 {
        if self.chopper_open {
            self.fluorescence_collection * self.efficiency
        } else {
            0.0
        }
    }
}

/// Gaussian phase jitter of the local oscillator between preparation and
/// measurement, drawn once per preparation cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseNoiseModel {
    /// Standard deviation, rad.
    pub sigma: f64,
}

impl PhaseNoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) {
            return Err(invalid("sigma", "phase noise must be >= 0"));
        }
        Ok(())
    }

    /// Jitter giving first-order visibility `v1`.
    pub fn for_visibility(v1: f64) -> Result<Self> {
        if !(v1 > 0.0 && v1 <= 1.0) {
            return Err(invalid(
                "visibility",
                format!("must lie in (0, 1], got {v1}"),
            ));
        }
        Ok(Self {
            sigma: (-2.0 * v1.ln()).sqrt(),
        })
    }
}

/// Fringe visibility of echo `m` under phase jitter `sigma`: `e^{-(mσ)²/2}`.
pub fn visibility_model(sigma: f64, m: u32) -> f64 {
    let x = m as f64 * sigma;
    (-0.5 * x * x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn visibility_values() {
        assert_eq!(visibility_model(0.0, 3), 1.0);
        let noise = PhaseNoiseModel::for_visibility(0.89).unwrap();
        assert!((noise.sigma - 0.483).abs() < 1e-3);
        assert!((visibility_model(noise.sigma, 1) - 0.89).abs() < 1e-12);
        assert!((visibility_model(noise.sigma, 2) - 0.627).abs() < 1e-3);
    }

    #[test]
    fn detector_defaults_and_validation() {
        let d = DetectorModel::default();
        assert!(d.validate().is_ok());
        assert!((d.signal_gain() - 0.0105).abs() < 1e-15);
        let closed = DetectorModel {
            chopper_open: false,
            ..d
        };
        assert_eq!(closed.signal_gain(), 0.0);
        assert!(DetectorModel {
            efficiency: 1.5,
            ..d
        }
        .validate()
        .is_err());
        assert!(DetectorModel {
            dark_rate: -1.0,
            ..d
        }
        .validate()
        .is_err());
    }
}
