use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::StarkCalibration;

/// Constant voltage applied over `[t_start, t_end)`; the sign is the polarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub voltage: f64,
}

/// Piecewise-constant electric field applied to the sample.
///
/// Each feature ion carries a fixed Stark coordinate `x ~ N(0, 1)` and is
/// shifted by `x·σ_S(|u|)·sgn(u)`, so reversing the polarity mirrors every
/// shift. Outside all segments the field is off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSchedule {
    pub segments: Vec<FieldSegment>,
    pub calib: StarkCalibration,
}

impl FieldSchedule {
    /// No field at any time.
    pub fn off(calib: StarkCalibration) -> Self {
        Self {
            segments: Vec::new(),
            calib,
        }
    }

    /// `+u1` from `t_on` until `flip`, then `-u2` until `t_off`.
    ///
    /// Light absorbed at `t_abs` rephases at `flip + (flip - t_abs)/α` with
    /// `α = σ_S(u2)/σ_S(u1)`.
    pub fn crib(
        calib: StarkCalibration,
        u1: f64,
        u2: f64,
        t_on: f64,
        flip: f64,
        t_off: f64,
    ) -> Self {
        Self {
            segments: vec![
                FieldSegment {
                    t_start: t_on,
                    t_end: flip,
                    voltage: u1.abs(),
                },
                FieldSegment {
                    t_start: flip,
                    t_end: t_off,
                    voltage: -u2.abs(),
                },
            ],
            calib,
        }
    }

    pub fn with_segment(mut self, t_start: f64, t_end: f64, voltage: f64) -> Self {
        self.segments.push(FieldSegment {
            t_start,
            t_end,
            voltage,
        });
        self.segments
            .sort_by(|a, b| a.t_start.total_cmp(&b.t_start));
        self
    }

    pub fn is_off(&self) -> bool {
        self.segments
            .iter()
            .all(|s| s.voltage == 0.0 || s.t_end <= s.t_start)
    }

    pub fn validate(&self) -> Result<()> {
        self.calib.validate()?;
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.t_end > s.t_start) {
                return Err(invalid(
                    "segments",
                    format!("segment {i} has t_end <= t_start"),
                ));
            }
            if !s.voltage.is_finite() {
                return Err(invalid(
                    "segments",
                    format!("segment {i} voltage is not finite"),
                ));
            }
            if i > 0 && s.t_start < self.segments[i - 1].t_end - 1e-15 {
                return Err(invalid(
                    "segments",
                    format!("segment {i} overlaps or precedes segment {}", i - 1),
                ));
            }
        }
        Ok(())
    }

    /// Signed Stark width at time `t`, Hz.
    pub fn signed_sigma(&self, t: f64) -> f64 {
        self.segments
            .iter()
            .find(|s| t >= s.t_start && t < s.t_end)
            .map_or(0.0, |s| {
                s.voltage.signum() * self.calib.stark_sigma(s.voltage)
            })
    }

    /// `S(t) = ∫₀ᵗ σ_S(t')·sgn(u(t')) dt'`, in cycles per unit Stark
    /// coordinate.
    pub fn cumulative(&self, t: f64) -> f64 {
        self.segments
            .iter()
            .map(|s| {
                let overlap = (t.min(s.t_end) - s.t_start).max(0.0);
                overlap * s.voltage.signum() * self.calib.stark_sigma(s.voltage)
            })
            .sum()
    }

    /// Largest Stark width reached, Hz.
    pub fn max_sigma(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| self.calib.stark_sigma(s.voltage))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calib() -> StarkCalibration {
        StarkCalibration::new(70.0, 3.0, 1e6).unwrap()
    }

    #[test]
    fn symmetric_flip_returns_to_zero() {
        let f = FieldSchedule::crib(calib(), 70.0, 70.0, 0.0, 1e-6, 3e-6);
        assert!(f.cumulative(2e-6).abs() < 1e-12 * f.max_sigma());
        assert!((f.cumulative(1e-6) - 1e-6 * calib().stark_sigma(70.0)).abs() < 1e-9);
        assert!(f.signed_sigma(1.5e-6) < 0.0);
        assert_eq!(f.signed_sigma(5e-6), 0.0);
    }

    #[test]
    fn asymmetric_rephasing_time() {
        let c = calib();
        let f = FieldSchedule::crib(c, 35.0, 70.0, 0.0, 1e-6, 4e-6);
        let alpha = c.width_ratio(35.0, 70.0);
        let t_echo = 1e-6 + 1e-6 / alpha;
        assert!(f.cumulative(t_echo).abs() < 1e-9);
    }

    #[test]
    fn overlapping_segments_rejected() {
        let f = FieldSchedule::off(calib())
            .with_segment(0.0, 2.0, 1.0)
            .with_segment(1.0, 3.0, -1.0);
        assert!(f.validate().is_err());
        assert!(FieldSchedule::off(calib()).validate().is_ok());
    }
}
