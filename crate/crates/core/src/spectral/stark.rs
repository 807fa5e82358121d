use serde::{Deserialize, Serialize};

use super::profile::SpectralProfile;
use crate::error::{invalid, Result};
use crate::FWHM_PER_SIGMA;

/// Linear voltage-to-broadening calibration anchored at one measured point.
///
/// The broadening factor is `b(u) = 1 + (b_ref - 1)·u/u_ref`. Stark shifts are
/// Gaussian-distributed across the ensemble, so a line of FWHM
/// `line_fwhm_ref` broadened by `b` carries an added Stark width (standard
/// deviation) of `σ_line·sqrt(b² - 1)`, added in quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarkCalibration {
    /// Reference voltage u_ref, V.
    pub voltage_ref: f64,
    /// Broadening factor b_ref reached at `voltage_ref`.
    pub factor_ref: f64,
    /// FWHM of the unbroadened reference line, Hz.
    pub line_fwhm_ref: f64,
}

impl StarkCalibration {
    pub fn new(voltage_ref: f64, factor_ref: f64, line_fwhm_ref: f64) -> Result<Self> {
        let c = Self {
            voltage_ref,
            factor_ref,
            line_fwhm_ref,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.voltage_ref > 0.0) {
            return Err(invalid("voltage_ref", "reference voltage must be positive"));
        }
        if !(self.factor_ref > 1.0) {
            return Err(invalid("factor_ref", "reference broadening must exceed 1"));
        }
        if !(self.line_fwhm_ref > 0.0) {
            return Err(invalid(
                "line_fwhm_ref",
                "reference line width must be positive",
            ));
        }
        Ok(())
    }

    /// Broadening factor at |u|.
    pub fn broadening(&self, voltage: f64) -> f64 {
        1.0 + (self.factor_ref - 1.0) * voltage.abs() / self.voltage_ref
    }

    /// Standard deviation of the Stark shift distribution at |u|, Hz.
    pub fn stark_sigma(&self, voltage: f64) -> f64 {
        let b = self.broadening(voltage);
        self.line_fwhm_ref / FWHM_PER_SIGMA * (b * b - 1.0).max(0.0).sqrt()
    }

    /// Voltage whose Stark width equals `sigma` (Hz).
    pub fn voltage_for_sigma(&self, sigma: f64) -> f64 {
        let s = sigma * FWHM_PER_SIGMA / self.line_fwhm_ref;
        let b = (1.0 + s * s).sqrt();
        (b - 1.0) * self.voltage_ref / (self.factor_ref - 1.0)
    }

    /// Ratio of added Stark widths between two voltages.
    pub fn width_ratio(&self, u1: f64, u2: f64) -> f64 {
        self.stark_sigma(u2) / self.stark_sigma(u1)
    }
}

/// Broadening factor for voltage `u` under `calib`.
pub fn voltage_to_broadening(u: f64, calib: &StarkCalibration) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(invalid("voltage", format!("voltage must be >= 0, got {u}")));
    }
    calib.validate()?;
    Ok(calib.broadening(u))
}

/// Rescales the feature `δ → b·δ` with depth `1/b`; the background is left
/// alone. The grid is scaled with the feature, so the window grows by `b` and
/// nothing is truncated or interpolated.
pub fn stark_broaden(profile: &SpectralProfile, factor: f64) -> Result<SpectralProfile> {
    if !(factor >= 1.0) || !factor.is_finite() {
        return Err(invalid(
            "factor",
            format!("broadening factor must be >= 1, got {factor}"),
        ));
    }
    let depth = profile.depth().iter().map(|d| d / factor).collect();
    let out = SpectralProfile::new(
        profile.start() * factor,
        profile.step() * factor,
        depth,
        profile.background(),
    )?;
    Ok(out
        .with_comb_flags(profile.floor() / factor, profile.low_contrast())
        .with_feature_width(profile.feature_width().map(|w| w * factor)))
}
