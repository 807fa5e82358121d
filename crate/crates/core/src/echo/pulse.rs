use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::FWHM_PER_SIGMA;

/// Gaussian weak coherent input pulse.
///
/// The field is normalized so that `∫|E(t)|² dt = mean_photons`, i.e.
/// `|E(t)|²` is a photon flux in photons/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    /// Time of the intensity maximum, s.
    pub center_time: f64,
    /// Intensity FWHM, s.
    pub fwhm: f64,
    /// Mean photon number n̄.
    pub mean_photons: f64,
    /// Carrier detuning from the profile origin, Hz.
    pub carrier_offset: f64,
}

impl Pulse {
    pub fn new(center_time: f64, fwhm: f64, mean_photons: f64) -> Self {
        Self {
            center_time,
            fwhm,
            mean_photons,
            carrier_offset: 0.0,
        }
    }

    pub fn with_carrier(mut self, offset: f64) -> Self {
        self.carrier_offset = offset;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm > 0.0) {
            return Err(invalid("fwhm", "pulse duration must be positive"));
        }
        if !(self.mean_photons >= 0.0) {
            return Err(invalid("mean_photons", "mean photon number must be >= 0"));
        }
        Ok(())
    }

    /// Intensity FWHM of the spectrum, Hz.
    pub fn spectral_fwhm(&self) -> f64 {
        4.0 * LN_2 / (2.0 * PI * self.fwhm)
    }

    /// Standard deviation of the intensity spectrum, Hz.
    pub fn spectral_sigma(&self) -> f64 {
        self.spectral_fwhm() / FWHM_PER_SIGMA
    }

    /// Peak photon flux, photons/s.
    pub fn peak_flux(&self) -> f64 {
        self.mean_photons * 2.0 * (LN_2 / PI).sqrt() / self.fwhm
    }

    pub fn intensity(&self, t: f64) -> f64 {
        let x = (t - self.center_time) / self.fwhm;
        self.peak_flux() * (-4.0 * LN_2 * x * x).exp()
    }

    /// Complex field envelope in the frame rotating at the profile origin.
    pub fn field(&self, t: f64) -> Complex64 {
        let x = (t - self.center_time) / self.fwhm;
        let a = self.peak_flux().sqrt() * (-2.0 * LN_2 * x * x).exp();
        Complex64::from_polar(a, 2.0 * PI * self.carrier_offset * (t - self.center_time))
    }
}
