use serde::{Deserialize, Serialize};

use super::profile::SpectralProfile;
use crate::error::{invalid, Error, Result};
use crate::FWHM_PER_SIGMA;

/// Default number of grid points for constructed profiles.
pub const DEFAULT_GRID_POINTS: usize = 1 << 14;

/// Line shape of an individual comb peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeakShape {
    /// Gaussian calibrated to the comb efficiency law: each peak carries area
    /// `d·γ` and its Fourier amplitude at lag `m/Δ` squares to
    /// `exp(-(m/F)² π²/(4 ln 2))`. This needs a standard deviation of
    /// `γ/(4√ln2)`, i.e. a realized FWHM of `γ/√2`.
    #[default]
    CalibratedGaussian,
    /// Gaussian of FWHM `γ` and height `d`.
    Gaussian,
    /// Lorentzian of FWHM `γ` and height `d`.
    Lorentzian,
    /// Box of width `γ` and height `d`.
    Square,
}

impl PeakShape {
    /// Depth contributed at offset `x` from a peak centre.
    pub fn value(self, x: f64, width: f64, depth: f64) -> f64 {
        match self {
            PeakShape::CalibratedGaussian => {
                let sigma = calibrated_sigma(width);
                let height = depth * width / (sigma * (2.0 * std::f64::consts::PI).sqrt());
                height * (-0.5 * (x / sigma).powi(2)).exp()
            }
            PeakShape::Gaussian => gaussian(x, width, depth),
            PeakShape::Lorentzian => {
                let hw = 0.5 * width;
                depth * hw * hw / (x * x + hw * hw)
            }
            PeakShape::Square => {
                if x.abs() <= 0.5 * width {
                    depth
                } else {
                    0.0
                }
            }
        }
    }

    /// FWHM of the realized peak.
    pub fn realized_fwhm(self, width: f64) -> f64 {
        match self {
            PeakShape::CalibratedGaussian => calibrated_sigma(width) * FWHM_PER_SIGMA,
            _ => width,
        }
    }

    /// Half-extent beyond which the peak is negligible.
    fn support(self, width: f64) -> f64 {
        match self {
            PeakShape::Lorentzian => f64::INFINITY,
            _ => 4.0 * width,
        }
    }
}

fn calibrated_sigma(width: f64) -> f64 {
    width / (4.0 * std::f64::consts::LN_2.sqrt())
}

fn gaussian(x: f64, fwhm: f64, height: f64) -> f64 {
    height * (-4.0 * std::f64::consts::LN_2 * (x / fwhm).powi(2)).exp()
}

/// Parameters of an atomic frequency comb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombSpec {
    /// Peak spacing Δ, Hz.
    pub delta: f64,
    /// Peak width γ, Hz. The finesse is `delta / peak_fwhm`.
    pub peak_fwhm: f64,
    /// Peak optical depth d above the background.
    pub peak_depth: f64,
    /// Absorbing background d₀.
    pub background: f64,
    pub n_peaks: usize,
    /// Shift Δ₀ of the comb centre relative to the signal carrier, Hz.
    pub center_offset: f64,
    #[serde(default)]
    pub shape: PeakShape,
}

impl CombSpec {
    pub fn from_finesse(
        delta: f64,
        finesse: f64,
        peak_depth: f64,
        background: f64,
        n_peaks: usize,
    ) -> Self {
        Self {
            delta,
            peak_fwhm: delta / finesse,
            peak_depth,
            background,
            n_peaks,
            center_offset: 0.0,
            shape: PeakShape::default(),
        }
    }

    pub fn finesse(&self) -> f64 {
        self.delta / self.peak_fwhm
    }

    pub fn with_offset(mut self, center_offset: f64) -> Self {
        self.center_offset = center_offset;
        self
    }

    pub fn with_shape(mut self, shape: PeakShape) -> Self {
        self.shape = shape;
        self
    }

    /// Peak centre frequencies, lowest first.
    pub fn peak_positions(&self) -> Vec<f64> {
        let half = (self.n_peaks as f64 - 1.0) / 2.0;
        (0..self.n_peaks)
            .map(|n| self.center_offset + (n as f64 - half) * self.delta)
            .collect()
    }

    /// Smallest window that holds all peaks with one spacing of margin per side.
    pub fn min_window(&self) -> f64 {
        (self.n_peaks as f64 + 2.0) * self.delta
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(invalid("delta", "peak spacing must be positive"));
        }
        if !(self.peak_fwhm > 0.0) {
            return Err(invalid("peak_fwhm", "peak width must be positive"));
        }
        if !(self.finesse() > 1.0) {
            return Err(invalid(
                "finesse",
                format!("finesse must exceed 1, got {}", self.finesse()),
            ));
        }
        if self.n_peaks == 0 {
            return Err(invalid("n_peaks", "comb needs at least one peak"));
        }
        if !(self.peak_depth >= 0.0) || !(self.background >= 0.0) {
            return Err(invalid("peak_depth", "depths must be non-negative"));
        }
        Ok(())
    }
}

fn centered_grid(window: f64, points: usize) -> (f64, f64) {
    let step = window / points as f64;
    (-(points as f64 / 2.0).floor() * step, step)
}

/// Gaussian absorption line of FWHM `gamma_fwhm` centred at zero detuning.
pub fn make_single_line(
    gamma_fwhm: f64,
    peak_depth: f64,
    background: f64,
    window: f64,
    grid_points: usize,
) -> Result<SpectralProfile> {
    if !(gamma_fwhm > 0.0) {
        return Err(invalid(
            "gamma_fwhm",
            format!("line width must be positive, got {gamma_fwhm}"),
        ));
    }
    if !(peak_depth >= 0.0) {
        return Err(invalid("peak_depth", "peak depth must be non-negative"));
    }
    if window < 6.0 * gamma_fwhm {
        return Err(Error::WindowTooNarrow(format!(
            "window {window:e} Hz must be at least 6x the line FWHM ({:e} Hz) to hold the wings",
            6.0 * gamma_fwhm
        )));
    }
    if grid_points < 256 {
        return Err(invalid(
            "grid_points",
            format!("need at least 256 grid points, got {grid_points}"),
        ));
    }
    let (start, step) = centered_grid(window, grid_points);
    let depth = (0..grid_points)
        .map(|i| gaussian(start + i as f64 * step, gamma_fwhm, peak_depth))
        .collect();
    Ok(SpectralProfile::new(start, step, depth, background)?.with_feature_width(Some(gamma_fwhm)))
}

/// Sum of identical peaks at `center_offset + n·Δ`.
pub fn make_comb(spec: &CombSpec, window: f64, grid_points: usize) -> Result<SpectralProfile> {
    spec.validate()?;
    if window < spec.min_window() {
        return Err(Error::WindowTooNarrow(format!(
            "window {window:e} Hz must be at least (n_peaks + 2)·Δ = {:e} Hz",
            spec.min_window()
        )));
    }
    if grid_points < 256 {
        return Err(invalid(
            "grid_points",
            format!("need at least 256 grid points, got {grid_points}"),
        ));
    }
    let (start, step) = centered_grid(window, grid_points);
    let peaks = spec.peak_positions();
    let support = spec.shape.support(spec.peak_fwhm);
    let depth: Vec<f64> = (0..grid_points)
        .map(|i| {
            let x = start + i as f64 * step;
            peaks
                .iter()
                .filter(|p| (x - **p).abs() <= support)
                .map(|p| spec.shape.value(x - p, spec.peak_fwhm, spec.peak_depth))
                .sum()
        })
        .collect();

    let (floor, low_contrast) = if spec.n_peaks >= 2 {
        let lo = peaks[0];
        let hi = peaks[peaks.len() - 1];
        let inner: Vec<f64> = depth
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let x = start + *i as f64 * step;
                x >= lo && x <= hi
            })
            .map(|(_, d)| *d)
            .collect();
        let min = inner.iter().copied().fold(f64::INFINITY, f64::min);
        let max = inner.iter().copied().fold(0.0, f64::max);
        let contrast = if max > 0.0 { (max - min) / max } else { 0.0 };
        (min, contrast < 0.5)
    } else {
        (0.0, false)
    };
    Ok(SpectralProfile::new(start, step, depth, spec.background)?
        .with_comb_flags(floor, low_contrast)
        .with_feature_width(Some(spec.shape.realized_fwhm(spec.peak_fwhm))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn single_line_half_maximum_at_half_fwhm() {
        let p = make_single_line(1e6, 2.0, 0.0, 10e6, 1 << 14).unwrap();
        assert!((p.max_depth() - 2.0).abs() < 1e-9);
        assert!((p.depth_at(0.0) - 2.0).abs() < 1e-9);
        assert!((p.depth_at(0.5e6) - 1.0).abs() < 1e-6);
        assert!((p.depth_at(-0.5e6) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_depth_line_is_flat_background() {
        let p = make_single_line(1e6, 0.0, 1.5, 10e6, 1024).unwrap();
        assert!(p.depth().iter().all(|d| *d == 0.0));
        assert_eq!(p.background(), 1.5);
    }

    #[test]
    fn line_area_matches_gaussian_integral() {
        // Closed form d·γ·sqrt(π/(4 ln 2)) ≈ 2.129e6 Hz.
        let p = make_single_line(1e6, 2.0, 0.0, 10e6, 1 << 14).unwrap();
        let exact = 2.0 * 1e6 * (PI / (4.0 * LN_2)).sqrt();
        assert!((exact - 2.129e6).abs() < 1e3);
        assert!((p.area() - exact).abs() / exact < 1e-9);
        // independent quadrature: fine midpoint rule on the analytic shape
        let n = 200_000;
        let h = 10e6 / n as f64;
        let mid: f64 = (0..n)
            .map(|i| {
                let x = -5e6 + (i as f64 + 0.5) * h;
                2.0 * (-4.0 * LN_2 * (x / 1e6).powi(2)).exp()
            })
            .sum::<f64>()
            * h;
        assert!((mid - exact).abs() / exact < 1e-8);
    }

    #[test]
    fn line_rejects_bad_input() {
        assert!(matches!(
            make_single_line(1e6, 1.0, 0.0, 5e6, 1024),
            Err(Error::WindowTooNarrow(_))
        ));
        assert!(make_single_line(0.0, 1.0, 0.0, 5e6, 1024).is_err());
        assert!(make_single_line(-1.0, 1.0, 0.0, 5e6, 1024).is_err());
        assert!(make_single_line(1e6, 1.0, 0.0, 10e6, 100).is_err());
    }

    #[test]
    fn single_peak_comb_equals_single_line_for_literal_gaussian() {
        let spec = CombSpec {
            delta: 4e6,
            peak_fwhm: 1e6,
            peak_depth: 2.0,
            background: 0.5,
            n_peaks: 1,
            center_offset: 0.0,
            shape: PeakShape::Gaussian,
        };
        let comb = make_comb(&spec, 12e6, 4096).unwrap();
        let line = make_single_line(1e6, 2.0, 0.5, 12e6, 4096).unwrap();
        assert_eq!(comb.grid(), line.grid());
        for (a, b) in comb.depth().iter().zip(line.depth()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(comb.background(), line.background());
    }

    #[test]
    fn comb_rephasing_time_for_measured_spacing() {
        let spec = CombSpec::from_finesse(2.78e6, 2.6, 0.5, 1.5, 15);
        let comb = make_comb(&spec, spec.min_window(), 1 << 14).unwrap();
        assert!((1.0 / spec.delta - 360e-9).abs() < 1e-9);
        assert!(!comb.low_contrast());
        assert!(comb.effective_background() >= 1.5);
    }

    #[test]
    fn comb_offset_shifts_every_peak() {
        let base = CombSpec::from_finesse(2e6, 4.0, 1.0, 0.0, 5);
        let shifted = base.with_offset(1e6);
        let window = 16e6;
        let p = make_comb(&shifted, window, 1 << 14).unwrap();
        for expected in shifted.peak_positions() {
            // local argmax within ±Δ/2 of each expected peak
            let best = (0..p.len())
                .filter(|i| (p.detuning(*i) - expected).abs() < 1e6)
                .max_by(|a, b| p.depth()[*a].total_cmp(&p.depth()[*b]))
                .unwrap();
            assert!((p.detuning(best) - expected).abs() <= p.step());
        }
    }

    #[test]
    fn overlapping_comb_is_flagged() {
        let spec = CombSpec::from_finesse(1e6, 1.2, 1.0, 0.0, 5).with_shape(PeakShape::Lorentzian);
        let p = make_comb(&spec, 8e6, 4096).unwrap();
        assert!(p.low_contrast());
        assert!(p.floor() > 0.0);
    }

    #[test]
    fn calibrated_peak_area_is_depth_times_width() {
        let spec = CombSpec::from_finesse(2e6, 4.0, 0.8, 0.0, 1);
        let p = make_comb(&spec, 8e6, 1 << 14).unwrap();
        assert!((p.area() - 0.8 * 0.5e6).abs() / (0.4e6) < 1e-9);
    }

    #[test]
    fn comb_window_too_narrow() {
        let spec = CombSpec::from_finesse(1e6, 3.0, 1.0, 0.0, 5);
        assert!(matches!(
            make_comb(&spec, 6e6, 1024),
            Err(Error::WindowTooNarrow(_))
        ));
        let bad = CombSpec::from_finesse(1e6, 0.9, 1.0, 0.0, 5);
        assert!(make_comb(&bad, 20e6, 1024).is_err());
    }
}
