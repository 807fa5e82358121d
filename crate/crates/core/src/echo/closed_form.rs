//! Closed-form efficiency, timing and phase laws.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::spectral::StarkCalibration;

/// Forward CRIB efficiency for a Gaussian initial line of standard deviation
/// `gamma_std` (Hz), stored for a total time `t` (s).
pub fn crib_efficiency(d_br: f64, d0: f64, t: f64, gamma_std: f64) -> f64 {
    let dephase = t * 2.0 * PI * gamma_std;
    d_br * d_br * (-d_br).exp() * (-d0).exp() * (-dephase * dephase).exp()
}

/// Dephasing factor of echo order `m` for a comb of Gaussian teeth.
pub fn afc_dephasing(finesse: f64, m: u32) -> f64 {
    let m = m as f64;
    (-(m * m) / (finesse * finesse) * PI * PI / (4.0 * LN_2)).exp()
}

/// Efficiency of AFC echo `m` when all earlier echoes are suppressed.
pub fn afc_efficiency_order(d: f64, finesse: f64, d0: f64, m: u32) -> f64 {
    let de = d / finesse;
    de * de * (-de).exp() * (-d0).exp() * afc_dephasing(finesse, m)
}

/// Forward AFC efficiency of the first echo.
pub fn afc_efficiency(d: f64, finesse: f64, d0: f64) -> f64 {
    afc_efficiency_order(d, finesse, d0, 1)
}

/// Finesse maximizing [`afc_efficiency`] at fixed `d`, by golden-section
/// search over `[lo, hi]`.
pub fn optimal_finesse(d: f64, d0: f64, lo: f64, hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    while (b - a).abs() > 1e-10 * (1.0 + a.abs()) {
        if afc_efficiency(d, c, d0) > afc_efficiency(d, e, d0) {
            b = e;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        e = a + g * (b - a);
    }
    0.5 * (a + b)
}

/// Rephasing times `m/Δ` for `m = 1..=m_max`.
pub fn afc_echo_times(delta: f64, m_max: u32) -> Vec<f64> {
    (1..=m_max).map(|m| m as f64 / delta).collect()
}

/// Echo phase, both wrapped to `(-π, π]` and unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EchoPhase {
    pub wrapped: f64,
    pub unwrapped: f64,
}

/// Phase `2π·m·Δ₀/Δ` picked up by echo `m` of a comb offset by `Δ₀`.
pub fn afc_echo_phase(delta0: f64, delta: f64, m: u32) -> EchoPhase {
    let unwrapped = 2.0 * PI * m as f64 * delta0 / delta;
    EchoPhase {
        wrapped: wrap_phase(unwrapped),
        unwrapped,
    }
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Expected effect of asymmetric CRIB fields on the echo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchPrediction {
    /// Ratio of added Stark widths after and before the flip.
    pub alpha: f64,
    /// Echo intensity FWHM, s.
    pub output_fwhm: f64,
    /// Factor applied to the flip-to-echo delay.
    pub tau_scale: f64,
}

/// Echo width after storage with `u1` before the flip and `u2` after it.
pub fn compress_stretch_fwhm(
    input_fwhm: f64,
    u1: f64,
    u2: f64,
    calib: &StarkCalibration,
) -> StretchPrediction {
    let alpha = calib.width_ratio(u1.abs(), u2.abs());
    StretchPrediction {
        alpha,
        output_fwhm: input_fwhm / alpha,
        tau_scale: 1.0 / alpha,
    }
}

/// Protocol parameters for [`multimode_capacity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Protocol {
    /// Broadening factor applied to the initial line.
    Crib { broadening: f64 },
    /// Number of comb teeth and modes per tooth.
    Afc { n_peaks: usize, modes_per_peak: f64 },
}

/// Number of temporal modes that fit in the memory.
pub fn multimode_capacity(protocol: Protocol) -> usize {
    match protocol {
        Protocol::Crib { broadening } => broadening.max(0.0).floor() as usize,
        Protocol::Afc {
            n_peaks,
            modes_per_peak,
        } => (modes_per_peak * n_peaks as f64).max(0.0).floor() as usize,
    }
}

/// Broadened optical depth `d/b` reached when storing `n_modes` in CRIB.
pub fn crib_depth_for_modes(d: f64, n_modes: usize) -> f64 {
    d / n_modes.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crib_values() {
        assert_eq!(crib_efficiency(0.0, 0.0, 0.0, 1e3), 0.0);
        assert!((crib_efficiency(2.0, 0.0, 0.0, 1e3) - 4.0 * (-2.0f64).exp()).abs() < 1e-15);
        let v = crib_efficiency(2.0 / 3.0, 1.5, 0.0, 1e3);
        assert!((v - 4.0 / 9.0 * (-2.0f64 / 3.0 - 1.5).exp()).abs() < 1e-15);
        assert!((v - 0.0509).abs() < 5e-5);
    }

    #[test]
    fn crib_maximum_at_two() {
        let best = (1..400)
            .map(|k| k as f64 * 0.01)
            .max_by(|a, b| {
                crib_efficiency(*a, 0.0, 0.0, 0.0).total_cmp(&crib_efficiency(*b, 0.0, 0.0, 0.0))
            })
            .unwrap();
        assert!((best - 2.0).abs() < 0.011);
    }

    #[test]
    fn afc_values() {
        assert_eq!(afc_efficiency(0.0, 2.6, 1.5), 0.0);
        assert!((afc_efficiency(0.5, 2.6, 1.5) - 0.0040).abs() < 1e-4);
        assert!((afc_dephasing(2.6, 1) - 0.59).abs() < 0.005);
        assert!((afc_dephasing(2.6, 2) - 0.122).abs() < 0.002);
    }

    #[test]
    fn optimal_finesse_is_stationary() {
        let f = optimal_finesse(0.5, 1.5, 1.01, 20.0);
        let h = 1e-4;
        assert!(afc_efficiency(0.5, f, 1.5) >= afc_efficiency(0.5, f + h, 1.5));
        assert!(afc_efficiency(0.5, f, 1.5) >= afc_efficiency(0.5, f - h, 1.5));
    }

    #[test]
    fn echo_times_and_phases() {
        let t = afc_echo_times(2.78e6, 2);
        assert!((t[0] - 360e-9).abs() < 1e-9 && (t[1] - 720e-9).abs() < 2e-9);
        assert_eq!(afc_echo_times(1.0, 1), vec![1.0]);
        assert_eq!(afc_echo_phase(0.0, 1e6, 3).wrapped, 0.0);
        assert!((afc_echo_phase(0.5e6, 1e6, 1).wrapped - PI).abs() < 1e-12);
        let p1 = afc_echo_phase(0.3e6, 1e6, 1);
        let p2 = afc_echo_phase(0.3e6, 1e6, 2);
        assert!((p2.unwrapped - 2.0 * p1.unwrapped).abs() < 1e-12);
        assert!((p2.wrapped - wrap_phase(2.0 * p1.wrapped)).abs() < 1e-12);
    }

    #[test]
    fn stretch_factors() {
        let c = StarkCalibration::new(70.0, 3.0, 1e6).unwrap();
        let same = compress_stretch_fwhm(100e-9, 65.0, 65.0, &c);
        assert!((same.alpha - 1.0).abs() < 1e-15 && (same.output_fwhm - 100e-9).abs() < 1e-20);
        let u2 = c.voltage_for_sigma(2.0 * c.stark_sigma(40.0));
        let double = compress_stretch_fwhm(100e-9, 40.0, u2, &c);
        assert!((double.output_fwhm - 50e-9).abs() < 1e-15);
    }

    #[test]
    fn capacity_rules() {
        assert_eq!(multimode_capacity(Protocol::Crib { broadening: 1.0 }), 1);
        assert_eq!(multimode_capacity(Protocol::Crib { broadening: 3.7 }), 3);
        // doubling d at fixed broadened depth doubles the broadening factor
        let target = 0.5;
        let n1 = multimode_capacity(Protocol::Crib {
            broadening: 1.0 / target,
        });
        let n2 = multimode_capacity(Protocol::Crib {
            broadening: 2.0 / target,
        });
        assert_eq!(n2, 2 * n1);
        assert_eq!(crib_depth_for_modes(2.0, n2), target);
        let a = multimode_capacity(Protocol::Afc {
            n_peaks: 15,
            modes_per_peak: 1.0,
        });
        let b = multimode_capacity(Protocol::Afc {
            n_peaks: 30,
            modes_per_peak: 1.0,
        });
        assert_eq!(b, 2 * a);
    }
}
