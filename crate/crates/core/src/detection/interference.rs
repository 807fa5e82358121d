use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::histogram::poisson;
use super::model::{DetectorModel, PhaseNoiseModel};
use crate::echo::{EchoResult, Pulse};
use crate::error::{invalid, Error, Result};
use crate::spectral::CombSpec;

/// Allowed relative amplitude mismatch between echo and local oscillator.
pub const LO_TOLERANCE: f64 = 0.05;

/// Counting and averaging settings of a fringe scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    /// Echo order interfered with the local oscillator.
    pub order: u32,
    /// Trials per scan point.
    pub n_trials: u64,
    /// Preparation cycles per scan point; each draws one phase offset.
    pub cycles: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub delta0: f64,
    pub counts: u64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceScan {
    pub order: u32,
    pub points: Vec<ScanPoint>,
    /// `|A_LO/A_echo - 1|`.
    pub lo_mismatch: f64,
    /// Expected dark counts per scan point.
    pub dark_counts: f64,
    pub warning: Option<String>,
}

impl InterferenceScan {
    pub fn xy(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.delta0, p.counts as f64))
            .collect()
    }

    /// Counts with the expected dark background removed.
    pub fn net_xy(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.delta0, p.counts as f64 - self.dark_counts))
            .collect()
    }

    /// Rows `delta0_hz,counts,counts_err`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::new();
        writeln!(buf, "delta0_hz,counts,counts_err").ok();
        for p in &self.points {
            writeln!(
                buf,
                "{:.16e},{},{:.16e}",
                p.delta0,
                p.counts,
                (p.counts as f64).sqrt()
            )
            .ok();
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }
}

fn echo_photons(echo: &EchoResult, order: u32) -> Result<(f64, f64, f64)> {
    let e = echo
        .echo(order)
        .ok_or_else(|| Error::Undefined(format!("echo of order {order} not found")))?;
    Ok((e.efficiency * echo.input.mean_photons, e.phase, e.fwhm))
}

/// Local oscillator whose transmitted photon number equals that of echo
/// `order`, with the timing and shape of `template`.
pub fn matched_lo(echo: &EchoResult, order: u32, template: Pulse) -> Result<Pulse> {
    let (photons, _, _) = echo_photons(echo, order)?;
    if !(echo.transmitted > 0.0) {
        return Err(Error::Undefined("sample transmits nothing".into()));
    }
    Ok(Pulse {
        mean_photons: photons / echo.transmitted,
        ..template
    })
}

/// Counts of the echo interfering with a transmitted local oscillator while
/// the comb offset Δ₀ is scanned.
///
/// The echo phase follows `2π·m·Δ₀/Δ` from the simulated echo at the comb's
/// own offset. Each preparation cycle adds a Gaussian laser phase jump
/// `δφ ~ N(0, σ)` that echo `m` sees `m` times.
pub fn interference_scan(
    echo: &EchoResult,
    lo: &Pulse,
    delta_scan: &[f64],
    comb: &CombSpec,
    noise: &PhaseNoiseModel,
    det: &DetectorModel,
    settings: ScanSettings,
) -> Result<InterferenceScan> {
    noise.validate()?;
    det.validate()?;
    if settings.order == 0 {
        return Err(invalid("order", "echo order starts at 1"));
    }
    if settings.cycles == 0 || settings.n_trials < settings.cycles {
        return Err(invalid("cycles", "need at least one trial per cycle"));
    }
    let m = settings.order as f64;
    let (n_echo, phase0, fwhm) = echo_photons(echo, settings.order)?;
    let n_lo = lo.mean_photons * echo.transmitted;
    let (a_echo, a_lo) = (n_echo.sqrt(), n_lo.sqrt());
    let lo_mismatch = if a_echo > 0.0 {
        (a_lo / a_echo - 1.0).abs()
    } else {
        f64::INFINITY
    };
    let warning = (lo_mismatch > LO_TOLERANCE).then(|| {
        format!(
            "local oscillator amplitude differs from the echo by {:.1}% (limit {:.0}%)",
            100.0 * lo_mismatch,
            100.0 * LO_TOLERANCE
        )
    });
    let window = 4.0 * fwhm;
    let per_cycle = settings.n_trials as f64 / settings.cycles as f64;
    let gain = det.signal_gain();
    let points = delta_scan
        .iter()
        .enumerate()
        .map(|(i, &delta0)| {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            rng.set_stream(i as u64);
            let phi = phase0 + 2.0 * PI * m * (delta0 - comb.center_offset) / comb.delta;
            let mut mean = 0.0;
            for _ in 0..settings.cycles {
                let jitter: f64 = rng.sample_normal();
                let photons =
                    n_echo + n_lo + 2.0 * a_echo * a_lo * (phi + m * noise.sigma * jitter).cos();
                mean += per_cycle * (gain * photons.max(0.0) + det.dark_rate * window);
            }
            ScanPoint {
                delta0,
                counts: poisson(&mut rng, mean),
                expected: mean,
            }
        })
        .collect();
    Ok(InterferenceScan {
        order: settings.order,
        points,
        lo_mismatch,
        dark_counts: settings.n_trials as f64 * det.dark_rate * window,
        warning,
    })
}

trait NormalDraw {
    fn sample_normal(&mut self) -> f64;
}

impl NormalDraw for ChaCha8Rng {
    fn sample_normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::fit::fit_fringe;
    use crate::detection::model::visibility_model;
    use crate::echo::{simulate_storage, FieldSchedule, TimeGrid};
    use crate::spectral::{make_comb, StarkCalibration};

    fn afc() -> (EchoResult, CombSpec) {
        let spec = CombSpec::from_finesse(2.78e6, 2.6, 0.5, 1.5, 15);
        let comb = make_comb(&spec, spec.min_window(), 1 << 12).unwrap();
        let pulse = Pulse::new(0.3e-6, 100e-9, 1.0);
        let off = FieldSchedule::off(StarkCalibration::new(70.0, 3.0, 1e6).unwrap());
        let r = simulate_storage(&comb, &pulse, &off, TimeGrid::new(2e-9, 1.2e-6)).unwrap();
        (r, spec)
    }

    fn scan(order: u32, sigma: f64, seed: u64) -> (InterferenceScan, CombSpec) {
        let (r, spec) = afc();
        let lo = matched_lo(&r, order, r.input).unwrap();
        let deltas: Vec<f64> = (0..24).map(|i| i as f64 * spec.delta / 12.0).collect();
        let det = DetectorModel {
            dark_rate: 0.0,
            ..DetectorModel::default()
        };
        let s = ScanSettings {
            order,
            n_trials: 200_000_000,
            cycles: 20_000,
            seed,
        };
        let out = interference_scan(&r, &lo, &deltas, &spec, &PhaseNoiseModel { sigma }, &det, s)
            .unwrap();
        (out, spec)
    }

    #[test]
    fn noiseless_matched_fringe_has_unit_visibility() {
        let (s, spec) = scan(1, 0.0, 1);
        assert!(s.lo_mismatch < 1e-9 && s.warning.is_none());
        let fit = fit_fringe(&s.xy()).unwrap();
        assert!((fit.visibility - 1.0).abs() < 3.0 * fit.visibility_err + 0.01);
        assert!((fit.period / spec.delta - 1.0).abs() < 0.02);
    }

    #[test]
    fn second_order_period_and_visibility() {
        let sigma = PhaseNoiseModel::for_visibility(0.9).unwrap().sigma;
        let (s, spec) = scan(2, sigma, 2);
        let fit = fit_fringe(&s.xy()).unwrap();
        assert!((fit.period / (spec.delta / 2.0) - 1.0).abs() < 0.02);
        let v2 = visibility_model(sigma, 2);
        assert!(
            (fit.visibility - v2).abs() < 3.0 * fit.visibility_err + 0.02,
            "{} vs {v2}",
            fit.visibility
        );
    }

    #[test]
    fn mismatched_lo_warns() {
        let (r, spec) = afc();
        let mut lo = matched_lo(&r, 1, r.input).unwrap();
        lo.mean_photons *= 1.5;
        let s = ScanSettings {
            order: 1,
            n_trials: 1000,
            cycles: 10,
            seed: 0,
        };
        let out = interference_scan(
            &r,
            &lo,
            &[0.0; 6],
            &spec,
            &PhaseNoiseModel { sigma: 0.0 },
            &DetectorModel::default(),
            s,
        )
        .unwrap();
        assert!(out.warning.is_some());
    }
}
