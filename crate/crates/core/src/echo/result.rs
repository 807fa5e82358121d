use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::closed_form::wrap_phase;
use super::pulse::Pulse;
use crate::error::Result;
use crate::spectral::trapezoid;

/// One detected echo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Echo {
    /// Rank in time among the detected echoes, starting at 1.
    #[serde(rename = "m")]
    pub order: u32,
    #[serde(rename = "t_peak_s")]
    pub peak_time: f64,
    /// Emitted photons over the echo window divided by n̄.
    pub efficiency: f64,
    #[serde(rename = "fwhm_s")]
    pub fwhm: f64,
    /// Phase relative to the input peak, with the π of forward re-emission
    /// removed.
    #[serde(rename = "phase_rad")]
    pub phase: f64,
}

/// Output of a storage simulation.
#[derive(Debug, Clone)]
pub struct EchoResult {
    pub times: Vec<f64>,
    /// Output field, √(photons/s).
    pub field: Vec<Complex64>,
    /// Input field on the same grid.
    pub input_field: Vec<Complex64>,
    /// Output photon flux, photons/s.
    pub intensity: Vec<f64>,
    /// Phase of the output field, rad.
    pub phase: Vec<f64>,
    pub input: Pulse,
    pub echoes: Vec<Echo>,
    /// Fraction of n̄ leaving inside the window of the transmitted pulse.
    pub transmitted: f64,
    /// Fraction of n̄ leaving at any time on the grid.
    pub total_output: f64,
}

/// A local maximum with the window its energy is integrated over.
#[derive(Debug, Clone, Copy)]
struct Peak {
    index: usize,
    fwhm: f64,
    lo: usize,
    hi: usize,
}

impl EchoResult {
    pub(crate) fn analyse(
        times: Vec<f64>,
        field: Vec<Complex64>,
        input_field: Vec<Complex64>,
        input: Pulse,
    ) -> Self {
        let intensity: Vec<f64> = field.iter().map(|e| e.norm_sqr()).collect();
        let phase: Vec<f64> = field.iter().map(|e| e.arg()).collect();
        let dt = times[1] - times[0];
        let norm = if input.mean_photons > 0.0 {
            input.mean_photons
        } else {
            1.0
        };
        let total_output = trapezoid(&intensity, dt) / norm;

        let peaks = find_peaks(&intensity, dt, input.fwhm);
        let mut transmitted = 0.0;
        let mut echoes = Vec::new();
        let reference = input.field(input.center_time);
        for p in peaks {
            let t = times[p.index];
            let energy = trapezoid(&intensity[p.lo..=p.hi], dt) / norm;
            if (t - input.center_time).abs() <= 1.5 * input.fwhm {
                transmitted += energy;
                continue;
            }
            if t < input.center_time {
                continue;
            }
            let rel = if reference.norm() > 0.0 {
                -field[p.index] * reference.conj()
            } else {
                -field[p.index]
            };
            echoes.push(Echo {
                order: echoes.len() as u32 + 1,
                peak_time: t,
                efficiency: energy,
                fwhm: p.fwhm,
                phase: wrap_phase(rel.arg()),
            });
        }
        Self {
            times,
            field,
            input_field,
            intensity,
            phase,
            input,
            echoes,
            transmitted,
            total_output,
        }
    }

    pub fn step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Echo of the given rank, if detected.
    pub fn echo(&self, order: u32) -> Option<&Echo> {
        self.echoes.iter().find(|e| e.order == order)
    }

    /// Echo whose peak is closest to `t`, within `tolerance`.
    pub fn echo_near(&self, t: f64, tolerance: f64) -> Option<&Echo> {
        self.echoes
            .iter()
            .filter(|e| (e.peak_time - t).abs() <= tolerance)
            .min_by(|a, b| (a.peak_time - t).abs().total_cmp(&(b.peak_time - t).abs()))
    }

    /// Output photons in `[t0, t1]` divided by n̄.
    pub fn window_efficiency(&self, t0: f64, t1: f64) -> f64 {
        let dt = self.step();
        let lo = ((t0 / dt).ceil().max(0.0) as usize).min(self.times.len() - 1);
        let hi = ((t1 / dt).floor().max(0.0) as usize).min(self.times.len() - 1);
        if hi <= lo {
            return 0.0;
        }
        let norm = if self.input.mean_photons > 0.0 {
            self.input.mean_photons
        } else {
            1.0
        };
        trapezoid(&self.intensity[lo..=hi], dt) / norm
    }

    pub fn echo_efficiency_total(&self) -> f64 {
        self.echoes.iter().map(|e| e.efficiency).sum()
    }

    /// `1 - transmitted - Σ echoes`: what stays in the sample or leaves
    /// outside the detected windows.
    pub fn absorbed_remainder(&self) -> f64 {
        1.0 - self.transmitted - self.echo_efficiency_total()
    }

    /// Rows `time_s,intensity,phase_rad`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::with_capacity(self.times.len() * 72);
        writeln!(buf, "time_s,intensity,phase_rad").ok();
        for i in 0..self.times.len() {
            writeln!(
                buf,
                "{:.16e},{:.16e},{:.16e}",
                self.times[i], self.intensity[i], self.phase[i]
            )
            .ok();
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    /// JSON list `[{m, t_peak_s, efficiency, fwhm_s, phase_rad}]`.
    pub fn echoes_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.echoes)?)
    }
}

fn find_peaks(intensity: &[f64], dt: f64, input_fwhm: f64) -> Vec<Peak> {
    let n = intensity.len();
    let max = intensity.iter().copied().fold(0.0, f64::max);
    if n < 3 || max <= 0.0 {
        return Vec::new();
    }
    let reach = ((2.0 * input_fwhm / dt).ceil() as usize).max(2);
    let mut peaks: Vec<Peak> = Vec::new();
    for i in 1..n - 1 {
        let v = intensity[i];
        if !(v >= intensity[i - 1] && v > intensity[i + 1]) || v < 1e-8 * max {
            continue;
        }
        let left = intensity[i.saturating_sub(reach)..=i]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let right = intensity[i..=(i + reach).min(n - 1)]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if v <= 3.0 * left.max(right) {
            continue;
        }
        let fwhm = half_max_width(intensity, i, dt);
        peaks.push(Peak {
            index: i,
            fwhm,
            lo: 0,
            hi: 0,
        });
    }
    for k in 0..peaks.len() {
        let p = peaks[k];
        let half = ((2.0 * p.fwhm / dt).ceil() as usize).max(1);
        let mut lo = p.index.saturating_sub(half);
        let mut hi = (p.index + half).min(n - 1);
        if k > 0 {
            lo = lo.max((peaks[k - 1].index + p.index) / 2 + 1);
        }
        if k + 1 < peaks.len() {
            hi = hi.min((p.index + peaks[k + 1].index) / 2);
        }
        peaks[k].lo = lo;
        peaks[k].hi = hi;
    }
    peaks
}

/// Full width at half maximum around sample `i`, linearly interpolated.
fn half_max_width(intensity: &[f64], i: usize, dt: f64) -> f64 {
    let half = 0.5 * intensity[i];
    let mut l = i;
    while l > 0 && intensity[l - 1] > half {
        l -= 1;
    }
    let left = if l == 0 {
        0.0
    } else {
        let (a, b) = (intensity[l - 1], intensity[l]);
        (l - 1) as f64 + (half - a) / (b - a)
    };
    let mut r = i;
    while r + 1 < intensity.len() && intensity[r + 1] > half {
        r += 1;
    }
    let right = if r + 1 == intensity.len() {
        r as f64
    } else {
        let (a, b) = (intensity[r], intensity[r + 1]);
        r as f64 + (a - half) / (a - b)
    };
    (right - left) * dt
}

/// Phase difference between two echoes, wrapped to `(-π, π]`.
pub fn phase_difference(a: &Echo, b: &Echo) -> f64 {
    wrap_phase(b.phase - a.phase)
}
