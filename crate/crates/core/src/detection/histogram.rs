use std::fmt::Write as _;
use std::io::Write;
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::model::DetectorModel;
use crate::echo::EchoResult;
use crate::error::{invalid, Error, Result};

/// Photon flux leaving the sample during one trial, sampled on a uniform
/// grid and linearly interpolated in between.
#[derive(Debug, Clone, Copy)]
pub struct Signal<'a> {
    pub times: &'a [f64],
    /// Photons/s.
    pub flux: &'a [f64],
}

impl<'a> Signal<'a> {
    pub fn from_echo(result: &'a EchoResult) -> Self {
        Self {
            times: &result.times,
            flux: &result.intensity,
        }
    }

    /// Photons in `[a, b]`; zero outside the sampled span.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if self.times.len() < 2 || b <= a {
            return 0.0;
        }
        let t0 = self.times[0];
        let dt = self.times[1] - t0;
        let n = self.times.len();
        let a = a.max(t0);
        let b = b.min(self.times[n - 1]);
        if b <= a {
            return 0.0;
        }
        let value = |t: f64| {
            let x = ((t - t0) / dt).clamp(0.0, (n - 1) as f64);
            let i = (x.floor() as usize).min(n - 2);
            let f = x - i as f64;
            self.flux[i] * (1.0 - f) + self.flux[i + 1] * f
        };
        let first = ((a - t0) / dt).floor() as usize + 1;
        let last = ((b - t0) / dt).ceil() as usize - 1;
        if first > last {
            return 0.5 * (value(a) + value(b)) * (b - a);
        }
        let mut acc = 0.5 * (value(a) + self.flux[first]) * (self.times[first] - a);
        for i in first..last {
            acc += 0.5 * (self.flux[i] + self.flux[i + 1]) * dt;
        }
        acc + 0.5 * (self.flux[last] + value(b)) * (b - self.times[last])
    }
}

/// Photon counts accumulated over many trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Poisson means the counts were drawn from.
    pub expected: Vec<f64>,
    /// Dark-count share of `expected`.
    pub expected_dark: Vec<f64>,
    pub n_trials: u64,
    pub seed: u64,
}

impl CountHistogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Index range of the bins whose centers fall in `[t0, t1)`.
    pub fn bin_range(&self, t0: f64, t1: f64) -> Range<usize> {
        let centers: Vec<f64> = self
            .bin_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect();
        let lo = centers
            .iter()
            .position(|c| *c >= t0)
            .unwrap_or(centers.len());
        let hi = centers
            .iter()
            .position(|c| *c >= t1)
            .unwrap_or(centers.len());
        lo..hi.max(lo)
    }

    pub fn sum(&self, bins: Range<usize>) -> u64 {
        self.counts[bins].iter().sum()
    }

    /// Counts with the known dark expectation removed.
    pub fn subtract_darks(&self) -> Vec<f64> {
        self.counts
            .iter()
            .zip(&self.expected_dark)
            .map(|(c, d)| *c as f64 - d)
            .collect()
    }

    /// Rows `bin_start_s,bin_end_s,counts`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::with_capacity(self.bins() * 56);
        writeln!(buf, "bin_start_s,bin_end_s,counts").ok();
        for (i, c) in self.counts.iter().enumerate() {
            writeln!(
                buf,
                "{:.16e},{:.16e},{}",
                self.bin_edges[i],
                self.bin_edges[i + 1],
                c
            )
            .ok();
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }
}

/// Poisson draw that accepts a zero mean.
pub(crate) fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean > 0.0 {
        Poisson::new(mean)
            .map(|p| p.sample(rng) as u64)
            .unwrap_or(0)
    } else {
        0
    }
}

/// Integrates `f` over `[a, b]` with composite Simpson on 16 panels.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let n = 16;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        acc += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Counts per bin over `span` accumulated over `n_trials` trials.
///
/// The mean per bin is `n_trials·[G_s·∫signal + G_f·∫fluor + dark·width]`
/// with the detector's signal and fluorescence gains; each bin is then drawn
/// from a Poisson distribution. Bin `i` uses stream `i` of a ChaCha8
/// generator seeded with `seed`.
pub fn simulate_counts(
    signal: Signal<'_>,
    fluor: &dyn Fn(f64) -> f64,
    det: &DetectorModel,
    n_trials: u64,
    span: (f64, f64),
    bin_width: f64,
    seed: u64,
) -> Result<CountHistogram> {
    det.validate()?;
    if !(bin_width > 0.0) {
        return Err(invalid("bin_width", "must be positive"));
    }
    if n_trials == 0 {
        return Err(invalid("n_trials", "must be >= 1"));
    }
    let (t0, t1) = span;
    if !(t1 > t0) {
        return Err(invalid("span", "end must be after start"));
    }
    let bins = ((t1 - t0) / bin_width).round().max(1.0) as usize;
    let edges: Vec<f64> = (0..=bins).map(|i| t0 + i as f64 * bin_width).collect();
    let trials = n_trials as f64;
    let mut expected = Vec::with_capacity(bins);
    let mut expected_dark = Vec::with_capacity(bins);
    let mut counts = Vec::with_capacity(bins);
    for i in 0..bins {
        let (a, b) = (edges[i], edges[i + 1]);
        let dark = trials * det.dark_rate * (b - a);
        let light = det.signal_gain() * signal.integral(a, b)
            + det.fluorescence_gain() * simpson(fluor, a, b);
        let mean = trials * light + dark;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        counts.push(poisson(&mut rng, mean));
        expected.push(mean);
        expected_dark.push(dark);
    }
    Ok(CountHistogram {
        bin_edges: edges,
        counts,
        expected,
        expected_dark,
        n_trials,
        seed,
    })
}

/// `(N_A - N_B)/N_B` for two disjoint windows of equal length.
pub fn snr(hist: &CountHistogram, window_a: Range<usize>, window_b: Range<usize>) -> Result<f64> {
    if window_a.len() != window_b.len() || window_a.is_empty() {
        return Err(invalid(
            "windows",
            "signal and noise windows must be non-empty and of equal length",
        ));
    }
    if window_a.start < window_b.end && window_b.start < window_a.end {
        return Err(invalid("windows", "signal and noise windows overlap"));
    }
    if window_a.end > hist.bins() || window_b.end > hist.bins() {
        return Err(invalid("windows", "window exceeds histogram"));
    }
    snr_from_counts(hist.sum(window_a) as f64, hist.sum(window_b) as f64)
}

pub fn snr_from_counts(n_a: f64, n_b: f64) -> Result<f64> {
    if n_b <= 0.0 {
        return Err(Error::Undefined("no counts in the noise window".into()));
    }
    Ok((n_a - n_b) / n_b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dark_only(n_trials: u64, seed: u64) -> CountHistogram {
        let det = DetectorModel::default();
        let sig = Signal {
            times: &[],
            flux: &[],
        };
        simulate_counts(sig, &|_| 0.0, &det, n_trials, (0.0, 20e-6), 100e-9, seed).unwrap()
    }

    #[test]
    fn dark_counts_match_expectation() {
        let trials = 8000 * 3600;
        let h = dark_only(trials, 1);
        let mean_expected = 10.0 * 100e-9 * trials as f64;
        assert!(h
            .expected
            .iter()
            .all(|e| (e - mean_expected).abs() < 1e-9 * mean_expected));
        let mean = h.counts.iter().sum::<u64>() as f64 / h.bins() as f64;
        let sigma = (mean_expected / h.bins() as f64).sqrt();
        assert!(
            (mean - mean_expected).abs() < 3.0 * sigma,
            "{mean} vs {mean_expected}"
        );
    }

    #[test]
    fn doubling_trials_doubles_expectation() {
        let a = dark_only(1000, 3);
        let b = dark_only(2000, 3);
        for (x, y) in a.expected.iter().zip(&b.expected) {
            assert!((2.0 * x - y).abs() < 1e-12 * y);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        assert_eq!(dark_only(100_000, 9), dark_only(100_000, 9));
        assert_ne!(dark_only(100_000, 9).counts, dark_only(100_000, 10).counts);
    }

    #[test]
    fn signal_integral_is_exact_for_linear_flux() {
        let times: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let flux: Vec<f64> = times.iter().map(|t| 2.0 * t).collect();
        let s = Signal {
            times: &times,
            flux: &flux,
        };
        assert!((s.integral(1.3, 7.6) - (7.6f64.powi(2) - 1.3f64.powi(2))).abs() < 1e-12);
        assert!((s.integral(2.2, 2.7) - (2.7f64.powi(2) - 2.2f64.powi(2))).abs() < 1e-12);
        assert_eq!(s.integral(20.0, 30.0), 0.0);
    }

    #[test]
    fn snr_arithmetic() {
        assert_eq!(snr_from_counts(200.0, 100.0).unwrap(), 1.0);
        assert_eq!(snr_from_counts(100.0, 100.0).unwrap(), 0.0);
        assert!(matches!(
            snr_from_counts(5.0, 0.0),
            Err(Error::Undefined(_))
        ));
        let h = dark_only(1000, 1);
        assert!(snr(&h, 0..10, 5..15).is_err());
        assert!(snr(&h, 0..10, 20..25).is_err());
    }

    #[test]
    fn dark_subtraction_leaves_fluorescence() {
        let det = DetectorModel {
            fluorescence_collection: 1e-3,
            ..DetectorModel::default()
        };
        let sig = Signal {
            times: &[],
            flux: &[],
        };
        let rate = 2e5;
        let trials = 1_000_000;
        let h = simulate_counts(sig, &|_| rate, &det, trials, (0.0, 10e-6), 1e-6, 4).unwrap();
        let residual: f64 = h.subtract_darks().iter().sum();
        let predicted = trials as f64 * det.fluorescence_gain() * rate * 10e-6;
        let sigma = h.expected.iter().sum::<f64>().sqrt();
        assert!((residual - predicted).abs() < 3.0 * sigma);
    }
}
