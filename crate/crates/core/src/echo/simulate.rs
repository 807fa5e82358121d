use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pulse::Pulse;
use super::result::EchoResult;
use super::schedule::FieldSchedule;
use crate::error::{invalid, Error, Result};
use crate::spectral::SpectralProfile;

/// Longest time grid accepted by [`simulate_storage`].
pub const MAX_TIME_POINTS: usize = 4096;

/// Uniform output time grid starting at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub step: f64,
    pub duration: f64,
}

impl TimeGrid {
    pub fn new(step: f64, duration: f64) -> Self {
        Self { step, duration }
    }

    pub fn points(&self) -> usize {
        (self.duration / self.step).round() as usize + 1
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.points()).map(|n| n as f64 * self.step).collect()
    }
}

/// Tunables of the propagation solver.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StorageOptions {
    /// RK4 steps through the sample; chosen from the operator norm when
    /// `None`.
    pub depth_steps: Option<usize>,
}

/// Largest time step that resolves both the pulse and the absorbing window.
pub fn max_time_step(profile: &SpectralProfile, input: &Pulse, schedule: &FieldSchedule) -> f64 {
    let reach = profile.window_width() + 6.0 * schedule.max_sigma();
    (input.fwhm / 10.0).min(1.0 / (10.0 * reach))
}

fn check_inputs(
    profile: &SpectralProfile,
    input: &Pulse,
    schedule: &FieldSchedule,
    grid: &TimeGrid,
) -> Result<()> {
    input.validate()?;
    schedule.validate()?;
    if !(grid.step > 0.0) || !(grid.duration > grid.step) {
        return Err(invalid(
            "time_grid",
            "step must be positive and shorter than the duration",
        ));
    }
    if let Some(w) = profile.feature_width() {
        if profile.step() > w / 4.0 {
            return Err(Error::UnresolvedComb {
                step: profile.step(),
                limit: w / 4.0,
            });
        }
    }
    let margin = 3.0 * schedule.max_sigma();
    let spread = 3.0 * input.spectral_sigma();
    let (lo, hi) = (input.carrier_offset - spread, input.carrier_offset + spread);
    if lo < profile.start() - margin || hi > profile.end() + margin {
        return Err(Error::SpectrumClipped(format!(
            "pulse spectrum [{lo:e}, {hi:e}] Hz exceeds window [{:e}, {:e}] Hz",
            profile.start() - margin,
            profile.end() + margin
        )));
    }
    let bound = max_time_step(profile, input, schedule);
    if grid.step > bound * (1.0 + 1e-9) {
        return Err(Error::TimeResolution(format!(
            "time step {:e} s exceeds {bound:e} s (pulse FWHM/10 and 1/(10·window))",
            grid.step
        )));
    }
    if grid.points() > MAX_TIME_POINTS {
        return Err(Error::TimeResolution(format!(
            "{} time points exceed the limit of {MAX_TIME_POINTS}; shorten the duration or coarsen the step",
            grid.points()
        )));
    }
    if input.center_time < 2.0 * input.fwhm || input.center_time + 2.0 * input.fwhm > grid.duration
    {
        return Err(Error::TimeResolution(
            "input pulse must lie inside the time grid".into(),
        ));
    }
    Ok(())
}

/// Free-induction kernel of the feature, `K(τ) = ∫ D(δ) e^{i2πδτ} dδ`,
/// sampled at `τ = k·dt`.
pub(crate) fn static_kernel(profile: &SpectralProfile, dt: f64, points: usize) -> Vec<Complex64> {
    let n = profile.len();
    let weights: Vec<(f64, f64)> = profile
        .depth()
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > 0.0)
        .map(|(i, d)| {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            (profile.detuning(i), w * d * profile.step())
        })
        .collect();
    (0..points)
        .into_par_iter()
        .map(|k| {
            let tau = k as f64 * dt;
            let mut acc = Complex64::new(0.0, 0.0);
            for &(delta, w) in &weights {
                let (s, c) = (2.0 * PI * delta * tau).sin_cos();
                acc += Complex64::new(w * c, w * s);
            }
            acc
        })
        .collect()
}

/// Discretized memory operator `(M E)(t_n) = ∫₀^{t_n} K(t_n, t') E(t') dt'`
/// with trapezoid weights.
enum Operator {
    /// No field: `K` depends on `t_n - t'` only, stored with the `dt` factor.
    Toeplitz(Vec<Complex64>),
    /// Packed lower triangle, row `n` at offset `n(n+1)/2`.
    Dense(Vec<Complex64>),
}

impl Operator {
    fn build(kernel: &[Complex64], schedule: &FieldSchedule, grid: &TimeGrid) -> Self {
        let dt = grid.step;
        if schedule.is_off() {
            return Operator::Toeplitz(kernel.iter().map(|k| k * dt).collect());
        }
        let n = kernel.len();
        let s: Vec<f64> = (0..n).map(|i| schedule.cumulative(i as f64 * dt)).collect();
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|row| {
                (0..=row)
                    .map(|m| {
                        let ds = s[row] - s[m];
                        kernel[row - m] * (dt * (-2.0 * PI * PI * ds * ds).exp())
                    })
                    .collect()
            })
            .collect();
        Operator::Dense(rows.concat())
    }

    fn row_value(&self, row: usize, m: usize) -> Complex64 {
        match self {
            Operator::Toeplitz(k) => k[row - m],
            Operator::Dense(p) => p[row * (row + 1) / 2 + m],
        }
    }

    fn apply_row(&self, row: usize, x: &[Complex64]) -> Complex64 {
        if row == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = 0.5 * (self.row_value(row, 0) * x[0] + self.row_value(row, row) * x[row]);
        match self {
            Operator::Toeplitz(k) => {
                for m in 1..row {
                    acc += k[row - m] * x[m];
                }
            }
            Operator::Dense(p) => {
                let base = row * (row + 1) / 2;
                for m in 1..row {
                    acc += p[base + m] * x[m];
                }
            }
        }
        acc
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..x.len())
            .into_par_iter()
            .map(|row| self.apply_row(row, x))
            .collect()
    }

    /// Largest absolute row sum, an upper bound on the absorption rate per
    /// unit depth.
    fn norm(&self, n: usize) -> f64 {
        (0..n)
            .into_par_iter()
            .map(|row| {
                (0..=row)
                    .map(|m| self.row_value(row, m).norm())
                    .sum::<f64>()
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Propagates a weak pulse through the sample and returns the output field.
pub fn simulate_storage(
    profile: &SpectralProfile,
    input: &Pulse,
    schedule: &FieldSchedule,
    grid: TimeGrid,
) -> Result<EchoResult> {
    simulate_storage_with(profile, input, schedule, grid, StorageOptions::default())
}

/// Linear response of the sample to a weak input pulse.
///
/// The field obeys `∂E/∂ζ = -∫₀ᵗ K(t, t') E(t') dt'` across the sample
/// (`ζ ∈ [0, 1]`), where the feature kernel is the free-induction decay of
/// the tailored profile times the Stark dephasing `exp(-2π²(S(t) - S(t'))²)`
/// of the Gaussian-distributed shifts. The flat background only attenuates,
/// by `e^{-d₀/2}` in amplitude. Re-absorption of echoes is included.
pub fn simulate_storage_with(
    profile: &SpectralProfile,
    input: &Pulse,
    schedule: &FieldSchedule,
    grid: TimeGrid,
    options: StorageOptions,
) -> Result<EchoResult> {
    check_inputs(profile, input, schedule, &grid)?;
    let times = grid.times();
    let n = times.len();
    let kernel = static_kernel(profile, grid.step, n);
    let op = Operator::build(&kernel, schedule, &grid);
    let steps = options
        .depth_steps
        .unwrap_or_else(|| (4.0 * op.norm(n)).ceil().clamp(32.0, 4000.0) as usize);
    let h = 1.0 / steps as f64;

    let mut e: Vec<Complex64> = times.iter().map(|t| input.field(*t)).collect();
    let input_field = e.clone();
    let shifted = |base: &[Complex64], k: &[Complex64], f: f64| -> Vec<Complex64> {
        base.iter().zip(k).map(|(b, k)| b + k * f).collect()
    };
    for _ in 0..steps {
        let k1 = op.apply(&e);
        let k2 = op.apply(&shifted(&e, &k1, -0.5 * h));
        let k3 = op.apply(&shifted(&e, &k2, -0.5 * h));
        let k4 = op.apply(&shifted(&e, &k3, -h));
        for i in 0..n {
            e[i] -= h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    let background = (-0.5 * profile.background()).exp();
    for v in &mut e {
        *v *= background;
    }
    Ok(EchoResult::analyse(times, e, input_field, *input))
}
