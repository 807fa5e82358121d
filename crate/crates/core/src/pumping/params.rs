use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Relaxation constants of the pumped transition.
///
/// Lifetimes may be `f64::INFINITY` to switch a decay channel off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Excited-state lifetime T₁, s.
    pub t1: f64,
    /// Ground Zeeman lifetime T_Z, s.
    pub tz: f64,
    /// Lifetime of the persistent reservoir, s.
    pub t_persistent: f64,
    /// Probability that an excited-state decay lands in the other ground level.
    pub branch_beta: f64,
    /// Share of those decays parked in the persistent reservoir.
    pub persistent_fraction: f64,
}

impl MaterialParams {
    /// Er:YSO constants (T₁ = 11 ms, T_Z = 130 ms, 15 min persistent holes,
    /// β = 0.1). The persistent share has no measured value and must be given.
    pub fn erbium(persistent_fraction: f64) -> Self {
        Self {
            t1: 11e-3,
            tz: 130e-3,
            t_persistent: 900.0,
            branch_beta: 0.1,
            persistent_fraction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t1", self.t1),
            ("tz", self.tz),
            ("t_persistent", self.t_persistent),
        ] {
            if !(v > 0.0) {
                return Err(invalid(name, format!("lifetime must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.branch_beta) {
            return Err(invalid("branch_beta", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.persistent_fraction) {
            return Err(invalid("persistent_fraction", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// A frequency interval `[lo, hi]` in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn centered(center: f64, width: f64) -> Self {
        Self {
            lo: center - 0.5 * width,
            hi: center + 0.5 * width,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Pump sweep and stimulation timing for one preparation cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpSchedule {
    /// Pumping time, s.
    pub duration: f64,
    /// Full sweep range, centred on zero detuning, Hz.
    pub sweep_span: f64,
    /// Sawtooth sweep speed, Hz/s.
    pub sweep_rate: f64,
    /// Frequency intervals where the pump is gated off.
    pub gate_windows: Vec<Interval>,
    /// Pumping rate while resonant, 1/s.
    pub pump_rate: f64,
    /// Factor by which stimulated emission shortens T₁ while the
    /// stimulation laser is on.
    pub stimulation_gain: f64,
    /// Stimulation-only tail after the pump is off, s.
    pub t_extra: f64,
    /// Delay between the end of preparation and the storage trials, s.
    pub t_wait: f64,
    /// Width of the power-broadened pump resonance, Hz. `None` uses twice the
    /// grid step.
    pub resonance_width: Option<f64>,
}

impl PumpSchedule {
    /// A single unpumped window around `center` (the CRIB line).
    pub fn single_gate(center: f64, width: f64) -> Vec<Interval> {
        vec![Interval::centered(center, width)]
    }

    /// Periodic gate windows that leave a comb of `n_peaks` teeth.
    pub fn comb_gates(center: f64, spacing: f64, width: f64, n_peaks: usize) -> Vec<Interval> {
        let half = (n_peaks as f64 - 1.0) / 2.0;
        (0..n_peaks)
            .map(|n| Interval::centered(center + (n as f64 - half) * spacing, width))
            .collect()
    }

    pub fn sweep_period(&self) -> f64 {
        self.sweep_span / self.sweep_rate
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration >= 0.0) {
            return Err(invalid("duration", "must be >= 0"));
        }
        if !(self.sweep_span > 0.0) || !(self.sweep_rate > 0.0) {
            return Err(invalid(
                "sweep_span",
                "sweep span and rate must be positive",
            ));
        }
        if !(self.pump_rate >= 0.0) {
            return Err(invalid("pump_rate", "must be >= 0"));
        }
        if !(self.stimulation_gain >= 1.0) {
            return Err(invalid("stimulation_gain", "must be >= 1"));
        }
        if !(self.t_extra >= 0.0) || !(self.t_wait >= 0.0) {
            return Err(invalid("t_extra", "t_extra and t_wait must be >= 0"));
        }
        let half = 0.5 * self.sweep_span;
        for g in &self.gate_windows {
            if !(g.hi > g.lo) || g.lo < -half - 1e-9 * half || g.hi > half + 1e-9 * half {
                return Err(invalid(
                    "gate_windows",
                    format!(
                        "gate [{:e}, {:e}] Hz must be non-empty and inside the sweep span",
                        g.lo, g.hi
                    ),
                ));
            }
        }
        if let Some(w) = self.resonance_width {
            if !(w > 0.0) {
                return Err(invalid("resonance_width", "must be positive"));
            }
        }
        Ok(())
    }
}
