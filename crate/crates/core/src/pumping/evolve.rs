use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;

use super::params::{MaterialParams, PumpSchedule};
use super::population::{PopulationField, Populations};
use crate::error::{Error, Result};

/// Rate matrix `A` of `dx/dt = A x` for `x = [g1, g2, e, p]`.
///
/// Columns sum to zero, so total population is conserved.
pub(crate) fn rate_matrix(mat: &MaterialParams, pump_rate: f64, gain: f64) -> Matrix4<f64> {
    let gamma = gain / mat.t1;
    let back = (1.0 - mat.branch_beta) * gamma;
    let to_g2 = mat.branch_beta * (1.0 - mat.persistent_fraction) * gamma;
    let to_p = mat.branch_beta * mat.persistent_fraction * gamma;
    let rz = 1.0 / mat.tz;
    let rp = 1.0 / mat.t_persistent;
    #[rustfmt::skip]
    let a = Matrix4::new(
        -pump_rate, rz,  back,   rp,
        0.0,       -rz,  to_g2,  0.0,
        pump_rate,  0.0, -gamma, 0.0,
        0.0,        0.0, to_p,   -rp,
    );
    a
}

fn propagator(a: &Matrix4<f64>, t: f64) -> Matrix4<f64> {
    if t <= 0.0 {
        Matrix4::identity()
    } else {
        (a * t).exp()
    }
}

fn power(m: &Matrix4<f64>, mut k: u64) -> Matrix4<f64> {
    let mut base = *m;
    let mut acc = Matrix4::identity();
    while k > 0 {
        if k & 1 == 1 {
            acc = base * acc;
        }
        base = base * base;
        k >>= 1;
    }
    acc
}

/// Largest admissible integration step, `min(T₁/gain, 1/pumpRate) / 10`.
pub fn step_bound(schedule: &PumpSchedule, mat: &MaterialParams) -> f64 {
    let t1_eff = mat.t1 / schedule.stimulation_gain;
    let pump = if schedule.pump_rate > 0.0 {
        1.0 / schedule.pump_rate
    } else {
        f64::INFINITY
    };
    t1_eff.min(pump) / 10.0
}

/// Times within one sweep period at which the pump is resonant with the class
/// at `detuning` and not gated.
pub(crate) fn on_intervals(schedule: &PumpSchedule, detuning: f64, width: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * schedule.sweep_span;
    let lo = (detuning - 0.5 * width).max(-half);
    let hi = (detuning + 0.5 * width).min(half);
    if hi <= lo {
        return Vec::new();
    }
    let mut pieces = vec![(lo, hi)];
    for gate in &schedule.gate_windows {
        let mut next = Vec::with_capacity(pieces.len() + 1);
        for (a, b) in pieces {
            if gate.hi <= a || gate.lo >= b {
                next.push((a, b));
                continue;
            }
            if gate.lo > a {
                next.push((a, gate.lo));
            }
            if gate.hi < b {
                next.push((gate.hi, b));
            }
        }
        pieces = next;
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    pieces
        .into_iter()
        .map(|(a, b)| {
            (
                (a + half) / schedule.sweep_rate,
                (b + half) / schedule.sweep_rate,
            )
        })
        .collect()
}

/// Propagator over `[t0, t1]` inside one sweep period.
fn within_period(
    on: &[(f64, f64)],
    off_a: &Matrix4<f64>,
    on_a: &Matrix4<f64>,
    t0: f64,
    t1: f64,
) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    let mut t = t0;
    for &(a, b) in on {
        let a = a.clamp(t0, t1);
        let b = b.clamp(t0, t1);
        if b <= a {
            continue;
        }
        m = propagator(on_a, b - a) * propagator(off_a, a - t) * m;
        t = b;
    }
    propagator(off_a, t1 - t) * m
}

/// Output sampling of [`evolve_preparation_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvolveOptions {
    /// Snapshots taken at evenly spaced sweep-period boundaries while the pump
    /// runs, in addition to the phase boundaries.
    pub pumping_snapshots: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            pumping_snapshots: 8,
        }
    }
}

/// Which part of the preparation cycle a snapshot closes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Start,
    Pumping,
    EndOfPumping,
    EndOfPreparation,
    EndOfWait,
}

/// Population snapshots over one preparation cycle.
#[derive(Debug, Clone)]
pub struct PreparationTrace {
    pub times: Vec<f64>,
    pub phases: Vec<Phase>,
    pub fields: Vec<PopulationField>,
}

impl PreparationTrace {
    fn find(&self, phase: Phase) -> &PopulationField {
        let i = self
            .phases
            .iter()
            .rposition(|p| *p == phase)
            .expect("phase recorded");
        &self.fields[i]
    }

    /// State after the stimulation tail, when the laser is switched off.
    pub fn end_of_preparation(&self) -> &PopulationField {
        self.find(Phase::EndOfPreparation)
    }

    /// State at the first storage trial, after `t_wait`.
    pub fn at_measurement(&self) -> &PopulationField {
        self.find(Phase::EndOfWait)
    }

    pub fn end_of_pumping(&self) -> &PopulationField {
        self.find(Phase::EndOfPumping)
    }
}

/// Runs pumping, the stimulation tail and the wait with default sampling.
pub fn evolve_preparation(
    initial: &PopulationField,
    schedule: &PumpSchedule,
    mat: &MaterialParams,
    dt: f64,
) -> Result<PreparationTrace> {
    evolve_preparation_with(initial, schedule, mat, dt, EvolveOptions::default())
}

/// Integrates the per-class rate equations over a preparation cycle.
///
/// The rate matrix is piecewise constant in time (pump resonant or not,
/// stimulation on or off), so every piece is propagated with its exact matrix
/// exponential and whole sweep periods are advanced by powers of the period
/// propagator. `dt` is checked against [`step_bound`] but does not limit the
/// accuracy.
pub fn evolve_preparation_with(
    initial: &PopulationField,
    schedule: &PumpSchedule,
    mat: &MaterialParams,
    dt: f64,
    options: EvolveOptions,
) -> Result<PreparationTrace> {
    schedule.validate()?;
    mat.validate()?;
    let bound = step_bound(schedule, mat);
    if !(dt > 0.0) || dt > bound {
        return Err(Error::StepTooCoarse { dt, bound });
    }
    let width = schedule.resonance_width.unwrap_or(2.0 * initial.step);
    let period = schedule.sweep_period();
    let full_periods = (schedule.duration / period).floor() as u64;
    let remainder = schedule.duration - full_periods as f64 * period;

    // Period indices after which a snapshot is taken.
    let n_snap = (options.pumping_snapshots as u64).min(full_periods);
    let marks: Vec<u64> = (1..=n_snap)
        .map(|k| k * full_periods / n_snap.max(1))
        .collect();

    let gain = schedule.stimulation_gain;
    let off_stim = rate_matrix(mat, 0.0, gain);
    let on_stim = rate_matrix(mat, schedule.pump_rate, gain);
    let tail = propagator(&off_stim, schedule.t_extra);
    let wait = propagator(&rate_matrix(mat, 0.0, 1.0), schedule.t_wait);

    let trajectories: Vec<Vec<Populations>> = initial
        .classes
        .par_iter()
        .enumerate()
        .map(|(i, start)| {
            let on = on_intervals(schedule, initial.detuning(i), width);
            let mut x = Vector4::from(start.to_array());
            let mut out = Vec::with_capacity(marks.len() + 4);
            out.push(*start);
            let per = within_period(&on, &off_stim, &on_stim, 0.0, period);
            let mut done = 0;
            for &k in &marks {
                x = power(&per, k - done) * x;
                done = k;
                out.push(Populations::from_array(x.into()));
            }
            x = power(&per, full_periods - done) * x;
            x = within_period(&on, &off_stim, &on_stim, 0.0, remainder) * x;
            out.push(Populations::from_array(x.into()));
            x = tail * x;
            out.push(Populations::from_array(x.into()));
            x = wait * x;
            out.push(Populations::from_array(x.into()));
            out
        })
        .collect();

    let mut times = vec![0.0];
    let mut phases = vec![Phase::Start];
    for &k in &marks {
        times.push(k as f64 * period);
        phases.push(Phase::Pumping);
    }
    times.push(schedule.duration);
    phases.push(Phase::EndOfPumping);
    times.push(schedule.duration + schedule.t_extra);
    phases.push(Phase::EndOfPreparation);
    times.push(schedule.duration + schedule.t_extra + schedule.t_wait);
    phases.push(Phase::EndOfWait);

    let fields = (0..times.len())
        .map(|s| PopulationField {
            start: initial.start,
            step: initial.step,
            classes: trajectories.iter().map(|tr| tr[s]).collect(),
        })
        .collect();
    Ok(PreparationTrace {
        times,
        phases,
        fields,
    })
}

/// Free relaxation for `t` seconds with pump and stimulation off.
pub fn relax(field: &PopulationField, mat: &MaterialParams, t: f64) -> PopulationField {
    let m = propagator(&rate_matrix(mat, 0.0, 1.0), t);
    PopulationField {
        classes: field
            .classes
            .iter()
            .map(|c| Populations::from_array((m * Vector4::from(c.to_array())).into()))
            .collect(),
        ..field.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pumping::params::Interval;

    fn schedule(gain: f64) -> PumpSchedule {
        PumpSchedule {
            duration: 20e-3,
            sweep_span: 10e6,
            sweep_rate: 10e6 / 1e-3,
            gate_windows: vec![Interval::centered(0.0, 1e6)],
            pump_rate: 2e4,
            stimulation_gain: gain,
            t_extra: 5e-3,
            t_wait: 10e-3,
            resonance_width: Some(0.4e6),
        }
    }

    fn field() -> PopulationField {
        PopulationField {
            start: -6e6,
            step: 0.1e6,
            classes: vec![Populations::UNPUMPED; 121],
        }
    }

    /// Fine-step RK4 with the pump switched by the instantaneous sweep
    /// frequency, used as an independent reference.
    fn rk4_reference(
        sched: &PumpSchedule,
        mat: &MaterialParams,
        detuning: f64,
        steps_per_period: usize,
    ) -> [f64; 4] {
        let width = sched.resonance_width.unwrap();
        let period = sched.sweep_period();
        let h = period / steps_per_period as f64;
        let n = (sched.duration / h).round() as usize;
        let rhs = |t: f64, x: &Vector4<f64>| {
            let f = -0.5 * sched.sweep_span + sched.sweep_rate * (t % period);
            let gated = sched.gate_windows.iter().any(|g| f > g.lo && f < g.hi);
            let resonant = (f - detuning).abs() < 0.5 * width;
            let r = if resonant && !gated {
                sched.pump_rate
            } else {
                0.0
            };
            rate_matrix(mat, r, sched.stimulation_gain) * x
        };
        let mut x = Vector4::new(1.0, 0.0, 0.0, 0.0);
        for k in 0..n {
            let t = k as f64 * h;
            let k1 = rhs(t, &x);
            let k2 = rhs(t + 0.5 * h, &(x + 0.5 * h * k1));
            let k3 = rhs(t + 0.5 * h, &(x + 0.5 * h * k2));
            let k4 = rhs(t + h, &(x + h * k3));
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        x.into()
    }

    #[test]
    fn matches_fine_step_reference() {
        let mat = MaterialParams::erbium(0.2);
        let sched = schedule(1.0);
        let f = field();
        let trace = evolve_preparation(&f, &sched, &mat, 1e-6).unwrap();
        let end = trace.end_of_pumping();
        for i in [10, 30, 55, 60, 80, 115] {
            let exact = end.classes[i].to_array();
            let reference = rk4_reference(&sched, &mat, f.detuning(i), 20_000);
            for c in 0..4 {
                assert!(
                    (exact[c] - reference[c]).abs() < 2e-3,
                    "class {i} component {c}: {} vs {}",
                    exact[c],
                    reference[c]
                );
            }
        }
    }

    #[test]
    fn conserves_population() {
        let mat = MaterialParams::erbium(0.3);
        let trace = evolve_preparation(&field(), &schedule(5.0), &mat, 1e-6).unwrap();
        for f in &trace.fields {
            assert!(f.conservation_error() < 1e-9);
        }
    }

    #[test]
    fn closed_branching_never_leaves_g1_e() {
        let mut mat = MaterialParams::erbium(0.5);
        mat.branch_beta = 0.0;
        let trace = evolve_preparation(&field(), &schedule(1.0), &mat, 1e-6).unwrap();
        for f in &trace.fields {
            for c in &f.classes {
                assert!(c.g2.abs() < 1e-15 && c.p.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gated_and_distant_classes_stay_unpumped() {
        let mat = MaterialParams::erbium(0.0);
        let f = field();
        let trace = evolve_preparation(&f, &schedule(1.0), &mat, 1e-6).unwrap();
        let end = trace.end_of_pumping();
        assert_eq!(end.classes[60], Populations::UNPUMPED);
        assert_eq!(end.classes[0], Populations::UNPUMPED);
        assert!(end.classes[30].g1 < 0.9);
    }

    #[test]
    fn stimulation_deepens_pit() {
        let mat = MaterialParams::erbium(0.0);
        let weak = evolve_preparation(&field(), &schedule(1.0), &mat, 1e-6).unwrap();
        let strong = evolve_preparation(&field(), &schedule(10.0), &mat, 1e-6).unwrap();
        let i = 30;
        assert!(strong.at_measurement().classes[i].g1 < weak.at_measurement().classes[i].g1);
        assert!(
            strong.end_of_preparation().excited_total() < weak.end_of_preparation().excited_total()
        );
    }

    #[test]
    fn coarse_step_is_rejected_with_bound() {
        let mat = MaterialParams::erbium(0.0);
        match evolve_preparation(&field(), &schedule(10.0), &mat, 1e-3) {
            Err(Error::StepTooCoarse { bound, .. }) => assert!((bound - 5e-6).abs() < 1e-12),
            other => panic!("expected StepTooCoarse, got {other:?}"),
        }
    }

    #[test]
    fn relax_recovers_zeeman_population() {
        let mat = MaterialParams::erbium(0.0);
        let f = PopulationField {
            start: 0.0,
            step: 1.0,
            classes: vec![Populations {
                g1: 0.2,
                g2: 0.8,
                e: 0.0,
                p: 0.0,
            }],
        };
        let r = relax(&f, &mat, mat.tz);
        assert!((r.classes[0].g2 - 0.8 / std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn on_intervals_respect_gates() {
        let s = schedule(1.0);
        assert!(on_intervals(&s, 0.0, 0.4e6).is_empty());
        let split = on_intervals(&s, 0.5e6, 0.4e6);
        assert_eq!(split.len(), 1);
        let t = split[0];
        assert!(((t.1 - t.0) * s.sweep_rate - 0.2e6).abs() < 1e-3);
    }
}
