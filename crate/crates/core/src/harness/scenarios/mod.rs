//! The built-in experiments.

mod afc;
mod crib;
mod pumping;

pub(crate) use afc::{afc_echo, capacity_curves, combined_gate, fringe_scan};
pub(crate) use crib::{crib_echo, pulse_shape};
pub(crate) use pumping::{noise_decay, snr_vs_wait};

use super::config::ScenarioConfig;
use super::run::Run;
use crate::echo::{max_time_step, simulate_storage, EchoResult, FieldSchedule, Pulse, TimeGrid};
use crate::error::{Error, Result};
use crate::spectral::{make_comb, CombSpec, SpectralProfile, StarkCalibration};

/// Bound on emitted energy relative to the input.
const ENERGY_SLACK: f64 = 1e-6;

fn input_pulse(cfg: &ScenarioConfig) -> Pulse {
    Pulse::new(cfg.pulse.center, cfg.pulse.fwhm, cfg.pulse.mean_photons)
        .with_carrier(cfg.pulse.carrier)
}

fn calibration(cfg: &ScenarioConfig) -> Result<StarkCalibration> {
    StarkCalibration::new(
        cfg.stark.voltage_ref,
        cfg.stark.factor_ref,
        cfg.stark.line_fwhm_ref,
    )
}

fn comb_spec(cfg: &ScenarioConfig, offset: f64) -> CombSpec {
    let c = &cfg.comb;
    CombSpec::from_finesse(c.delta, c.finesse, c.depth, c.background, c.n_peaks)
        .with_offset(offset)
        .with_shape(c.shape)
}

fn comb_profile(cfg: &ScenarioConfig, spec: &CombSpec) -> Result<SpectralProfile> {
    let window = cfg
        .comb
        .window
        .unwrap_or_else(|| spec.min_window() + 2.0 * spec.center_offset.abs());
    make_comb(spec, window, cfg.comb.grid_points)
}

/// Time grid from the config, or the coarsest accepted step and `needed`
/// duration.
fn time_grid(
    cfg: &ScenarioConfig,
    profile: &SpectralProfile,
    pulse: &Pulse,
    schedule: &FieldSchedule,
    needed: f64,
) -> TimeGrid {
    let step = cfg
        .time
        .step
        .unwrap_or_else(|| max_time_step(profile, pulse, schedule));
    TimeGrid::new(step, cfg.time.duration.unwrap_or(needed))
}

/// Storage simulation guarded by the energy bookkeeping check.
fn simulate(
    profile: &SpectralProfile,
    pulse: &Pulse,
    schedule: &FieldSchedule,
    grid: TimeGrid,
) -> Result<EchoResult> {
    let r = simulate_storage(profile, pulse, schedule, grid)?;
    if r.total_output > 1.0 + ENERGY_SLACK {
        return Err(Error::OracleDivergence {
            check: "energy".into(),
            detail: format!("output carries {:.9} of the input photons", r.total_output),
        });
    }
    Ok(r)
}

fn write_echo(run: &mut Run, stem: &str, r: &EchoResult) -> Result<()> {
    run.sink
        .write_with(&format!("{stem}_trace.csv"), |b| r.write_csv(b))?;
    run.sink.write(
        &format!("{stem}_echoes.json"),
        (r.echoes_json()? + "\n").as_bytes(),
    )
}

/// Label for a number in a metric name: `1.5` → `1p5`.
fn label(x: f64) -> String {
    let s = format!("{x}");
    s.replace('.', "p").replace('-', "m")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_identifier_safe() {
        assert_eq!(label(1.0), "1");
        assert_eq!(label(2.5), "2p5");
        assert_eq!(label(-0.1), "m0p1");
    }
}
