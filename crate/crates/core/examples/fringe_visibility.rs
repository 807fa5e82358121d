// Interferes the first two comb echoes with a matched local oscillator
// while the comb offset is scanned, and fits the fringes.

use photon_echo::detection::{
    fit_fringe_near, interference_scan, matched_lo, visibility_model, DetectorModel,
    PhaseNoiseModel, ScanSettings,
};
use photon_echo::echo::{max_time_step, simulate_storage, FieldSchedule, Pulse, TimeGrid};
use photon_echo::spectral::{make_comb, CombSpec, StarkCalibration};
use photon_echo::Result;

pub fn run() -> Result<()> {
    let spec = CombSpec::from_finesse(2.78e6, 2.6, 0.5, 1.5, 15);
    let comb = make_comb(&spec, spec.min_window(), 8192)?;
    let pulse = Pulse::new(300e-9, 100e-9, 1.0);
    let schedule = FieldSchedule::off(StarkCalibration::new(1.0, 2.0, spec.delta)?);
    let end = pulse.center_time + 2.5 / spec.delta;
    let r = simulate_storage(
        &comb,
        &pulse,
        &schedule,
        TimeGrid::new(max_time_step(&comb, &pulse, &schedule), end),
    )?;

    let noise = PhaseNoiseModel::for_visibility(0.89)?;
    let scan: Vec<f64> = (0..41)
        .map(|i| (i as f64 / 40.0 - 0.5) * spec.delta)
        .collect();
    for m in [1, 2] {
        let e = r.echo(m).expect("echo present");
        let lo = matched_lo(&r, m, Pulse::new(e.peak_time, pulse.fwhm, 1.0))?;
        let settings = ScanSettings {
            order: m,
            n_trials: 20_000_000,
            cycles: 20_000,
            seed: m as u64,
        };
        let s = interference_scan(
            &r,
            &lo,
            &scan,
            &spec,
            &noise,
            &DetectorModel::default(),
            settings,
        )?;
        let fit = fit_fringe_near(&s.net_xy(), Some(spec.delta / m as f64))?;
        println!(
            "m = {m}: visibility {:.3} ± {:.3} (model {:.3}), period {:.3} MHz",
            fit.visibility,
            fit.visibility_err,
            visibility_model(noise.sigma, m),
            fit.period / 1e6
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
