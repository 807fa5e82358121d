// Suppresses the first comb echo with a Stark gate and recovers the second
// by reversing the gate polarity at `1/Δ`.

use photon_echo::echo::{
    afc_efficiency_order, max_time_step, simulate_storage, FieldSchedule, Pulse, TimeGrid,
};
use photon_echo::spectral::{make_comb, CombSpec, StarkCalibration};
use photon_echo::{Result, FWHM_PER_SIGMA};

pub fn run() -> Result<()> {
    let spec = CombSpec::from_finesse(2.78e6, 2.6, 0.5, 1.5, 15);
    let comb = make_comb(&spec, spec.min_window(), 8192)?;
    let pulse = Pulse::new(300e-9, 100e-9, 1.0);
    let calib = StarkCalibration::new(70.0, 3.0, spec.delta)?;
    let u = calib.voltage_for_sigma(3.0 * spec.delta / FWHM_PER_SIGMA);
    let t1 = pulse.center_time + 1.0 / spec.delta;
    let half = 1.0 / spec.delta - 1.5 * pulse.fwhm;
    let end = pulse.center_time + 2.5 / spec.delta;

    let schedules = [
        ("reference", FieldSchedule::off(calib)),
        (
            "unreversed",
            FieldSchedule::off(calib).with_segment(t1 - half, t1 + half, u),
        ),
        (
            "reversed",
            FieldSchedule::off(calib)
                .with_segment(t1 - half, t1, u)
                .with_segment(t1, t1 + half, -u),
        ),
    ];
    let step = schedules
        .iter()
        .map(|(_, s)| max_time_step(&comb, &pulse, s))
        .fold(f64::INFINITY, f64::min);
    let window = |r: &photon_echo::echo::EchoResult, t: f64| {
        r.window_efficiency(t - 1.5 * pulse.fwhm, t + 1.5 * pulse.fwhm)
    };
    for (name, schedule) in &schedules {
        let r = simulate_storage(&comb, &pulse, schedule, TimeGrid::new(step, end))?;
        println!(
            "{name:>10}: echo 1 {:.3e}, echo 2 {:.3e}",
            window(&r, t1),
            window(&r, pulse.center_time + 2.0 / spec.delta)
        );
    }
    println!(
        "second echo with the first suppressed, closed form {:.3e}",
        afc_efficiency_order(spec.peak_depth, spec.finesse(), spec.background, 2)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
