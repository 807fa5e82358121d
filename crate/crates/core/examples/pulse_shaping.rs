// Reads a stored pulse out with a different Stark width than it was
// written with, compressing or stretching the echo.

use photon_echo::echo::{
    compress_stretch_fwhm, max_time_step, simulate_storage, FieldSchedule, Pulse, TimeGrid,
};
use photon_echo::spectral::{make_single_line, StarkCalibration};
use photon_echo::Result;

pub fn run() -> Result<()> {
    let calib = StarkCalibration::new(100.0, 400.0, 5e3)?;
    let line = make_single_line(5e3, 400.0, 0.0, 4e6, 4096)?;
    let pulse = Pulse::new(5e-6, 2e-6, 1.0);
    let (u1, tau) = (100.0, 6e-6);
    let flip = pulse.center_time + tau;
    for alpha in [1.0, 2.0, 0.5] {
        let u2 = calib.voltage_for_sigma(alpha * calib.stark_sigma(u1));
        let predicted = compress_stretch_fwhm(pulse.fwhm, u1, u2, &calib);
        let echo_time = flip + tau * predicted.tau_scale;
        let end = echo_time + 4.0 * predicted.output_fwhm.max(pulse.fwhm);
        let schedule = FieldSchedule::crib(calib, u1, u2, 0.0, flip, end);
        let step = max_time_step(&line, &pulse, &schedule);
        let r = simulate_storage(&line, &pulse, &schedule, TimeGrid::new(step, end))?;
        let e = r
            .echo_near(echo_time, 2.0 * pulse.fwhm)
            .expect("echo after the flip");
        println!(
            "alpha {alpha}: u2 = {u2:.1} V, echo fwhm {:.3} us (predicted {:.3} us), efficiency {:.3}",
            e.fwhm * 1e6,
            predicted.output_fwhm * 1e6,
            e.efficiency
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
