// Stores a 2 µs pulse in a Stark-broadened narrow line and retrieves it by
// flipping the field, then compares the echo with the closed form.

use photon_echo::echo::{
    crib_efficiency, max_time_step, simulate_storage, FieldSchedule, Pulse, TimeGrid,
};
use photon_echo::spectral::{make_single_line, StarkCalibration};
use photon_echo::{Result, FWHM_PER_SIGMA};

pub fn run() -> Result<()> {
    let (gamma, b, d_br) = (5e3, 400.0, 1.0);
    let calib = StarkCalibration::new(100.0, b, gamma)?;
    let line = make_single_line(gamma, d_br * b, 0.0, 4e6, 4096)?;
    let pulse = Pulse::new(5e-6, 2e-6, 1.0);
    let tau = 6e-6;
    let flip = pulse.center_time + tau;
    let end = flip + tau + 4.0 * pulse.fwhm;
    let schedule = FieldSchedule::crib(calib, 100.0, 100.0, 0.0, flip, end);
    let step = max_time_step(&line, &pulse, &schedule);
    let r = simulate_storage(&line, &pulse, &schedule, TimeGrid::new(step, end))?;

    let echo = r
        .echo_near(flip + tau, 2.0 * pulse.fwhm)
        .expect("echo after the flip");
    let closed = crib_efficiency(
        d_br,
        0.0,
        echo.peak_time - pulse.center_time,
        gamma / FWHM_PER_SIGMA,
    );
    println!("time step {:.2} ns", step * 1e9);
    println!(
        "echo at {:.3} us (expected {:.3} us), fwhm {:.3} us",
        echo.peak_time * 1e6,
        (flip + tau) * 1e6,
        echo.fwhm * 1e6
    );
    println!(
        "efficiency {:.4} (closed form {:.4})",
        echo.efficiency, closed
    );
    println!(
        "transmitted {:.4}, total output {:.4}",
        r.transmitted, r.total_output
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
