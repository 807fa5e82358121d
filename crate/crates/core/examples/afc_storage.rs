// Sends a 100 ns pulse through a frequency comb and lists the echoes
// against the closed-form efficiency and timing laws.

use photon_echo::echo::{
    afc_echo_times, afc_efficiency_order, max_time_step, simulate_storage, FieldSchedule, Pulse,
    TimeGrid,
};
use photon_echo::spectral::{make_comb, CombSpec, StarkCalibration};
use photon_echo::Result;

pub fn run() -> Result<()> {
    let spec = CombSpec::from_finesse(2.78e6, 2.6, 0.5, 1.5, 15);
    let comb = make_comb(&spec, spec.min_window(), 8192)?;
    let pulse = Pulse::new(300e-9, 100e-9, 1.0);
    let schedule = FieldSchedule::off(StarkCalibration::new(1.0, 2.0, spec.delta)?);
    let end = pulse.center_time + 2.5 / spec.delta;
    let step = max_time_step(&comb, &pulse, &schedule);
    let r = simulate_storage(&comb, &pulse, &schedule, TimeGrid::new(step, end))?;

    println!(
        "time step {:.3} ns, transmitted {:.4}",
        step * 1e9,
        r.transmitted
    );
    for (m, t) in afc_echo_times(spec.delta, 2).into_iter().enumerate() {
        let m = m as u32 + 1;
        let expected = pulse.center_time + t;
        match r.echo_near(expected, pulse.fwhm) {
            Some(e) => println!(
                "echo {m}: delay {:.1} ns (law {:.1} ns), efficiency {:.3e} (single-path closed form {:.3e})",
                (e.peak_time - pulse.center_time) * 1e9,
                t * 1e9,
                e.efficiency,
                afc_efficiency_order(spec.peak_depth, spec.finesse(), spec.background, m)
            ),
            None => println!("echo {m}: not found near {:.1} ns", expected * 1e9),
        }
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
