// Builds a single absorption line and a frequency comb, broadens the line
// with a Stark field and draws a discrete ensemble from the comb.

use photon_echo::spectral::{
    make_comb, make_single_line, sample_ensemble, stark_broaden, CombSpec, StarkCalibration,
};
use photon_echo::Result;

pub fn run() -> Result<()> {
    let line = make_single_line(1.5e6, 2.0, 1.5, 30e6, 4096)?;
    let calib = StarkCalibration::new(70.0, 3.0, 1.5e6)?;
    let factor = calib.broadening(70.0);
    let broad = stark_broaden(&line, factor)?;
    println!(
        "line: peak depth {:.3}, std {:.3} MHz, area {:.4e}",
        line.max_depth(),
        line.std_detuning() / 1e6,
        line.area()
    );
    println!(
        "broadened x{factor:.1}: peak depth {:.3}, std {:.3} MHz, area {:.4e}",
        broad.max_depth(),
        broad.std_detuning() / 1e6,
        broad.area()
    );

    let spec = CombSpec::from_finesse(2.78e6, 2.6, 0.5, 1.5, 15);
    let comb = make_comb(&spec, spec.min_window(), 8192)?;
    println!(
        "comb: {} teeth, finesse {:.2}, window {:.1} MHz",
        spec.peak_positions().len(),
        spec.finesse(),
        comb.window_width() / 1e6
    );

    let atoms = sample_ensemble(&comb, 10_000, 1.0, 7)?;
    let near_tooth = atoms
        .detunings()
        .filter(|d| {
            let r = d.rem_euclid(spec.delta);
            r.min(spec.delta - r) < 0.25 * spec.delta
        })
        .count();
    println!(
        "ensemble: {} atoms, {:.1}% within a quarter spacing of a tooth",
        atoms.len(),
        100.0 * near_tooth as f64 / atoms.len() as f64
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
