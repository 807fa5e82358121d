// Sums the dipoles of 10⁵ atoms drawn from a comb and compares the
// rephasing at `m/Δ` with the closed-form dephasing factor.

use photon_echo::echo::{afc_dephasing, dipole_sum_oracle, FieldSchedule};
use photon_echo::spectral::{make_comb, sample_ensemble, CombSpec, StarkCalibration};
use photon_echo::Result;

pub fn run() -> Result<()> {
    let spec = CombSpec::from_finesse(2.78e6, 2.6, 0.5, 1.5, 15);
    let comb = make_comb(&spec, spec.min_window(), 8192)?;
    let atoms = sample_ensemble(&comb, 100_000, 1.0, 11)?;
    let schedule = FieldSchedule::off(StarkCalibration::new(1.0, 2.0, spec.delta)?);
    let times = [1.0 / spec.delta, 2.0 / spec.delta];
    let s = dipole_sum_oracle(&atoms, &schedule, &times)?;
    for (k, value) in s.iter().enumerate() {
        let m = k as u32 + 1;
        println!(
            "m = {m}: |s|^2 = {:.4}, closed form {:.4}",
            value.norm_sqr(),
            afc_dephasing(spec.finesse(), m)
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
