// Burns a wide pit around an unpumped 2 MHz window and follows the
// prepared line through the waiting period.

use photon_echo::pumping::{
    decay_profile, evolve_preparation, fluorescence_rate, MaterialParams, PopulationField,
    PreparationSummary, PumpSchedule,
};
use photon_echo::spectral::SpectralProfile;
use photon_echo::Result;

pub fn run() -> Result<()> {
    let mat = MaterialParams::erbium(0.2);
    let raw = SpectralProfile::new(-9e6, 18e6 / 511.0, vec![4.0; 512], 0.0)?;
    for gain in [1.0, 4.0] {
        let schedule = PumpSchedule {
            duration: 120e-3,
            sweep_span: 20e6,
            sweep_rate: 4e10,
            gate_windows: PumpSchedule::single_gate(0.0, 2e6),
            pump_rate: 5e5,
            stimulation_gain: gain,
            t_extra: 23.5e-3,
            t_wait: 86e-3,
            resonance_width: None,
        };
        let trace = evolve_preparation(&PopulationField::unpumped(&raw), &schedule, &mat, 0.1e-6)?;
        let end = trace.end_of_preparation();
        let summary = PreparationSummary::from_field(end);
        println!(
            "gain {gain}: pit depth {:.3}, residual excited {:.3e}, fluorescence {:.3e} /s, conservation {:.1e}",
            summary.pit_depth,
            summary.residual_excited_total,
            fluorescence_rate(end, &mat, 0.0),
            end.conservation_error()
        );
        for wait in [0.0, 86e-3, 400e-3] {
            let profile = decay_profile(&raw, end, &mat, wait)?;
            println!(
                "  after {:>5.0} ms: line {:.3}, pit floor {:.3}",
                wait * 1e3,
                profile.depth_at(0.0),
                profile.depth_at(6e6)
            );
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
