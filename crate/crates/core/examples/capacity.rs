// Counts the temporal modes each protocol can hold and what storing them
// costs in efficiency.

use photon_echo::echo::{
    afc_efficiency, crib_depth_for_modes, crib_efficiency, multimode_capacity, Protocol,
};

pub fn run() -> photon_echo::Result<()> {
    println!("CRIB, raw depth 4:");
    for b in [1.0, 2.0, 4.0, 8.0] {
        let modes = multimode_capacity(Protocol::Crib { broadening: b });
        let d_br = crib_depth_for_modes(4.0, modes);
        println!(
            "  broadening {b}: {modes} modes, efficiency {:.4}",
            crib_efficiency(d_br, 0.0, 0.0, 0.0)
        );
    }
    println!("AFC, d = 0.5, F = 2.6, d0 = 1.5:");
    for n_peaks in [5, 15, 60] {
        let modes = multimode_capacity(Protocol::Afc {
            n_peaks,
            modes_per_peak: 1.0,
        });
        println!(
            "  {n_peaks} teeth: {modes} modes, efficiency {:.4}",
            afc_efficiency(0.5, 2.6, 1.5)
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
