// Turns an echo into a photon-count histogram with dark counts and
// fluorescence, and measures the signal-to-noise ratio.

use photon_echo::detection::{simulate_counts, snr, DetectorModel, Signal};
use photon_echo::echo::Pulse;
use photon_echo::Result;

pub fn run() -> Result<()> {
    // A Gaussian stand-in for a retrieved echo with 1% efficiency.
    let echo = Pulse::new(2e-6, 300e-9, 0.01);
    let times: Vec<f64> = (0..2000).map(|i| i as f64 * 2e-9).collect();
    let flux: Vec<f64> = times.iter().map(|t| echo.intensity(*t)).collect();
    let det = DetectorModel {
        fluorescence_collection: 0.2,
        ..DetectorModel::default()
    };
    let fluor = |t: f64| 50.0 * (-t / 11e-3).exp();
    let hist = simulate_counts(
        Signal {
            times: &times,
            flux: &flux,
        },
        &fluor,
        &det,
        100_000_000,
        (0.0, 6e-6),
        50e-9,
        3,
    )?;
    let a = hist.bin_range(1.7e-6, 2.3e-6);
    let b = hist.bin_range(4.7e-6, 5.3e-6);
    println!(
        "{} bins, {} counts in total",
        hist.bins(),
        hist.sum(0..hist.bins())
    );
    println!(
        "echo window {} counts, noise window {} counts",
        hist.sum(a.clone()),
        hist.sum(b.clone())
    );
    println!("snr {:.3}", snr(&hist, a, b)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
