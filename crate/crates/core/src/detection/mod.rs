//! Photon counting: detector model, histograms, SNR and interference fringes.

mod fit;
mod histogram;
mod interference;
mod model;

pub use fit::{
    fit_exponential_decay, fit_fringe, fit_fringe_near, linear_fit, DecayFit, FringeFit, LinearFit,
};
pub use histogram::{simulate_counts, snr, snr_from_counts, CountHistogram, Signal};
pub use interference::{
    interference_scan, matched_lo, InterferenceScan, ScanPoint, ScanSettings, LO_TOLERANCE,
};
pub use model::{visibility_model, DetectorModel, PhaseNoiseModel};
