//! Absorption profiles: construction, Stark broadening and ensemble sampling.

mod ensemble;
mod profile;
mod shapes;
mod stark;

pub use ensemble::{
    sample_ensemble, sample_ensemble_with, Atom, AtomEnsemble, SampleOptions, DEFAULT_WAVENUMBER,
};
pub use profile::{trapezoid, SpectralProfile};
pub use shapes::{make_comb, make_single_line, CombSpec, PeakShape, DEFAULT_GRID_POINTS};
pub use stark::{stark_broaden, voltage_to_broadening, StarkCalibration};
