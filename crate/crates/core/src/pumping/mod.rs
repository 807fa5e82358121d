//! Memory preparation by optical pumping through the excited state.

mod evolve;
mod ops;
mod params;
mod population;

pub use evolve::{
    evolve_preparation, evolve_preparation_with, relax, step_bound, EvolveOptions, Phase,
    PreparationTrace,
};
pub use ops::{decay_profile, fluorescence_rate, realized_profile, PreparationSummary};
pub use params::{Interval, MaterialParams, PumpSchedule};
pub use population::{PopulationField, Populations};
