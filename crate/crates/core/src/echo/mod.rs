//! Storage and retrieval of weak pulses: closed-form laws and the linear
//! propagation model.

mod closed_form;
mod oracle;
mod pulse;
mod result;
mod schedule;
mod simulate;

pub use closed_form::{
    afc_dephasing, afc_echo_phase, afc_echo_times, afc_efficiency, afc_efficiency_order,
    compress_stretch_fwhm, crib_depth_for_modes, crib_efficiency, multimode_capacity,
    optimal_finesse, wrap_phase, EchoPhase, Protocol, StretchPrediction,
};
pub use oracle::dipole_sum_oracle;
pub use pulse::Pulse;
pub use result::{phase_difference, Echo, EchoResult};
pub use schedule::{FieldSchedule, FieldSegment};
pub use simulate::{
    max_time_step, simulate_storage, simulate_storage_with, StorageOptions, TimeGrid,
    MAX_TIME_POINTS,
};
