//! Scenario runner: configuration, the built-in experiments and their
//! reports.

mod config;
mod report;
mod run;
mod scenarios;
mod schema;

pub use config::{
    validate_config, CapacitySection, CombSection, CountingSection, FieldSection, FringeSection,
    GateSection, LineSection, MaterialSection, NoiseDecaySection, PreparationSection, PulseSection,
    PulseShapeSection, ScenarioConfig, ScenarioKind, SnrSection, StarkSection, TimeSection,
};
pub use report::{
    compare_files, compare_to_reference, config_hash, sha256_hex, Comparison, Expectation,
    FileEntry, Manifest, MetricComparison, OutputSink, Reference, RunReport,
};
pub use run::{run_scenario, sub_seed, MANIFEST_FILE, REPORT_FILE};
