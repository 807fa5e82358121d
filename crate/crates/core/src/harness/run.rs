use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use super::config::{ScenarioConfig, ScenarioKind};
use super::report::{config_hash, Manifest, OutputSink, RunReport};
use super::scenarios;
use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORT_FILE: &str = "report.json";

/// Independent seed for sub-task `index` of a run seeded with `seed`
/// (SplitMix64 finalizer).
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Metrics, checks and files accumulated by a scenario.
pub(crate) struct Run<'a> {
    pub(crate) cfg: &'a ScenarioConfig,
    pub(crate) sink: OutputSink,
    pub(crate) metrics: BTreeMap<String, f64>,
    pub(crate) checks: BTreeMap<String, bool>,
    pub(crate) notes: Vec<String>,
}

impl Run<'_> {
    /// Records a metric; undefined values are left out and noted.
    pub(crate) fn metric(&mut self, name: impl Into<String>, value: f64) {
        let name = name.into();
        if value.is_finite() {
            self.metrics.insert(name, value);
        } else {
            self.notes
                .push(format!("metric `{name}` is undefined ({value})"));
        }
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, pass: bool) {
        self.checks.insert(name.into(), pass);
    }

    pub(crate) fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

/// Runs the configured scenario, writing its data files, `config.json`,
/// the manifest and the report under `out`.
pub fn run_scenario(config: &ScenarioConfig, out: &Path) -> Result<RunReport> {
    let started = Instant::now();
    let mut run = Run {
        cfg: config,
        sink: OutputSink::new(out)?,
        metrics: BTreeMap::new(),
        checks: BTreeMap::new(),
        notes: Vec::new(),
    };
    run.sink.write_json("config.json", config)?;
    match config.scenario {
        ScenarioKind::NoiseDecay => scenarios::noise_decay(&mut run)?,
        ScenarioKind::SnrVsWait => scenarios::snr_vs_wait(&mut run)?,
        ScenarioKind::CribEcho => scenarios::crib_echo(&mut run)?,
        ScenarioKind::PulseShape => scenarios::pulse_shape(&mut run)?,
        ScenarioKind::AfcEcho => scenarios::afc_echo(&mut run)?,
        ScenarioKind::FringeScan => scenarios::fringe_scan(&mut run)?,
        ScenarioKind::CombinedGate => scenarios::combined_gate(&mut run)?,
        ScenarioKind::CapacityCurves => scenarios::capacity_curves(&mut run)?,
    }
    run.sink.write_json("metrics.json", &run.metrics)?;
    let hash = config_hash(config)?;
    let manifest = Manifest {
        scenario: config.scenario,
        seed: config.seed,
        config_hash: hash.clone(),
        files: run.sink.files().to_vec(),
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(out.join(MANIFEST_FILE), text)?;
    let report = RunReport {
        scenario: config.scenario,
        seed: config.seed,
        config_hash: hash,
        metrics: run.metrics,
        checks: run.checks,
        notes: run.notes,
        files: run.sink.into_files(),
        wall_clock_s: started.elapsed().as_secs_f64(),
        config: config.clone(),
    };
    report.write_json(&out.join(REPORT_FILE))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sub_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|i| sub_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(a.len(), b.len());
        assert_ne!(sub_seed(7, 0), sub_seed(8, 0));
    }
}
