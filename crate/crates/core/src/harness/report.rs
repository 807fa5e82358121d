//! Run reports, output manifests and comparison against reference metrics.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ScenarioConfig, ScenarioKind};
use crate::error::{Error, Result};

/// One file written by a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Outcome of one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: ScenarioKind,
    pub seed: u64,
    /// SHA-256 of the resolved configuration.
    pub config_hash: String,
    pub metrics: BTreeMap<String, f64>,
    /// Pass/fail of the scenario's built-in checks.
    pub checks: BTreeMap<String, bool>,
    pub notes: Vec<String>,
    pub files: Vec<FileEntry>,
    pub wall_clock_s: f64,
    /// The configuration with all defaults filled in.
    pub config: ScenarioConfig,
}

impl RunReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn check(&self, name: &str) -> Option<bool> {
        self.checks.get(name).copied()
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.values().all(|v| *v)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Deterministic part of a run: what was run and which bytes it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub config_hash: String,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the resolved configuration's canonical JSON.
pub fn config_hash(config: &ScenarioConfig) -> Result<String> {
    Ok(sha256_hex(serde_json::to_string(config)?.as_bytes()))
}

/// Collects output files under a directory and records their hashes.
#[derive(Debug)]
pub struct OutputSink {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputSink {
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `bytes` to `name` under the root and records it.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Writes through a closure that fills a byte buffer.
    pub fn write_with(
        &mut self,
        name: &str,
        fill: impl FnOnce(&mut Vec<u8>) -> Result<()>,
    ) -> Result<()> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write(name, text.as_bytes())
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn into_files(self) -> Vec<FileEntry> {
        self.files
    }
}

/// Expected value of one metric. Either an absolute or a relative tolerance
/// around `value`, or bounds `min`/`max`, or both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub abs_tol: Option<f64>,
    #[serde(default)]
    pub rel_tol: Option<f64>,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
}

impl Expectation {
    fn tolerance(&self) -> f64 {
        let v = self.value.unwrap_or(0.0).abs();
        self.abs_tol
            .unwrap_or(0.0)
            .max(self.rel_tol.unwrap_or(0.0) * v)
    }

    fn accepts(&self, actual: f64) -> bool {
        if !actual.is_finite() {
            return false;
        }
        let within = self
            .value
            .is_none_or(|v| (actual - v).abs() <= self.tolerance());
        within && self.min.is_none_or(|m| actual >= m) && self.max.is_none_or(|m| actual <= m)
    }
}

/// Expected metrics of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub scenario: Option<ScenarioKind>,
    pub metrics: BTreeMap<String, Expectation>,
}

impl Reference {
    pub fn read_json(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub name: String,
    pub actual: Option<f64>,
    pub expected: Expectation,
    /// `actual - value`, when both exist.
    pub delta: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub pass: bool,
    pub metrics: Vec<MetricComparison>,
    /// Reference metrics absent from the report.
    pub missing: Vec<String>,
    /// Report metrics the reference does not mention.
    pub ignored: Vec<String>,
    pub scenario_mismatch: Option<String>,
}

impl Comparison {
    pub fn failures(&self) -> Vec<&str> {
        self.metrics
            .iter()
            .filter(|m| !m.pass)
            .map(|m| m.name.as_str())
            .collect()
    }

    /// Human-readable summary, one line per metric.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(m) = &self.scenario_mismatch {
            out.push_str(&format!("FAIL scenario: {m}\n"));
        }
        for m in &self.metrics {
            let status = if m.pass { "ok  " } else { "FAIL" };
            match (m.actual, m.delta) {
                (None, _) => out.push_str(&format!("{status} {}: missing from report\n", m.name)),
                (Some(a), Some(d)) => {
                    out.push_str(&format!("{status} {}: {a:.6e} (delta {d:+.3e})\n", m.name))
                }
                (Some(a), None) => out.push_str(&format!("{status} {}: {a:.6e}\n", m.name)),
            }
        }
        if !self.ignored.is_empty() {
            out.push_str(&format!(
                "note: ignored metrics not in reference: {}\n",
                self.ignored.join(", ")
            ));
        }
        out.push_str(if self.pass { "PASS\n" } else { "FAIL\n" });
        out
    }
}

/// Checks every reference metric against the report.
pub fn compare_to_reference(report: &RunReport, reference: &Reference) -> Comparison {
    let mut metrics = Vec::new();
    let mut missing = Vec::new();
    for (name, exp) in &reference.metrics {
        let actual = report.metric(name);
        if actual.is_none() {
            missing.push(name.clone());
        }
        metrics.push(MetricComparison {
            name: name.clone(),
            actual,
            expected: *exp,
            delta: actual.zip(exp.value).map(|(a, v)| a - v),
            pass: actual.is_some_and(|a| exp.accepts(a)),
        });
    }
    let ignored = report
        .metrics
        .keys()
        .filter(|k| !reference.metrics.contains_key(*k))
        .cloned()
        .collect();
    let scenario_mismatch = reference
        .scenario
        .filter(|s| *s != report.scenario)
        .map(|s| {
            format!(
                "reference is for `{s}`, report is for `{}`",
                report.scenario
            )
        });
    let pass = scenario_mismatch.is_none() && metrics.iter().all(|m| m.pass);
    Comparison {
        pass,
        metrics,
        missing,
        ignored,
        scenario_mismatch,
    }
}

/// Reads a report and a reference file and compares them.
pub fn compare_files(report: &Path, reference: &Path) -> Result<Comparison> {
    let report = RunReport::read_json(report)?;
    let reference = Reference::read_json(reference).map_err(|e| match e {
        Error::Json(j) => Error::Parse(format!("reference file: {j}")),
        other => other,
    })?;
    Ok(compare_to_reference(&report, &reference))
}
