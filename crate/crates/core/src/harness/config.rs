//! Scenario configuration: TOML schema, defaults and validation.
//!
//! Every physical quantity is a string with a unit (`delta = "2.78 MHz"`);
//! bare numbers are reserved for dimensionless values such as optical depths
//! and gains. Unknown keys and sections are rejected and all violations are
//! reported together.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::schema::{Reader, Section};
use crate::detection::DetectorModel;
use crate::error::{Error, Result};
use crate::pumping::MaterialParams;
use crate::spectral::PeakShape;
use crate::units::Dim;

/// The built-in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    NoiseDecay,
    SnrVsWait,
    CribEcho,
    PulseShape,
    AfcEcho,
    FringeScan,
    CombinedGate,
    CapacityCurves,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 8] = [
        ScenarioKind::NoiseDecay,
        ScenarioKind::SnrVsWait,
        ScenarioKind::CribEcho,
        ScenarioKind::PulseShape,
        ScenarioKind::AfcEcho,
        ScenarioKind::FringeScan,
        ScenarioKind::CombinedGate,
        ScenarioKind::CapacityCurves,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::NoiseDecay => "noise-decay",
            ScenarioKind::SnrVsWait => "snr-vs-wait",
            ScenarioKind::CribEcho => "crib-echo",
            ScenarioKind::PulseShape => "pulse-shape",
            ScenarioKind::AfcEcho => "afc-echo",
            ScenarioKind::FringeScan => "fringe-scan",
            ScenarioKind::CombinedGate => "combined-gate",
            ScenarioKind::CapacityCurves => "capacity-curves",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            ScenarioKind::NoiseDecay => {
                "fluorescence noise after preparation versus stimulation gain"
            }
            ScenarioKind::SnrVsWait => {
                "CRIB signal-to-noise versus mean photon number and waiting time"
            }
            ScenarioKind::CribEcho => "single CRIB echo of a weak pulse",
            ScenarioKind::PulseShape => "echo duration versus the two Stark voltages",
            ScenarioKind::AfcEcho => "first and second AFC echoes",
            ScenarioKind::FringeScan => "echo/local-oscillator fringes versus comb offset",
            ScenarioKind::CombinedGate => "AFC echoes gated by a reversible Stark broadening",
            ScenarioKind::CapacityCurves => "multimode capacity and efficiency of CRIB and AFC",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Scenarios that run the pumping model and therefore need
    /// `material.persistent_fraction`.
    pub fn needs_pumping(self) -> bool {
        matches!(self, ScenarioKind::NoiseDecay | ScenarioKind::SnrVsWait)
    }

    fn sections(self) -> &'static [&'static str] {
        match self {
            ScenarioKind::NoiseDecay => &["material", "preparation", "detector", "noise_decay"],
            ScenarioKind::SnrVsWait => &[
                "material",
                "preparation",
                "stark",
                "pulse",
                "field",
                "time",
                "detector",
                "counting",
                "snr",
            ],
            ScenarioKind::CribEcho => &[
                "line", "stark", "pulse", "field", "time", "detector", "counting",
            ],
            ScenarioKind::PulseShape => &["line", "stark", "pulse", "field", "time", "pulse_shape"],
            ScenarioKind::AfcEcho => &["comb", "pulse", "time", "detector", "counting"],
            ScenarioKind::FringeScan => &["comb", "pulse", "time", "detector", "fringe"],
            ScenarioKind::CombinedGate => &["comb", "stark", "pulse", "time", "gate"],
            ScenarioKind::CapacityCurves => &["comb", "pulse", "time", "capacity"],
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSection {
    pub t1: f64,
    pub tz: f64,
    pub t_persistent: f64,
    pub branch_beta: f64,
    pub persistent_fraction: Option<f64>,
}

impl MaterialSection {
    /// Material constants; `persistent_fraction` must have been given.
    pub fn params(&self) -> MaterialParams {
        MaterialParams {
            t1: self.t1,
            tz: self.tz,
            t_persistent: self.t_persistent,
            branch_beta: self.branch_beta,
            persistent_fraction: self.persistent_fraction.unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparationSection {
    pub duration: f64,
    pub sweep_span: f64,
    pub sweep_rate: f64,
    pub pump_rate: f64,
    pub stimulation_gain: f64,
    pub t_extra: f64,
    pub t_wait: f64,
    pub resonance_width: Option<f64>,
    /// Optical depth of the unpumped inhomogeneous line.
    pub raw_depth: f64,
    /// Width of the unpumped feature left at the gate.
    pub gate_width: f64,
    /// Fraction of the sweep span covered by the spectral grid.
    pub grid_fraction: f64,
    pub grid_points: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSection {
    pub fwhm: f64,
    pub depth: f64,
    pub background: f64,
    pub window: f64,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombSection {
    pub delta: f64,
    pub finesse: f64,
    pub depth: f64,
    pub background: f64,
    pub n_peaks: usize,
    pub offset: f64,
    pub shape: PeakShape,
    /// Spectral window; `None` uses the smallest window holding the comb.
    pub window: Option<f64>,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarkSection {
    pub voltage_ref: f64,
    pub factor_ref: f64,
    pub line_fwhm_ref: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSection {
    pub center: f64,
    pub fwhm: f64,
    pub mean_photons: f64,
    pub carrier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSection {
    pub u1: f64,
    pub u2: f64,
    /// Delay from the input pulse centre to the polarity flip.
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSection {
    /// `None` picks the coarsest step the simulation accepts.
    pub step: Option<f64>,
    /// `None` sizes the grid to hold the expected echoes.
    pub duration: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingSection {
    pub n_trials: u64,
    pub bin_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseDecaySection {
    pub gains: Vec<f64>,
    /// Observation time after preparation.
    pub span: f64,
    pub bin_width: f64,
    pub cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrSection {
    pub mean_photons: Vec<f64>,
    pub waits: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseShapeSection {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    /// When given, replaces `u2` by the voltages giving these width ratios.
    pub alphas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeSection {
    pub visibility_1: f64,
    pub orders: Vec<u32>,
    pub points: usize,
    /// Scan width in units of the comb spacing.
    pub span: f64,
    pub n_trials: u64,
    pub cycles: u64,
    /// Comb offsets, as fractions of the spacing, simulated for the phase slope.
    pub slope_offsets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSection {
    /// Stark FWHM applied around the first echo.
    pub broadening: f64,
    /// Half-width of the gate around `1/Δ`; `None` uses `1/Δ - 1.5·fwhm`.
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitySection {
    /// Initial CRIB line depths.
    pub depths: Vec<f64>,
    pub max_modes: usize,
    /// CRIB initial linewidth entering the dephasing term.
    pub line_fwhm: f64,
    pub modes_per_peak: f64,
    pub n_peaks: Vec<usize>,
    /// Comb sizes simulated to check that efficiency does not depend on them.
    pub simulate_peaks: Vec<usize>,
}

/// A resolved scenario configuration: every field holds either the user's
/// value or the scenario default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub output_dir: Option<String>,
    pub material: MaterialSection,
    pub preparation: PreparationSection,
    pub line: LineSection,
    pub comb: CombSection,
    pub stark: StarkSection,
    pub pulse: PulseSection,
    pub field: FieldSection,
    pub time: TimeSection,
    pub detector: DetectorModel,
    pub counting: CountingSection,
    pub noise_decay: NoiseDecaySection,
    pub snr: SnrSection,
    pub pulse_shape: PulseShapeSection,
    pub fringe: FringeSection,
    pub gate: GateSection,
    pub capacity: CapacitySection,
}

impl ScenarioConfig {
    /// Defaults for `kind`. Pumping scenarios still lack
    /// `material.persistent_fraction`, which has no default.
    pub fn defaults(kind: ScenarioKind) -> Self {
        let delta = 2.78e6;
        let mut c = Self {
            scenario: kind,
            seed: 1,
            output_dir: None,
            material: MaterialSection {
                t1: 11e-3,
                tz: 130e-3,
                t_persistent: 900.0,
                branch_beta: 0.1,
                persistent_fraction: None,
            },
            preparation: PreparationSection {
                duration: 120e-3,
                sweep_span: 20e6,
                sweep_rate: 4e10,
                pump_rate: 5e4,
                stimulation_gain: 1.0,
                t_extra: 23.5e-3,
                t_wait: 86e-3,
                resonance_width: None,
                raw_depth: 4.0,
                gate_width: 2e6,
                grid_fraction: 0.9,
                grid_points: 2048,
                dt: 1e-6,
            },
            line: LineSection {
                fwhm: 1.5e6,
                depth: 2.0,
                background: 1.5,
                window: 30e6,
                grid_points: 4096,
            },
            comb: CombSection {
                delta,
                finesse: 2.6,
                depth: 0.5,
                background: 1.5,
                n_peaks: 15,
                offset: 0.0,
                shape: PeakShape::CalibratedGaussian,
                window: None,
                grid_points: 1 << 13,
            },
            stark: StarkSection {
                voltage_ref: 70.0,
                factor_ref: 3.0,
                line_fwhm_ref: 1.5e6,
            },
            pulse: PulseSection {
                center: 300e-9,
                fwhm: 100e-9,
                mean_photons: 1.0,
                carrier: 0.0,
            },
            field: FieldSection {
                u1: 70.0,
                u2: 70.0,
                tau: 200e-9,
            },
            time: TimeSection {
                step: None,
                duration: None,
            },
            detector: DetectorModel::default(),
            counting: CountingSection {
                n_trials: 1_000_000,
                bin_width: 10e-9,
            },
            noise_decay: NoiseDecaySection {
                gains: vec![1.0, 2.0, 4.0, 8.0],
                span: 60e-3,
                bin_width: 1e-3,
                cycles: 10_800,
            },
            snr: SnrSection {
                mean_photons: vec![0.3, 0.6, 0.9, 1.2, 1.5, 2.0],
                waits: vec![20e-3, 50e-3, 86e-3, 150e-3, 250e-3, 400e-3],
            },
            pulse_shape: PulseShapeSection {
                u1: vec![65.0, 95.0],
                u2: vec![35.0, 65.0, 95.0],
                alphas: None,
            },
            fringe: FringeSection {
                visibility_1: 0.89,
                orders: vec![1, 2],
                points: 41,
                span: 1.0,
                n_trials: 20_000_000,
                cycles: 20_000,
                slope_offsets: vec![-0.1, -0.05, 0.0, 0.05, 0.1],
            },
            gate: GateSection {
                broadening: 3.0 * delta,
                half_width: None,
            },
            capacity: CapacitySection {
                depths: vec![2.0, 4.0, 8.0],
                max_modes: 20,
                line_fwhm: 10e3,
                modes_per_peak: 1.0,
                n_peaks: vec![5, 10, 15, 20, 30, 40, 60],
                simulate_peaks: vec![15, 30],
            },
        };
        match kind {
            ScenarioKind::NoiseDecay => {
                c.detector.fluorescence_collection = 20.0;
            }
            ScenarioKind::SnrVsWait => {
                c.stark.line_fwhm_ref = c.preparation.gate_width;
                c.pulse = PulseSection {
                    center: 600e-9,
                    fwhm: 300e-9,
                    mean_photons: 0.9,
                    carrier: 0.0,
                };
                c.field.tau = 600e-9;
                c.detector.fluorescence_collection = 0.2;
                c.counting.n_trials = 100_000_000;
                c.counting.bin_width = 50e-9;
            }
            ScenarioKind::CribEcho => {
                c.pulse.mean_photons = 0.9;
                c.counting.n_trials = 100_000_000;
            }
            ScenarioKind::PulseShape => {
                c.pulse.mean_photons = 1.0;
            }
            ScenarioKind::AfcEcho | ScenarioKind::CapacityCurves => {}
            ScenarioKind::FringeScan => {
                c.comb.window = Some(18.0 * delta);
            }
            ScenarioKind::CombinedGate => {
                c.pulse.mean_photons = 8.0;
                c.stark.line_fwhm_ref = delta;
            }
        }
        c
    }

    /// Reads and validates a TOML file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        validate_config(&text)
    }
}

/// Parses TOML text into a resolved configuration, or returns every
/// violation found as [`Error::Config`].
pub fn validate_config(raw: &str) -> Result<ScenarioConfig> {
    let doc: toml::Table = raw
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![format!("syntax: {}", e.message())]))?;
    let mut r = Reader::new(&doc);

    let kind = match r.root_value("scenario") {
        Some(toml::Value::String(s)) => match ScenarioKind::parse(s) {
            Some(k) => k,
            None => {
                let names: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
                return Err(Error::Config(vec![format!(
                    "scenario: unknown scenario `{s}` (expected one of {})",
                    names.join(", ")
                )]));
            }
        },
        Some(_) => return Err(Error::Config(vec!["scenario: expected a string".into()])),
        None => return Err(Error::Config(vec!["scenario: missing".into()])),
    };

    let mut allowed = vec!["scenario", "seed", "output_dir"];
    allowed.extend_from_slice(kind.sections());
    let all_sections = [
        "material",
        "preparation",
        "line",
        "comb",
        "stark",
        "pulse",
        "field",
        "time",
        "detector",
        "counting",
        "noise_decay",
        "snr",
        "pulse_shape",
        "fringe",
        "gate",
        "capacity",
    ];
    for key in doc.keys() {
        if !allowed.contains(&key.as_str()) {
            if all_sections.contains(&key.as_str()) {
                r.error(key, format!("section not used by scenario `{kind}`"));
            } else {
                r.error(key, "unknown key");
            }
        }
    }

    let mut c = ScenarioConfig::defaults(kind);
    match doc.get("seed") {
        None => {}
        Some(toml::Value::Integer(s)) if *s >= 0 => c.seed = *s as u64,
        Some(_) => r.error("seed", "expected a non-negative integer"),
    }
    match doc.get("output_dir") {
        None => {}
        Some(toml::Value::String(s)) => c.output_dir = Some(s.clone()),
        Some(_) => r.error("output_dir", "expected a string"),
    }

    read_material(&mut r, &mut c.material, kind);
    read_preparation(&mut r, &mut c.preparation);
    read_line(&mut r, &mut c.line);
    read_comb(&mut r, &mut c.comb);
    read_stark(&mut r, &mut c.stark);
    read_pulse(&mut r, &mut c.pulse);
    read_field(&mut r, &mut c.field);
    read_time(&mut r, &mut c.time);
    read_detector(&mut r, &mut c.detector);
    read_counting(&mut r, &mut c.counting);
    read_noise_decay(&mut r, &mut c.noise_decay);
    read_snr(&mut r, &mut c.snr);
    read_pulse_shape(&mut r, &mut c.pulse_shape);
    read_fringe(&mut r, &mut c.fringe);
    read_gate(&mut r, &mut c.gate);
    read_capacity(&mut r, &mut c.capacity);

    let mut errors = r.errors;
    check_ranges(&c, &mut errors);
    if errors.is_empty() {
        Ok(c)
    } else {
        Err(Error::Config(errors))
    }
}

fn read_material(r: &mut Reader, m: &mut MaterialSection, kind: ScenarioKind) {
    let s = r.section(
        "material",
        &[
            "t1",
            "tz",
            "t_persistent",
            "branch_beta",
            "persistent_fraction",
        ],
    );
    m.t1 = s.quantity(r, "t1", Dim::Time, m.t1);
    m.tz = s.quantity(r, "tz", Dim::Time, m.tz);
    m.t_persistent = s.quantity(r, "t_persistent", Dim::Time, m.t_persistent);
    m.branch_beta = s.number(r, "branch_beta", m.branch_beta);
    m.persistent_fraction = s.opt_number(r, "persistent_fraction");
    if kind.needs_pumping() && !s.has("persistent_fraction") {
        r.error(
            "material.persistent_fraction",
            "required for this scenario (no default; give a value in [0, 1])",
        );
    }
}

fn read_preparation(r: &mut Reader, p: &mut PreparationSection) {
    let s = r.section(
        "preparation",
        &[
            "duration",
            "sweep_span",
            "sweep_rate",
            "pump_rate",
            "stimulation_gain",
            "t_extra",
            "t_wait",
            "resonance_width",
            "raw_depth",
            "gate_width",
            "grid_fraction",
            "grid_points",
            "dt",
        ],
    );
    p.duration = s.quantity(r, "duration", Dim::Time, p.duration);
    p.sweep_span = s.quantity(r, "sweep_span", Dim::Frequency, p.sweep_span);
    p.sweep_rate = s.quantity(r, "sweep_rate", Dim::SweepRate, p.sweep_rate);
    p.pump_rate = s.quantity(r, "pump_rate", Dim::Rate, p.pump_rate);
    p.stimulation_gain = s.number(r, "stimulation_gain", p.stimulation_gain);
    p.t_extra = s.quantity(r, "t_extra", Dim::Time, p.t_extra);
    p.t_wait = s.quantity(r, "t_wait", Dim::Time, p.t_wait);
    if s.has("resonance_width") {
        p.resonance_width = s.opt_quantity(r, "resonance_width", Dim::Frequency);
    }
    p.raw_depth = s.number(r, "raw_depth", p.raw_depth);
    p.gate_width = s.quantity(r, "gate_width", Dim::Frequency, p.gate_width);
    p.grid_fraction = s.number(r, "grid_fraction", p.grid_fraction);
    p.grid_points = s.integer(r, "grid_points", p.grid_points as u64) as usize;
    p.dt = s.quantity(r, "dt", Dim::Time, p.dt);
}

fn read_line(r: &mut Reader, l: &mut LineSection) {
    let s = r.section(
        "line",
        &["fwhm", "depth", "background", "window", "grid_points"],
    );
    l.fwhm = s.quantity(r, "fwhm", Dim::Frequency, l.fwhm);
    l.depth = s.number(r, "depth", l.depth);
    l.background = s.number(r, "background", l.background);
    l.window = s.quantity(r, "window", Dim::Frequency, l.window);
    l.grid_points = s.integer(r, "grid_points", l.grid_points as u64) as usize;
}

fn read_comb(r: &mut Reader, c: &mut CombSection) {
    let s = r.section(
        "comb",
        &[
            "delta",
            "finesse",
            "depth",
            "background",
            "n_peaks",
            "offset",
            "shape",
            "window",
            "grid_points",
        ],
    );
    c.delta = s.quantity(r, "delta", Dim::Frequency, c.delta);
    c.finesse = s.number(r, "finesse", c.finesse);
    c.depth = s.number(r, "depth", c.depth);
    c.background = s.number(r, "background", c.background);
    c.n_peaks = s.integer(r, "n_peaks", c.n_peaks as u64) as usize;
    c.offset = s.quantity(r, "offset", Dim::Frequency, c.offset);
    if s.has("shape") {
        let name = s.string(r, "shape", "");
        match name.as_str() {
            "calibrated-gaussian" => c.shape = PeakShape::CalibratedGaussian,
            "gaussian" => c.shape = PeakShape::Gaussian,
            "lorentzian" => c.shape = PeakShape::Lorentzian,
            "square" => c.shape = PeakShape::Square,
            _ => r.error(
                "comb.shape",
                format!(
                    "unknown shape `{name}` (calibrated-gaussian, gaussian, lorentzian, square)"
                ),
            ),
        }
    }
    if s.has("window") {
        c.window = s.opt_quantity(r, "window", Dim::Frequency);
    }
    c.grid_points = s.integer(r, "grid_points", c.grid_points as u64) as usize;
}

fn read_stark(r: &mut Reader, st: &mut StarkSection) {
    let s = r.section("stark", &["voltage_ref", "factor_ref", "line_fwhm_ref"]);
    st.voltage_ref = s.quantity(r, "voltage_ref", Dim::Voltage, st.voltage_ref);
    st.factor_ref = s.number(r, "factor_ref", st.factor_ref);
    st.line_fwhm_ref = s.quantity(r, "line_fwhm_ref", Dim::Frequency, st.line_fwhm_ref);
}

fn read_pulse(r: &mut Reader, p: &mut PulseSection) {
    let s = r.section("pulse", &["center", "fwhm", "mean_photons", "carrier"]);
    p.center = s.quantity(r, "center", Dim::Time, p.center);
    p.fwhm = s.quantity(r, "fwhm", Dim::Time, p.fwhm);
    p.mean_photons = s.number(r, "mean_photons", p.mean_photons);
    p.carrier = s.quantity(r, "carrier", Dim::Frequency, p.carrier);
}

fn read_field(r: &mut Reader, f: &mut FieldSection) {
    let s = r.section("field", &["u1", "u2", "tau"]);
    f.u1 = s.quantity(r, "u1", Dim::Voltage, f.u1);
    f.u2 = s.quantity(r, "u2", Dim::Voltage, f.u2);
    f.tau = s.quantity(r, "tau", Dim::Time, f.tau);
}

fn read_time(r: &mut Reader, t: &mut TimeSection) {
    let s = r.section("time", &["step", "duration"]);
    if s.has("step") {
        t.step = s.opt_quantity(r, "step", Dim::Time);
    }
    if s.has("duration") {
        t.duration = s.opt_quantity(r, "duration", Dim::Time);
    }
}

fn read_detector(r: &mut Reader, d: &mut DetectorModel) {
    let s = r.section(
        "detector",
        &[
            "efficiency",
            "dark_rate",
            "path_transmission",
            "fluorescence_collection",
            "chopper_open",
        ],
    );
    d.efficiency = s.number(r, "efficiency", d.efficiency);
    d.dark_rate = s.quantity(r, "dark_rate", Dim::Rate, d.dark_rate);
    d.path_transmission = s.number(r, "path_transmission", d.path_transmission);
    d.fluorescence_collection = s.number(r, "fluorescence_collection", d.fluorescence_collection);
    d.chopper_open = s.boolean(r, "chopper_open", d.chopper_open);
}

fn read_counting(r: &mut Reader, c: &mut CountingSection) {
    let s = r.section("counting", &["n_trials", "bin_width"]);
    c.n_trials = s.integer(r, "n_trials", c.n_trials);
    c.bin_width = s.quantity(r, "bin_width", Dim::Time, c.bin_width);
}

fn read_noise_decay(r: &mut Reader, n: &mut NoiseDecaySection) {
    let s = r.section("noise_decay", &["gains", "span", "bin_width", "cycles"]);
    n.gains = s.numbers(r, "gains", &n.gains);
    n.span = s.quantity(r, "span", Dim::Time, n.span);
    n.bin_width = s.quantity(r, "bin_width", Dim::Time, n.bin_width);
    n.cycles = s.integer(r, "cycles", n.cycles);
}

fn read_snr(r: &mut Reader, n: &mut SnrSection) {
    let s = r.section("snr", &["mean_photons", "waits"]);
    n.mean_photons = s.numbers(r, "mean_photons", &n.mean_photons);
    n.waits = s.quantities(r, "waits", Dim::Time, &n.waits);
}

fn read_pulse_shape(r: &mut Reader, p: &mut PulseShapeSection) {
    let s = r.section("pulse_shape", &["u1", "u2", "alphas"]);
    p.u1 = s.quantities(r, "u1", Dim::Voltage, &p.u1);
    p.u2 = s.quantities(r, "u2", Dim::Voltage, &p.u2);
    if s.has("alphas") {
        p.alphas = Some(s.numbers(r, "alphas", &[]));
    }
}

fn read_fringe(r: &mut Reader, f: &mut FringeSection) {
    let s = r.section(
        "fringe",
        &[
            "visibility_1",
            "orders",
            "points",
            "span",
            "n_trials",
            "cycles",
            "slope_offsets",
        ],
    );
    f.visibility_1 = s.number(r, "visibility_1", f.visibility_1);
    let orders: Vec<u64> = f.orders.iter().map(|&o| o as u64).collect();
    f.orders = s
        .integers(r, "orders", &orders)
        .into_iter()
        .map(|o| o as u32)
        .collect();
    f.points = s.integer(r, "points", f.points as u64) as usize;
    f.span = s.number(r, "span", f.span);
    f.n_trials = s.integer(r, "n_trials", f.n_trials);
    f.cycles = s.integer(r, "cycles", f.cycles);
    f.slope_offsets = s.numbers(r, "slope_offsets", &f.slope_offsets);
}

fn read_gate(r: &mut Reader, g: &mut GateSection) {
    let s = r.section("gate", &["broadening", "half_width"]);
    g.broadening = s.quantity(r, "broadening", Dim::Frequency, g.broadening);
    if s.has("half_width") {
        g.half_width = s.opt_quantity(r, "half_width", Dim::Time);
    }
}

fn read_capacity(r: &mut Reader, c: &mut CapacitySection) {
    let s: Section = r.section(
        "capacity",
        &[
            "depths",
            "max_modes",
            "line_fwhm",
            "modes_per_peak",
            "n_peaks",
            "simulate_peaks",
        ],
    );
    c.depths = s.numbers(r, "depths", &c.depths);
    c.max_modes = s.integer(r, "max_modes", c.max_modes as u64) as usize;
    c.line_fwhm = s.quantity(r, "line_fwhm", Dim::Frequency, c.line_fwhm);
    c.modes_per_peak = s.number(r, "modes_per_peak", c.modes_per_peak);
    let to_u64 = |v: &[usize]| v.iter().map(|&x| x as u64).collect::<Vec<_>>();
    c.n_peaks = s
        .integers(r, "n_peaks", &to_u64(&c.n_peaks))
        .into_iter()
        .map(|x| x as usize)
        .collect();
    c.simulate_peaks = s
        .integers(r, "simulate_peaks", &to_u64(&c.simulate_peaks))
        .into_iter()
        .map(|x| x as usize)
        .collect();
}

fn positive(errors: &mut Vec<String>, path: &str, v: f64) {
    if !(v > 0.0) {
        errors.push(format!("{path}: must be positive, got {v}"));
    }
}

fn non_negative(errors: &mut Vec<String>, path: &str, v: f64) {
    if !(v >= 0.0) {
        errors.push(format!("{path}: must be >= 0, got {v}"));
    }
}

fn unit_interval(errors: &mut Vec<String>, path: &str, v: f64) {
    if !(0.0..=1.0).contains(&v) {
        errors.push(format!("{path}: must lie in [0, 1], got {v}"));
    }
}

/// Range checks on the sections the scenario uses.
fn check_ranges(c: &ScenarioConfig, e: &mut Vec<String>) {
    let uses = |s: &str| c.scenario.sections().contains(&s);
    if uses("material") {
        let m = &c.material;
        positive(e, "material.t1", m.t1);
        positive(e, "material.tz", m.tz);
        positive(e, "material.t_persistent", m.t_persistent);
        unit_interval(e, "material.branch_beta", m.branch_beta);
        if let Some(pf) = m.persistent_fraction {
            unit_interval(e, "material.persistent_fraction", pf);
        }
    }
    if uses("preparation") {
        let p = &c.preparation;
        non_negative(e, "preparation.duration", p.duration);
        positive(e, "preparation.sweep_span", p.sweep_span);
        positive(e, "preparation.sweep_rate", p.sweep_rate);
        non_negative(e, "preparation.pump_rate", p.pump_rate);
        if !(p.stimulation_gain >= 1.0) {
            e.push(format!(
                "preparation.stimulation_gain: must be >= 1, got {}",
                p.stimulation_gain
            ));
        }
        non_negative(e, "preparation.t_extra", p.t_extra);
        non_negative(e, "preparation.t_wait", p.t_wait);
        if let Some(w) = p.resonance_width {
            positive(e, "preparation.resonance_width", w);
        }
        positive(e, "preparation.raw_depth", p.raw_depth);
        positive(e, "preparation.gate_width", p.gate_width);
        if !(p.grid_fraction > 0.0 && p.grid_fraction <= 1.0) {
            e.push(format!(
                "preparation.grid_fraction: must lie in (0, 1], got {}",
                p.grid_fraction
            ));
        }
        if p.gate_width >= p.grid_fraction * p.sweep_span {
            e.push("preparation.gate_width: must be narrower than the spectral grid".into());
        }
        if p.grid_points < 16 {
            e.push("preparation.grid_points: need at least 16".into());
        }
        positive(e, "preparation.dt", p.dt);
    }
    if uses("line") {
        let l = &c.line;
        positive(e, "line.fwhm", l.fwhm);
        non_negative(e, "line.depth", l.depth);
        non_negative(e, "line.background", l.background);
        if !(l.window >= 6.0 * l.fwhm) {
            e.push(format!(
                "line.window: must be at least 6 line widths ({:e} Hz)",
                6.0 * l.fwhm
            ));
        }
        if l.grid_points < 16 {
            e.push("line.grid_points: need at least 16".into());
        }
    }
    if uses("comb") {
        let k = &c.comb;
        positive(e, "comb.delta", k.delta);
        if !(k.finesse > 1.0) {
            e.push(format!("comb.finesse: must exceed 1, got {}", k.finesse));
        }
        non_negative(e, "comb.depth", k.depth);
        non_negative(e, "comb.background", k.background);
        if k.n_peaks == 0 {
            e.push("comb.n_peaks: need at least one peak".into());
        }
        if let Some(w) = k.window {
            positive(e, "comb.window", w);
        }
        if k.grid_points < 16 {
            e.push("comb.grid_points: need at least 16".into());
        }
    }
    if uses("stark") {
        let s = &c.stark;
        positive(e, "stark.voltage_ref", s.voltage_ref);
        if !(s.factor_ref > 1.0) {
            e.push(format!(
                "stark.factor_ref: must exceed 1, got {}",
                s.factor_ref
            ));
        }
        positive(e, "stark.line_fwhm_ref", s.line_fwhm_ref);
    }
    if uses("pulse") {
        let p = &c.pulse;
        positive(e, "pulse.center", p.center);
        positive(e, "pulse.fwhm", p.fwhm);
        non_negative(e, "pulse.mean_photons", p.mean_photons);
    }
    if uses("field") {
        non_negative(e, "field.u1", c.field.u1);
        non_negative(e, "field.u2", c.field.u2);
        positive(e, "field.tau", c.field.tau);
    }
    if uses("time") {
        if let Some(s) = c.time.step {
            positive(e, "time.step", s);
        }
        if let Some(d) = c.time.duration {
            positive(e, "time.duration", d);
        }
    }
    if uses("detector") {
        let d = &c.detector;
        unit_interval(e, "detector.efficiency", d.efficiency);
        unit_interval(e, "detector.path_transmission", d.path_transmission);
        non_negative(e, "detector.dark_rate", d.dark_rate);
        non_negative(
            e,
            "detector.fluorescence_collection",
            d.fluorescence_collection,
        );
    }
    if uses("counting") {
        if c.counting.n_trials == 0 {
            e.push("counting.n_trials: need at least one trial".into());
        }
        positive(e, "counting.bin_width", c.counting.bin_width);
    }
    if uses("noise_decay") {
        let n = &c.noise_decay;
        if n.gains.is_empty() {
            e.push("noise_decay.gains: need at least one gain".into());
        }
        for g in &n.gains {
            if !(*g >= 1.0) {
                e.push(format!(
                    "noise_decay.gains: each gain must be >= 1, got {g}"
                ));
            }
        }
        positive(e, "noise_decay.span", n.span);
        positive(e, "noise_decay.bin_width", n.bin_width);
        if n.bin_width * 4.0 > n.span {
            e.push("noise_decay.bin_width: need at least four bins in the span".into());
        }
        if n.cycles == 0 {
            e.push("noise_decay.cycles: need at least one cycle".into());
        }
    }
    if uses("snr") {
        if c.snr.mean_photons.len() < 2 {
            e.push("snr.mean_photons: need at least two values for the linear fit".into());
        }
        for n in &c.snr.mean_photons {
            positive(e, "snr.mean_photons", *n);
        }
        if c.snr.waits.is_empty() {
            e.push("snr.waits: need at least one waiting time".into());
        }
        for w in &c.snr.waits {
            non_negative(e, "snr.waits", *w);
        }
    }
    if uses("pulse_shape") {
        let p = &c.pulse_shape;
        if p.u1.is_empty() {
            e.push("pulse_shape.u1: need at least one voltage".into());
        }
        match &p.alphas {
            Some(a) if a.is_empty() => e.push("pulse_shape.alphas: need at least one ratio".into()),
            Some(a) => a.iter().for_each(|x| positive(e, "pulse_shape.alphas", *x)),
            None if p.u2.is_empty() => e.push("pulse_shape.u2: need at least one voltage".into()),
            None => {}
        }
        for u in p.u1.iter().chain(&p.u2) {
            positive(e, "pulse_shape voltages", *u);
        }
    }
    if uses("fringe") {
        let f = &c.fringe;
        if !(f.visibility_1 > 0.0 && f.visibility_1 <= 1.0) {
            e.push(format!(
                "fringe.visibility_1: must lie in (0, 1], got {}",
                f.visibility_1
            ));
        }
        if f.orders.is_empty() || f.orders.contains(&0) {
            e.push("fringe.orders: need echo orders >= 1".into());
        }
        if f.points < 8 {
            e.push("fringe.points: need at least 8 scan points".into());
        }
        positive(e, "fringe.span", f.span);
        if f.cycles == 0 || f.n_trials < f.cycles {
            e.push("fringe.cycles: need 1 <= cycles <= n_trials".into());
        }
        if f.slope_offsets.len() < 2 {
            e.push("fringe.slope_offsets: need at least two offsets".into());
        }
    }
    if uses("gate") {
        positive(e, "gate.broadening", c.gate.broadening);
        if let Some(h) = c.gate.half_width {
            positive(e, "gate.half_width", h);
        }
    }
    if uses("capacity") {
        let k = &c.capacity;
        if k.depths.is_empty() {
            e.push("capacity.depths: need at least one depth".into());
        }
        k.depths
            .iter()
            .for_each(|d| positive(e, "capacity.depths", *d));
        if k.max_modes == 0 {
            e.push("capacity.max_modes: must be >= 1".into());
        }
        positive(e, "capacity.line_fwhm", k.line_fwhm);
        positive(e, "capacity.modes_per_peak", k.modes_per_peak);
        if k.n_peaks.contains(&0) || k.simulate_peaks.contains(&0) {
            e.push("capacity.n_peaks: comb sizes must be >= 1".into());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<String> {
        match validate_config(text) {
            Err(Error::Config(e)) => e,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = validate_config("scenario = \"afc-echo\"").unwrap();
        assert_eq!(c, ScenarioConfig::defaults(ScenarioKind::AfcEcho));
    }

    #[test]
    fn quantities_are_converted() {
        let c =
            validate_config("scenario = \"afc-echo\"\n[comb]\ndelta = \"3 MHz\"\nn_peaks = 9\n")
                .unwrap();
        assert_eq!(c.comb.delta, 3e6);
        assert_eq!(c.comb.n_peaks, 9);
    }

    #[test]
    fn missing_unit_is_rejected() {
        let e = errors("scenario = \"afc-echo\"\n[comb]\ndelta = 2.78e6\n");
        assert_eq!(e.len(), 1);
        assert!(e[0].starts_with("comb.delta: missing unit"), "{e:?}");
    }

    #[test]
    fn negative_lifetime_names_the_field() {
        let e = errors(
            "scenario = \"noise-decay\"\n[material]\nt1 = \"-11 ms\"\npersistent_fraction = 0.1\n",
        );
        assert!(e.iter().any(|m| m.starts_with("material.t1:")), "{e:?}");
    }

    #[test]
    fn all_violations_are_collected() {
        let e = errors(
            "scenario = \"afc-echo\"\nbogus = 1\n[comb]\ndelta = \"1 s\"\nfinesse = 0.5\ncolour = 3\n[fringe]\npoints = 3\n",
        );
        assert!(e.iter().any(|m| m.starts_with("bogus: unknown key")));
        assert!(e.iter().any(|m| m.starts_with("comb.delta:")));
        assert!(e.iter().any(|m| m.starts_with("comb.finesse:")));
        assert!(e.iter().any(|m| m.starts_with("comb.colour: unknown key")));
        assert!(e.iter().any(|m| m.starts_with("fringe: section not used")));
    }

    #[test]
    fn persistent_fraction_has_no_default() {
        let e = errors("scenario = \"snr-vs-wait\"");
        assert!(e
            .iter()
            .any(|m| m.starts_with("material.persistent_fraction: required")));
        let c =
            validate_config("scenario = \"snr-vs-wait\"\n[material]\npersistent_fraction = 0.2\n")
                .unwrap();
        assert_eq!(c.material.params().persistent_fraction, 0.2);
    }

    #[test]
    fn unknown_scenario_lists_choices() {
        let e = errors("scenario = \"nope\"");
        assert!(e[0].contains("afc-echo"));
    }

    #[test]
    fn names_round_trip() {
        for k in ScenarioKind::ALL {
            assert_eq!(ScenarioKind::parse(k.name()), Some(k));
        }
    }
}
