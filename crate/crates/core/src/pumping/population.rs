use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralProfile;

/// Level populations of one frequency class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    /// Initial ground Zeeman level.
    pub g1: f64,
    /// Other ground Zeeman level.
    pub g2: f64,
    /// Excited state.
    pub e: f64,
    /// Persistent reservoir.
    pub p: f64,
}

impl Populations {
    pub const UNPUMPED: Populations = Populations {
        g1: 1.0,
        g2: 0.0,
        e: 0.0,
        p: 0.0,
    };

    pub fn total(&self) -> f64 {
        self.g1 + self.g2 + self.e + self.p
    }

    pub(crate) fn to_array(self) -> [f64; 4] {
        [self.g1, self.g2, self.e, self.p]
    }

    pub(crate) fn from_array(v: [f64; 4]) -> Self {
        Self {
            g1: v[0],
            g2: v[1],
            e: v[2],
            p: v[3],
        }
    }
}

/// Populations per frequency class on a uniform detuning grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationField {
    pub start: f64,
    pub step: f64,
    pub classes: Vec<Populations>,
}

impl PopulationField {
    /// Every class in the initial ground level, on the grid of `profile`.
    pub fn unpumped(profile: &SpectralProfile) -> Self {
        Self {
            start: profile.start(),
            step: profile.step(),
            classes: vec![Populations::UNPUMPED; profile.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn detuning(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn matches(&self, profile: &SpectralProfile) -> bool {
        self.len() == profile.len()
            && (self.start - profile.start()).abs() <= 1e-9 * self.step
            && (self.step - profile.step()).abs() <= 1e-12 * self.step
    }

    /// Σ e over classes.
    pub fn excited_total(&self) -> f64 {
        self.classes.iter().map(|c| c.e).sum()
    }

    /// Largest |g1+g2+e+p - 1| over classes.
    pub fn conservation_error(&self) -> f64 {
        self.classes
            .iter()
            .map(|c| (c.total() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled_excited(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.classes {
            let moved = c.e * (factor - 1.0);
            c.e += moved;
            c.g1 -= moved;
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::with_capacity(self.len() * 100);
        writeln!(buf, "detuning_hz,g1,g2,e,p").ok();
        for (i, c) in self.classes.iter().enumerate() {
            writeln!(
                buf,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.detuning(i),
                c.g1,
                c.g2,
                c.e,
                c.p
            )
            .ok();
        }
        out.write_all(buf.as_bytes()).map_err(Error::from)
    }
}
