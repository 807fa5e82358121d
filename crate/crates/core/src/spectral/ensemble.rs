use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::profile::SpectralProfile;
use crate::error::{invalid, Error, Result};

/// Carrier wavenumber at 1536 nm, rad/m.
pub const DEFAULT_WAVENUMBER: f64 = 2.0 * std::f64::consts::PI / 1536e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Detuning δ from the carrier, Hz.
    pub detuning: f64,
    /// Position z along the propagation axis, m.
    pub position: f64,
    /// Standard-normal Stark coordinate: the atom shifts by `x·σ_S(u)` under
    /// voltage `u`.
    pub stark_coord: f64,
    pub weight: f64,
    /// Drawn from the flat background rather than the tailored feature.
    pub background: bool,
}

/// Discrete dipoles sampled from a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomEnsemble {
    pub atoms: Vec<Atom>,
    pub total_weight: f64,
    pub seed: u64,
    pub length: f64,
    pub wavenumber: f64,
}

impl AtomEnsemble {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn detunings(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.detuning)
    }

    /// Builds an ensemble from explicit atoms (unit Stark coordinate, z = 0).
    pub fn from_detunings(detunings: &[f64]) -> Self {
        let atoms: Vec<Atom> = detunings
            .iter()
            .map(|d| Atom {
                detuning: *d,
                position: 0.0,
                stark_coord: 0.0,
                weight: 1.0,
                background: false,
            })
            .collect();
        Self {
            total_weight: atoms.len() as f64,
            atoms,
            seed: 0,
            length: 0.0,
            wavenumber: DEFAULT_WAVENUMBER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SampleOptions {
    /// Also draw atoms from the flat background in proportion to its area.
    pub include_background: bool,
}

/// Draws `n_atoms` atoms from the normalized feature by inverse-CDF sampling.
pub fn sample_ensemble(
    profile: &SpectralProfile,
    n_atoms: usize,
    length: f64,
    seed: u64,
) -> Result<AtomEnsemble> {
    sample_ensemble_with(profile, n_atoms, length, seed, SampleOptions::default())
}

pub fn sample_ensemble_with(
    profile: &SpectralProfile,
    n_atoms: usize,
    length: f64,
    seed: u64,
    options: SampleOptions,
) -> Result<AtomEnsemble> {
    if n_atoms == 0 {
        return Err(invalid("n_atoms", "need at least one atom"));
    }
    if !(length >= 0.0) {
        return Err(invalid("length", "sample length must be >= 0"));
    }
    let cdf = CellCdf::new(profile);
    let feature_area = cdf.total;
    let background_area = if options.include_background {
        profile.background() * profile.window_width()
    } else {
        0.0
    };
    if !(feature_area + background_area > 0.0) {
        return Err(Error::ZeroArea);
    }
    let background_share = background_area / (feature_area + background_area);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = (0..n_atoms)
        .map(|_| {
            let from_background = background_share > 0.0 && rng.random::<f64>() < background_share;
            let detuning = if from_background {
                profile.start() + rng.random::<f64>() * profile.window_width()
            } else {
                cdf.invert(rng.random::<f64>())
            };
            Atom {
                detuning,
                position: rng.random::<f64>() * length,
                stark_coord: rng.sample(StandardNormal),
                weight: 1.0,
                background: from_background,
            }
        })
        .collect();
    Ok(AtomEnsemble {
        atoms,
        total_weight: n_atoms as f64,
        seed,
        length,
        wavenumber: DEFAULT_WAVENUMBER,
    })
}

/// Cumulative trapezoid areas of a piecewise-linear density.
struct CellCdf<'a> {
    profile: &'a SpectralProfile,
    cumulative: Vec<f64>,
    total: f64,
}

impl<'a> CellCdf<'a> {
    fn new(profile: &'a SpectralProfile) -> Self {
        let d = profile.depth();
        let h = profile.step();
        let mut cumulative = Vec::with_capacity(d.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in d.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cumulative.push(acc);
        }
        Self {
            profile,
            cumulative,
            total: acc,
        }
    }

    fn invert(&self, u: f64) -> f64 {
        let target = u * self.total;
        let cell = match self.cumulative.binary_search_by(|c| c.total_cmp(&target)) {
            Ok(i) => i.min(self.cumulative.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.cumulative.len() - 2),
        };
        let d = self.profile.depth();
        let h = self.profile.step();
        let (y0, y1) = (d[cell], d[cell + 1]);
        let r = target - self.cumulative[cell];
        // solve y0·x + (y1 - y0)·x²/(2h) = r for x in [0, h]
        let slope = (y1 - y0) / h;
        let x = if slope.abs() < 1e-300 || (slope * r).abs() < 1e-14 * y0 * y0 {
            if y0 > 0.0 {
                r / y0
            } else {
                0.5 * h
            }
        } else {
            let disc = (y0 * y0 + 2.0 * slope * r).max(0.0);
            2.0 * r / (y0 + disc.sqrt())
        };
        self.profile.detuning(cell) + x.clamp(0.0, h)
    }
}
