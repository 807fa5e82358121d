use serde::{Deserialize, Serialize};

use super::evolve::relax;
use super::params::MaterialParams;
use super::population::PopulationField;
use crate::error::{Error, Result};
use crate::spectral::SpectralProfile;

/// Absorption left after pumping: `depth(δ) = raw(δ)·g1(δ)`.
///
/// The flat background is not resonant with the pumped classes and is kept.
pub fn realized_profile(field: &PopulationField, raw: &SpectralProfile) -> Result<SpectralProfile> {
    if !field.matches(raw) {
        return Err(Error::GridMismatch(format!(
            "population grid ({} points from {:e} Hz) differs from profile grid ({} points from {:e} Hz)",
            field.len(),
            field.start,
            raw.len(),
            raw.start()
        )));
    }
    raw.map_depth(|i, d| d * field.classes[i].g1.clamp(0.0, 1.0))
}

/// Spontaneous emission rate `t` seconds after the stimulation laser is
/// switched off, summed over classes.
pub fn fluorescence_rate(field: &PopulationField, mat: &MaterialParams, t: f64) -> f64 {
    field.excited_total() * (-t / mat.t1).exp() / mat.t1
}

/// Realized profile after `t_wait` of free relaxation.
///
/// `raw` is the unpumped profile and `field` the populations at the start of
/// the wait; population parked in the second Zeeman level returns with T_Z,
/// the persistent reservoir with its own lifetime.
pub fn decay_profile(
    raw: &SpectralProfile,
    field: &PopulationField,
    mat: &MaterialParams,
    t_wait: f64,
) -> Result<SpectralProfile> {
    realized_profile(&relax(field, mat, t_wait), raw)
}

/// Scalar outcome of a preparation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreparationSummary {
    /// Σ e over classes.
    pub residual_excited_total: f64,
    /// `1 - min g1`: depth of the burned pit relative to the raw line.
    pub pit_depth: f64,
    /// `(max g1 - min g1) / max g1` over the grid.
    pub peak_contrast: f64,
}

impl PreparationSummary {
    pub fn from_field(field: &PopulationField) -> Self {
        let min = field
            .classes
            .iter()
            .map(|c| c.g1)
            .fold(f64::INFINITY, f64::min);
        let max = field
            .classes
            .iter()
            .map(|c| c.g1)
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            residual_excited_total: field.excited_total(),
            pit_depth: 1.0 - min,
            peak_contrast: if max > 0.0 { (max - min) / max } else { 0.0 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pumping::population::Populations;

    fn raw() -> SpectralProfile {
        SpectralProfile::new(-2.0, 1.0, vec![1.0; 5], 0.1).unwrap()
    }

    fn field_with(c: Populations) -> PopulationField {
        PopulationField {
            start: -2.0,
            step: 1.0,
            classes: vec![c; 5],
        }
    }

    #[test]
    fn unpumped_field_is_identity() {
        let r = raw();
        let f = PopulationField::unpumped(&r);
        assert_eq!(realized_profile(&f, &r).unwrap(), r);
    }

    #[test]
    fn perfect_pumping_leaves_only_the_gate() {
        let r = raw();
        let mut f = PopulationField::unpumped(&r);
        for (i, c) in f.classes.iter_mut().enumerate() {
            if i != 2 {
                *c = Populations {
                    g1: 0.0,
                    g2: 1.0,
                    e: 0.0,
                    p: 0.0,
                };
            }
        }
        let out = realized_profile(&f, &r).unwrap();
        assert_eq!(out.depth(), &[0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let r = raw();
        let f = PopulationField {
            start: 0.0,
            step: 1.0,
            classes: vec![Populations::UNPUMPED; 5],
        };
        assert!(matches!(
            realized_profile(&f, &r),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn fluorescence_is_linear_and_decays_with_t1() {
        let mat = MaterialParams::erbium(0.0);
        let f = field_with(Populations {
            g1: 0.9,
            g2: 0.0,
            e: 0.1,
            p: 0.0,
        });
        let g = f.scaled_excited(2.0);
        for t in [0.0, 5e-3, 20e-3] {
            assert!(
                (fluorescence_rate(&g, &mat, t) - 2.0 * fluorescence_rate(&f, &mat, t)).abs()
                    < 1e-9
            );
        }
        let ratio = fluorescence_rate(&f, &mat, 11e-3) / fluorescence_rate(&f, &mat, 0.0);
        assert!((ratio - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(
            fluorescence_rate(&field_with(Populations::UNPUMPED), &mat, 0.0),
            0.0
        );
    }

    #[test]
    fn decay_profile_single_and_double_exponential() {
        let r = raw();
        let zeeman = field_with(Populations {
            g1: 0.0,
            g2: 1.0,
            e: 0.0,
            p: 0.0,
        });
        let mat = MaterialParams::erbium(0.0);
        let out = decay_profile(&r, &zeeman, &mat, 0.0).unwrap();
        assert!(out.depth().iter().all(|d| d.abs() < 1e-15));
        let out = decay_profile(&r, &zeeman, &mat, mat.tz).unwrap();
        assert!((1.0 - out.depth()[0] - (-1.0f64).exp()).abs() < 1e-12);

        let mixed = field_with(Populations {
            g1: 0.0,
            g2: 0.7,
            e: 0.0,
            p: 0.3,
        });
        let out = decay_profile(&r, &mixed, &mat, 10.0 * mat.tz).unwrap();
        let residual = 1.0 - out.depth()[0];
        let expected = 0.7 * (-10.0f64).exp() + 0.3 * (-1.3f64 / 900.0).exp();
        assert!((residual - expected).abs() < 1e-12);
        assert!((residual - 0.3).abs() < 1e-3);
    }

    #[test]
    fn summary_fields() {
        let mut f = field_with(Populations::UNPUMPED);
        f.classes[1] = Populations {
            g1: 0.25,
            g2: 0.7,
            e: 0.05,
            p: 0.0,
        };
        let s = PreparationSummary::from_field(&f);
        assert!((s.pit_depth - 0.75).abs() < 1e-15);
        assert!((s.peak_contrast - 0.75).abs() < 1e-15);
        assert!((s.residual_excited_total - 0.05).abs() < 1e-15);
    }
}
