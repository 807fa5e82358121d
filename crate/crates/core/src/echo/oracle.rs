use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::schedule::FieldSchedule;
use crate::error::{Error, Result};
use crate::spectral::AtomEnsemble;

/// Brute-force collective dipole `s(t) = (1/W) Σ_j w_j e^{-i φ_j(t)}`.
///
/// Each atom accumulates `φ_j(t) = 2π(δ_j t + x_j S(t))`, where `x_j` is its
/// Stark coordinate and `S` the cumulative signed Stark width of the
/// schedule; background atoms see no Stark shift. The sum over atoms runs in
/// a fixed order for every time point.
pub fn dipole_sum_oracle(
    ensemble: &AtomEnsemble,
    schedule: &FieldSchedule,
    times: &[f64],
) -> Result<Vec<Complex64>> {
    if ensemble.is_empty() {
        return Err(Error::Undefined("dipole sum of an empty ensemble".into()));
    }
    let norm = 1.0 / ensemble.total_weight;
    Ok(times
        .par_iter()
        .map(|&t| {
            let s = schedule.cumulative(t);
            let mut acc = Complex64::new(0.0, 0.0);
            for a in &ensemble.atoms {
                let stark = if a.background { 0.0 } else { a.stark_coord * s };
                let phi = 2.0 * PI * (a.detuning * t + stark);
                let (sin, cos) = phi.sin_cos();
                acc += Complex64::new(a.weight * cos, -a.weight * sin);
            }
            acc * norm
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::StarkCalibration;

    fn off() -> FieldSchedule {
        FieldSchedule::off(StarkCalibration::new(70.0, 3.0, 1e6).unwrap())
    }

    #[test]
    fn single_resonant_atom_stays_in_phase() {
        let e = AtomEnsemble::from_detunings(&[0.0]);
        let s = dipole_sum_oracle(&e, &off(), &[0.0, 1e-6, 1.0]).unwrap();
        assert!(s.iter().all(|v| (v.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn two_atoms_beat() {
        let d = 1.3e6;
        let e = AtomEnsemble::from_detunings(&[-d, d]);
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 37e-9).collect();
        let s = dipole_sum_oracle(&e, &off(), &times).unwrap();
        for (t, v) in times.iter().zip(&s) {
            assert!((v.norm() - (2.0 * PI * d * t).cos().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_ensemble_is_rejected() {
        let e = AtomEnsemble::from_detunings(&[]);
        assert!(dipole_sum_oracle(&e, &off(), &[0.0]).is_err());
    }
}
