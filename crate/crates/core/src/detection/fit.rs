use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fringe `c₀·(1 + V·cos(2πx/P + φ₀))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    #[serde(rename = "V")]
    pub visibility: f64,
    #[serde(rename = "V_err")]
    pub visibility_err: f64,
    #[serde(rename = "P")]
    pub period: f64,
    #[serde(rename = "P_err")]
    pub period_err: f64,
    #[serde(rename = "phi0")]
    pub phase_offset: f64,
    #[serde(rename = "phi0_err")]
    pub phase_err: f64,
    /// Mean level c₀.
    pub offset: f64,
}

fn model(p: &Vector4<f64>, x: f64) -> f64 {
    p[0] * (1.0 + p[1] * (2.0 * PI * x / p[2] + p[3]).cos())
}

fn gradient(p: &Vector4<f64>, x: f64) -> Vector4<f64> {
    let arg = 2.0 * PI * x / p[2] + p[3];
    let (s, c) = arg.sin_cos();
    Vector4::new(
        1.0 + p[1] * c,
        p[0] * c,
        p[0] * p[1] * s * 2.0 * PI * x / (p[2] * p[2]),
        -p[0] * p[1] * s,
    )
}

/// Weighted linear fit of `a + b cos(kx) + c sin(kx)` at fixed period.
fn linear_stage(xs: &[f64], ys: &[f64], ws: &[f64], period: f64) -> Option<(f64, Vector4<f64>)> {
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut aty = nalgebra::Vector3::<f64>::zeros();
    for ((x, y), w) in xs.iter().zip(ys).zip(ws) {
        let (s, c) = (2.0 * PI * x / period).sin_cos();
        let row = nalgebra::Vector3::new(1.0, c, s);
        ata += row * row.transpose() * *w;
        aty += row * (w * y);
    }
    let coef = ata.lu().solve(&aty)?;
    let chi2: f64 = xs
        .iter()
        .zip(ys)
        .zip(ws)
        .map(|((x, y), w)| {
            let (s, c) = (2.0 * PI * x / period).sin_cos();
            let r = y - coef[0] - coef[1] * c - coef[2] * s;
            w * r * r
        })
        .sum();
    let amp = coef[1].hypot(coef[2]);
    let phi = (-coef[2]).atan2(coef[1]);
    Some((chi2, Vector4::new(coef[0], amp / coef[0], period, phi)))
}

/// Fits a sinusoidal fringe to `(x, counts)` points.
///
/// Points are weighted by their Poisson variance. The period is first
/// located by a scan of linear fits and then refined together with the other
/// parameters by Levenberg–Marquardt. Standard errors come from the inverse
/// of the weighted normal matrix.
pub fn fit_fringe(points: &[(f64, f64)]) -> Result<FringeFit> {
    fit_fringe_near(points, None)
}

/// As [`fit_fringe`], with the period search centred on `period_hint`.
pub fn fit_fringe_near(points: &[(f64, f64)], period_hint: Option<f64>) -> Result<FringeFit> {
    if points.len() < 6 {
        return Err(Error::DegenerateFit(format!(
            "need at least 6 points, got {}",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) {
        return Err(Error::DegenerateFit(
            "all scan points share one abscissa".into(),
        ));
    }
    if ys.iter().all(|y| *y <= 0.0) {
        return Err(Error::DegenerateFit("no counts".into()));
    }
    let ws: Vec<f64> = ys.iter().map(|y| 1.0 / y.max(1.0)).collect();

    let (p_min, p_max) = match period_hint {
        Some(p) => (0.5 * p, 2.0 * p),
        None => (2.0 * span / points.len() as f64, 2.0 * span),
    };
    let trials = 400;
    let mut best: Option<(f64, Vector4<f64>)> = None;
    for k in 0..=trials {
        let period = p_min * (p_max / p_min).powf(k as f64 / trials as f64);
        if let Some(candidate) = linear_stage(&xs, &ys, &ws, period) {
            if best.is_none_or(|b| candidate.0 < b.0) {
                best = Some(candidate);
            }
        }
    }
    let (_, mut p) = best.ok_or_else(|| Error::DegenerateFit("singular design matrix".into()))?;

    let chi2 = |p: &Vector4<f64>| -> f64 {
        xs.iter()
            .zip(&ys)
            .zip(&ws)
            .map(|((x, y), w)| {
                let r = y - model(p, *x);
                w * r * r
            })
            .sum()
    };
    let normal = |p: &Vector4<f64>| -> (Matrix4<f64>, Vector4<f64>) {
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for ((x, y), w) in xs.iter().zip(&ys).zip(&ws) {
            let g = gradient(p, *x);
            jtj += g * g.transpose() * *w;
            jtr += g * (w * (y - model(p, *x)));
        }
        (jtj, jtr)
    };
    let mut lambda = 1e-3;
    let mut current = chi2(&p);
    for _ in 0..200 {
        let (jtj, jtr) = normal(&p);
        let mut damped = jtj;
        for i in 0..4 {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
        }
        let Some(step) = damped.lu().solve(&jtr) else {
            break;
        };
        let trial = p + step;
        let next = chi2(&trial);
        if next.is_finite() && next <= current {
            let converged = (current - next) <= 1e-15 * current.max(1e-300);
            p = trial;
            current = next;
            lambda = (lambda * 0.3).max(1e-12);
            if converged {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    if p[1] < 0.0 {
        p[1] = -p[1];
        p[3] += PI;
    }
    let (jtj, _) = normal(&p);
    let cov = jtj
        .try_inverse()
        .ok_or_else(|| Error::DegenerateFit("singular covariance".into()))?;
    let err = |i: usize| cov[(i, i)].max(0.0).sqrt();
    Ok(FringeFit {
        visibility: p[1].clamp(0.0, 1.0),
        visibility_err: err(1),
        period: p[2],
        period_err: err(2),
        phase_offset: crate::echo::wrap_phase(p[3]),
        phase_err: err(3),
        offset: p[0],
    })
}

/// Ordinary least-squares line with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::DegenerateFit(
            "need at least two paired points".into(),
        ));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all abscissae equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        r2,
    })
}

/// Exponential decay `A·e^{-t/τ} + c` with known constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub amplitude: f64,
    pub lifetime: f64,
    pub lifetime_err: f64,
}

/// Fits a lifetime to counts after removing a known constant floor, by
/// weighted linear regression of `ln(y - c)` with Poisson weights.
pub fn fit_exponential_decay(ts: &[f64], ys: &[f64], floor: f64) -> Result<DecayFit> {
    let pts: Vec<(f64, f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y - floor > 0.0)
        .map(|(t, y)| {
            let s = *y - floor;
            // var(ln s) ≈ var(y)/s² with var(y) ≈ y
            (*t, s.ln(), s * s / y.max(1.0))
        })
        .collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateFit(
            "fewer than three points above the floor".into(),
        ));
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all times equal".into()));
    }
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    if slope >= 0.0 {
        return Err(Error::DegenerateFit("signal does not decay".into()));
    }
    let slope_err = (1.0 / sxx).sqrt();
    let lifetime = -1.0 / slope;
    Ok(DecayFit {
        amplitude: (my - slope * mx).exp(),
        lifetime,
        lifetime_err: lifetime * slope_err / slope.abs(),
    })
}
