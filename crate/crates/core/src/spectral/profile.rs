use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{invalid, Error, Result};

/// Optical depth sampled on a uniform detuning grid, on top of a flat
/// absorbing background.
///
/// The grid is `start + i * step` for `i in 0..depth.len()`. `depth` holds the
/// tailored feature only; `background` is the absorbing floor d₀ that exists
/// everywhere in the window.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    start: f64,
    step: f64,
    depth: Vec<f64>,
    background: f64,
    floor: f64,
    low_contrast: bool,
    feature_width: Option<f64>,
}

impl SpectralProfile {
    pub fn new(start: f64, step: f64, depth: Vec<f64>, background: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(invalid(
                "step",
                format!("grid step must be positive, got {step}"),
            ));
        }
        if depth.len() < 2 {
            return Err(invalid("depth", "profile needs at least two grid points"));
        }
        if let Some(bad) = depth.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
            return Err(invalid(
                "depth",
                format!("optical depth must be finite and >= 0, got {bad}"),
            ));
        }
        if !(background >= 0.0) || !background.is_finite() {
            return Err(invalid(
                "background",
                format!("background must be >= 0, got {background}"),
            ));
        }
        Ok(Self {
            start,
            step,
            depth,
            background,
            floor: 0.0,
            low_contrast: false,
            feature_width: None,
        })
    }

    /// A flat profile with no feature.
    pub fn flat(start: f64, step: f64, points: usize, background: f64) -> Result<Self> {
        Self::new(start, step, vec![0.0; points], background)
    }

    pub(crate) fn with_comb_flags(mut self, floor: f64, low_contrast: bool) -> Self {
        self.floor = floor;
        self.low_contrast = low_contrast;
        self
    }

    pub(crate) fn with_feature_width(mut self, width: Option<f64>) -> Self {
        self.feature_width = width;
        self
    }

    /// Narrowest spectral structure of the feature (FWHM, Hz), when known from
    /// construction.
    pub fn feature_width(&self) -> Option<f64> {
        self.feature_width
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn end(&self) -> f64 {
        self.detuning(self.len() - 1)
    }

    pub fn window_width(&self) -> f64 {
        self.step * (self.len() - 1) as f64
    }

    pub fn detuning(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.detuning(i)).collect()
    }

    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    /// Inter-peak floor raised by overlapping comb peaks (zero for single lines).
    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Background plus the comb's inter-peak floor.
    pub fn effective_background(&self) -> f64 {
        self.background + self.floor
    }

    /// Set when comb peaks overlap so much that (max-min)/max < 0.5.
    pub fn low_contrast(&self) -> bool {
        self.low_contrast
    }

    pub fn max_depth(&self) -> f64 {
        self.depth.iter().copied().fold(0.0, f64::max)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, d) in self.depth.iter().enumerate() {
            if *d > self.depth[best] {
                best = i;
            }
        }
        best
    }

    /// Trapezoid integral of the feature depth over the grid, in Hz.
    pub fn area(&self) -> f64 {
        trapezoid(&self.depth, self.step)
    }

    /// First moment of the normalized feature, in Hz.
    pub fn mean_detuning(&self) -> f64 {
        let weighted: Vec<f64> = self
            .depth
            .iter()
            .enumerate()
            .map(|(i, d)| d * self.detuning(i))
            .collect();
        trapezoid(&weighted, self.step) / self.area()
    }

    /// Standard deviation of the normalized feature, in Hz.
    pub fn std_detuning(&self) -> f64 {
        let mean = self.mean_detuning();
        let weighted: Vec<f64> = self
            .depth
            .iter()
            .enumerate()
            .map(|(i, d)| d * (self.detuning(i) - mean).powi(2))
            .collect();
        (trapezoid(&weighted, self.step) / self.area()).sqrt()
    }

    /// Feature depth averaged with weight `weight(δ)` over the grid.
    pub fn weighted_mean_depth(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, d) in self.depth.iter().enumerate() {
            let w = weight(self.detuning(i));
            num += w * d;
            den += w;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// Linear interpolation of the feature depth; zero outside the window.
    pub fn depth_at(&self, detuning: f64) -> f64 {
        let x = (detuning - self.start) / self.step;
        if x < 0.0 || x > (self.len() - 1) as f64 {
            return 0.0;
        }
        let i = (x.floor() as usize).min(self.len() - 2);
        let frac = x - i as f64;
        self.depth[i] * (1.0 - frac) + self.depth[i + 1] * frac
    }

    /// Moves the feature minimum into the background so the feature starts at
    /// zero depth.
    pub fn split_floor(&self) -> SpectralProfile {
        let min = self.depth.iter().copied().fold(f64::INFINITY, f64::min);
        SpectralProfile {
            depth: self.depth.iter().map(|d| (d - min).max(0.0)).collect(),
            background: self.background + min,
            floor: (self.floor - min).max(0.0),
            ..self.clone()
        }
    }

    pub fn with_background(&self, background: f64) -> Result<SpectralProfile> {
        Self::new(self.start, self.step, self.depth.clone(), background)
    }

    pub fn map_depth(&self, f: impl Fn(usize, f64) -> f64) -> Result<SpectralProfile> {
        let depth = self
            .depth
            .iter()
            .enumerate()
            .map(|(i, d)| f(i, *d))
            .collect();
        Self::new(self.start, self.step, depth, self.background)
    }

    pub fn same_grid(&self, other: &SpectralProfile) -> bool {
        self.len() == other.len()
            && (self.start - other.start).abs() <= 1e-9 * self.step
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }

    /// Writes `# background=<d0>` followed by `detuning_hz,optical_depth` rows
    /// with 17 significant digits. The exact grid origin and step go into two
    /// further comment lines so a read-back grid is bit-identical.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::with_capacity(self.len() * 48);
        writeln!(buf, "# background={:.16e}", self.background).ok();
        writeln!(buf, "# grid_start={:.16e}", self.start).ok();
        writeln!(buf, "# grid_step={:.16e}", self.step).ok();
        writeln!(buf, "detuning_hz,optical_depth").ok();
        for (i, d) in self.depth.iter().enumerate() {
            writeln!(buf, "{:.16e},{:.16e}", self.detuning(i), d).ok();
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut background = None;
        let mut grid_start = None;
        let mut grid_step = None;
        let mut grid = Vec::new();
        let mut depth = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("background=") {
                    background = Some(parse_f64(v, lineno)?);
                } else if let Some(v) = rest.strip_prefix("grid_start=") {
                    grid_start = Some(parse_f64(v, lineno)?);
                } else if let Some(v) = rest.strip_prefix("grid_step=") {
                    grid_step = Some(parse_f64(v, lineno)?);
                }
                continue;
            }
            if line.starts_with("detuning_hz") {
                continue;
            }
            let mut cols = line.split(',');
            let (Some(x), Some(y), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Parse(format!(
                    "line {}: expected two columns",
                    lineno + 1
                )));
            };
            grid.push(parse_f64(x, lineno)?);
            depth.push(parse_f64(y, lineno)?);
        }
        let background =
            background.ok_or_else(|| Error::Parse("missing `# background=` header".into()))?;
        if grid.len() < 2 {
            return Err(Error::Parse("profile needs at least two rows".into()));
        }
        let (start, step) = match (grid_start, grid_step) {
            (Some(a), Some(h)) => (a, h),
            _ => (
                grid[0],
                (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64,
            ),
        };
        for (i, x) in grid.iter().enumerate() {
            if (x - (start + i as f64 * step)).abs() > 1e-6 * step {
                return Err(Error::Parse(format!(
                    "grid is not uniform at row {}",
                    i + 1
                )));
            }
        }
        Self::new(start, step, depth, background)
    }
}

fn parse_f64(s: &str, lineno: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
}

/// Trapezoid rule on a uniform grid.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            step * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_depth() {
        assert!(SpectralProfile::new(0.0, 1.0, vec![0.0, -1.0], 0.0).is_err());
        assert!(SpectralProfile::new(0.0, 1.0, vec![0.0, 1.0], -0.1).is_err());
        assert!(SpectralProfile::new(0.0, 0.0, vec![0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn trapezoid_of_triangle() {
        assert_eq!(trapezoid(&[0.0, 1.0, 0.0], 2.0), 2.0);
    }

    #[test]
    fn split_floor_moves_minimum_into_background() {
        let p = SpectralProfile::new(0.0, 1.0, vec![0.5, 2.0, 0.5], 1.0).unwrap();
        let s = p.split_floor();
        assert_eq!(s.depth(), &[0.0, 1.5, 0.0]);
        assert_eq!(s.background(), 1.5);
    }

    #[test]
    fn csv_missing_header_is_rejected() {
        let text = "detuning_hz,optical_depth\n0,1\n1,2\n";
        assert!(SpectralProfile::read_csv(text.as_bytes()).is_err());
    }
}
