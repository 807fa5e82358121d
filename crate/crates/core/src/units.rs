//! Unit-suffixed quantities used in scenario files, e.g. `"2.78 MHz"`.

use std::fmt;

use crate::error::{Error, Result};

/// Physical dimension of a configuration quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    Frequency,
    Time,
    Voltage,
    /// Events per second (`1/s`, `s^-1`, `/s`).
    Rate,
    /// Frequency per time (`Hz/s`, `MHz/ms`, ...).
    SweepRate,
    Angle,
    Length,
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dim::Frequency => "frequency (Hz, kHz, MHz, GHz)",
            Dim::Time => "time (s, ms, us, ns, ps)",
            Dim::Voltage => "voltage (V, mV, kV)",
            Dim::Rate => "rate (1/s)",
            Dim::SweepRate => "sweep rate (Hz/s, kHz/s, MHz/s, MHz/ms, ...)",
            Dim::Angle => "angle (rad, mrad, deg)",
            Dim::Length => "length (m, mm, um)",
        };
        f.write_str(s)
    }
}

fn frequency_scale(unit: &str) -> Option<f64> {
    Some(match unit {
        "Hz" => 1.0,
        "kHz" => 1e3,
        "MHz" => 1e6,
        "GHz" => 1e9,
        _ => return None,
    })
}

fn time_scale(unit: &str) -> Option<f64> {
    Some(match unit {
        "s" => 1.0,
        "ms" => 1e-3,
        "us" | "µs" | "μs" => 1e-6,
        "ns" => 1e-9,
        "ps" => 1e-12,
        "min" => 60.0,
        _ => return None,
    })
}

fn scale(dim: Dim, unit: &str) -> Option<f64> {
    match dim {
        Dim::Frequency => frequency_scale(unit),
        Dim::Time => time_scale(unit),
        Dim::Voltage => Some(match unit {
            "V" => 1.0,
            "mV" => 1e-3,
            "kV" => 1e3,
            _ => return None,
        }),
        Dim::Rate => match unit {
            "1/s" | "s^-1" | "/s" => Some(1.0),
            "1/ms" | "ms^-1" | "/ms" => Some(1e3),
            "1/us" | "us^-1" | "/us" => Some(1e6),
            _ => None,
        },
        Dim::SweepRate => {
            let (f, t) = unit.split_once('/')?;
            Some(frequency_scale(f)? / time_scale(t)?)
        }
        Dim::Angle => Some(match unit {
            "rad" => 1.0,
            "mrad" => 1e-3,
            "deg" => std::f64::consts::PI / 180.0,
            _ => return None,
        }),
        Dim::Length => Some(match unit {
            "m" => 1.0,
            "mm" => 1e-3,
            "um" | "µm" => 1e-6,
            "nm" => 1e-9,
            _ => return None,
        }),
    }
}

/// Parses `"<number> <unit>"` into SI units of `dim`. The unit is mandatory.
pub fn parse_quantity(text: &str, dim: Dim) -> Result<f64> {
    let text = text.trim();
    let split = text
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let unit = unit.trim();
    if unit.is_empty() {
        return Err(Error::Parse(format!(
            "`{text}` has no unit; expected {dim}"
        )));
    }
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("`{text}`: cannot parse number `{num}`")))?;
    let factor = scale(dim, unit)
        .ok_or_else(|| Error::Parse(format!("`{text}`: unit `{unit}` is not a {dim}")))?;
    Ok(value * factor)
}

/// Formats an SI value with its base unit, for echoing configs back.
pub fn format_quantity(value: f64, dim: Dim) -> String {
    let unit = match dim {
        Dim::Frequency => "Hz",
        Dim::Time => "s",
        Dim::Voltage => "V",
        Dim::Rate => "1/s",
        Dim::SweepRate => "Hz/s",
        Dim::Angle => "rad",
        Dim::Length => "m",
    };
    format!("{value:e} {unit}")
}
