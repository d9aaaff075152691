//! Physical quantities with optional unit suffixes.
//!
//! Suffixes are matched case-insensitively against the units of the
//! expected dimension only, so `12.5ghz` and `12.5 GHz` are the same value
//! and `5 mV` never collides with a frequency prefix.

use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Time,
    Voltage,
    Power,
    Decibel,
    Angle,
    Dimensionless,
}

impl Dimension {
    /// Base SI unit written after values and in headers.
    pub fn unit(self) -> &'static str {
        match self {
            Dimension::Frequency => "Hz",
            Dimension::Time => "s",
            Dimension::Voltage => "V",
            Dimension::Power => "W",
            Dimension::Decibel => "dB",
            Dimension::Angle => "rad",
            Dimension::Dimensionless => "1",
        }
    }

    fn suffixes(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Frequency => &[
                ("hz", 1.0),
                ("khz", 1e3),
                ("mhz", 1e6),
                ("ghz", 1e9),
                ("thz", 1e12),
            ],
            Dimension::Time => &[
                ("s", 1.0),
                ("ms", 1e-3),
                ("us", 1e-6),
                ("µs", 1e-6),
                ("ns", 1e-9),
                ("ps", 1e-12),
                ("fs", 1e-15),
            ],
            Dimension::Voltage => &[("v", 1.0), ("mv", 1e-3), ("kv", 1e3)],
            Dimension::Power => &[("w", 1.0), ("mw", 1e-3), ("kw", 1e3)],
            Dimension::Decibel => &[("db", 1.0)],
            Dimension::Angle => &[("rad", 1.0), ("mrad", 1e-3), ("deg", PI / 180.0)],
            Dimension::Dimensionless => &[("1", 1.0)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitError(pub String);

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UnitError {}

/// Parses `text` as a quantity of dimension `dim`, returning base SI units.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, UnitError> {
    let text = text.trim();
    let split = text
        .char_indices()
        .find(|&(i, c)| c.is_alphabetic() && !is_exponent(text, i))
        .map_or(text.len(), |(i, _)| i);
    let (number, suffix) = text.split_at(split);
    let number = number.trim();
    let value: f64 = number
        .parse()
        .map_err(|_| UnitError(format!("`{text}` is not a number")))?;
    if !value.is_finite() {
        return Err(UnitError(format!("`{text}` is not finite")));
    }
    let suffix = suffix.trim().to_lowercase();
    if suffix.is_empty() {
        return Ok(value);
    }
    dim.suffixes()
        .iter()
        .find(|(s, _)| *s == suffix)
        .map(|(_, scale)| value * scale)
        .ok_or_else(|| {
            let known: Vec<&str> = dim.suffixes().iter().map(|(s, _)| *s).collect();
            UnitError(format!(
                "unknown unit `{}` in `{text}`; expected one of {}",
                suffix,
                known.join(", ")
            ))
        })
}

/// An `e`/`E` that continues a mantissa and is followed by a digit or sign.
fn is_exponent(text: &str, i: usize) -> bool {
    let bytes = text.as_bytes();
    if !matches!(bytes[i], b'e' | b'E')
        || i == 0
        || !bytes[i - 1].is_ascii_digit() && bytes[i - 1] != b'.'
    {
        return false;
    }
    match bytes.get(i + 1) {
        Some(b'+' | b'-') => bytes.get(i + 2).is_some_and(u8::is_ascii_digit),
        Some(b) => b.is_ascii_digit(),
        None => false,
    }
}

/// Round-trip formatting: shortest exact exponent form plus base unit.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    match dim {
        Dimension::Dimensionless => format!("{value:e}"),
        _ => format!("{value:e} {}", dim.unit()),
    }
}

/// Column header `name [unit]`.
pub fn header(name: &str, dim: Dimension) -> String {
    format!("{name} [{}]", dim.unit())
}
