//! One-variable parameter sweeps over design and rate settings.

use std::fmt;
use std::str::FromStr;

use zalm_core::rates::ModulatorRate;
use zalm_core::{
    derive_design, zalm_rate, DesignParams, DesignPoint, Modulator, RateParams, WaveShape,
};

use crate::config::{config_error, sweepable, ConfigError, RunConfig};
use crate::output::Table;
use crate::units::{header, Dimension};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            other => Err(format!("unknown scale `{other}`; expected linear or log")),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        })
    }
}

/// Configurations compared side by side in each output column group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    /// The configured design only.
    Single,
    /// Sawtooth, sine and triangle drives.
    Waveform,
    /// The three reference phase modulators.
    Modulator,
}

impl FromStr for Series {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "single" => Ok(Series::Single),
            "waveform" | "waveforms" => Ok(Series::Waveform),
            "modulator" | "modulators" => Ok(Series::Modulator),
            other => Err(format!(
                "unknown series `{other}`; expected none, waveform or modulator"
            )),
        }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Series::Single => "none",
            Series::Waveform => "waveform",
            Series::Modulator => "modulator",
        })
    }
}

pub const REFERENCE_MODULATORS: [Modulator; 3] = [
    Modulator::CONVENTIONAL,
    Modulator::THIN_FILM,
    Modulator::HERO,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    BinsReal,
    BinsUsable,
    BinSpacing,
    PulseWidth,
    TimeBinSpacing,
    DriveFreq,
    PumpRate,
    PeakVoltage,
    FreqShift,
    BasicRate,
    ZalmRate,
    Gain,
}

impl Output {
    pub const ALL: [Output; 12] = [
        Output::BinsReal,
        Output::BinsUsable,
        Output::BinSpacing,
        Output::PulseWidth,
        Output::TimeBinSpacing,
        Output::DriveFreq,
        Output::PumpRate,
        Output::PeakVoltage,
        Output::FreqShift,
        Output::BasicRate,
        Output::ZalmRate,
        Output::Gain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::BinsReal => "n",
            Output::BinsUsable => "bins",
            Output::BinSpacing => "bin_spacing",
            Output::PulseWidth => "tau_b",
            Output::TimeBinSpacing => "dt_b",
            Output::DriveFreq => "drive_freq",
            Output::PumpRate => "pump_rate",
            Output::PeakVoltage => "peak_voltage",
            Output::FreqShift => "freq_shift",
            Output::BasicRate => "basic_rate",
            Output::ZalmRate => "zalm_rate",
            Output::Gain => "gain",
        }
    }

    pub fn dimension(self) -> Dimension {
        match self {
            Output::BinsReal | Output::BinsUsable | Output::Gain => Dimension::Dimensionless,
            Output::PulseWidth | Output::TimeBinSpacing => Dimension::Time,
            Output::PeakVoltage => Dimension::Voltage,
            _ => Dimension::Frequency,
        }
    }

    fn needs_rates(self) -> bool {
        matches!(self, Output::BasicRate | Output::ZalmRate | Output::Gain)
    }

    fn eval(self, d: &DesignPoint, rates: Option<(f64, f64)>) -> f64 {
        let (basic, zalm) = rates.unwrap_or((f64::NAN, f64::NAN));
        match self {
            Output::BinsReal => d.bins_real,
            Output::BinsUsable => d.bins_usable as f64,
            Output::BinSpacing => d.bin_spacing,
            Output::PulseWidth => d.bin_pulse_width,
            Output::TimeBinSpacing => d.time_bin_spacing,
            Output::DriveFreq => d.drive_freq,
            Output::PumpRate => d.pump_rate,
            Output::PeakVoltage => d.peak_voltage,
            Output::FreqShift => d.freq_shift,
            Output::BasicRate => basic,
            Output::ZalmRate => zalm,
            Output::Gain => zalm / basic,
        }
    }
}

impl FromStr for Output {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        Output::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<&str> = Output::ALL.iter().map(|o| o.name()).collect();
                format!("unknown output `{s}`; expected one of {}", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: String,
    /// Base SI units of `variable`.
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
    pub series: Series,
    pub outputs: Vec<Output>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            variable: "design.rf_power".into(),
            start: 0.1,
            stop: 100.0,
            points: 31,
            scale: Scale::Log,
            series: Series::Waveform,
            outputs: vec![Output::BinsReal],
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<Dimension, ConfigError> {
        let dim = sweepable(&self.variable).ok_or_else(|| {
            ConfigError::new(
                "sweep.variable",
                format!("`{}` cannot be swept", self.variable),
            )
        })?;
        if self.points < 2 {
            return Err(ConfigError::new("sweep.points", "need at least 2 points"));
        }
        if !(self.start < self.stop) {
            return Err(ConfigError::new("sweep.stop", "stop must exceed start"));
        }
        if self.scale == Scale::Log && !(self.start > 0.0) {
            return Err(ConfigError::new("sweep.start", "log scale needs start > 0"));
        }
        Ok(dim)
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == n - 1 {
                    return self.stop;
                }
                let f = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.start + f * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + f * (self.stop / self.start).ln()).exp(),
                }
            })
            .collect()
    }
}

struct Variant {
    label: String,
    design: DesignParams,
    rates: RateParams,
}

fn variants(c: &RunConfig) -> Result<Vec<Variant>, ConfigError> {
    let design = c.design_params()?;
    let rates = c.rate_params()?;
    Ok(match c.sweep.series {
        Series::Single => vec![Variant {
            label: String::new(),
            design,
            rates,
        }],
        Series::Waveform => WaveShape::ALL
            .into_iter()
            .map(|shape| {
                let mut v = c.clone();
                v.waveform = shape;
                Ok(Variant {
                    label: shape.name().to_string(),
                    design: v.design_params()?,
                    rates,
                })
            })
            .collect::<Result<_, ConfigError>>()?,
        Series::Modulator => REFERENCE_MODULATORS
            .into_iter()
            .map(|m| Variant {
                label: m.label(),
                design: DesignParams {
                    v_pi: m.v_pi,
                    ..design
                },
                rates: RateParams {
                    modulator: m,
                    ..rates
                },
            })
            .collect(),
    })
}

/// Evaluates the configured sweep; one row per point, one column per
/// output and series member.
pub fn run_sweep(c: &RunConfig) -> Result<Table, CliError> {
    let spec = &c.sweep;
    let dim = spec.validate()?;
    let labels: Vec<String> = variants(c)?.into_iter().map(|v| v.label).collect();
    let mut headers = vec![header(&spec.variable, dim)];
    for o in &spec.outputs {
        for l in &labels {
            let name = if l.is_empty() {
                o.name().to_string()
            } else {
                format!("{}_{l}", o.name())
            };
            headers.push(header(&name, o.dimension()));
        }
    }
    let need_rates = spec.outputs.iter().any(|o| o.needs_rates());

    let mut rows = Vec::with_capacity(spec.points);
    for x in spec.values() {
        let mut point = c.clone();
        point.set_quantity(&spec.variable, x)?;
        let mut evaluated = Vec::new();
        for v in variants(&point)? {
            let d = derive_design(&v.design).map_err(|e| config_error(e, "design"))?;
            let rates = if need_rates {
                let r = zalm_rate(&d, &v.rates).map_err(|e| config_error(e, "rates"))?;
                Some((r.basic_rate, r.zalm_rate))
            } else {
                None
            };
            evaluated.push((d, rates));
        }
        let mut row = vec![x];
        for o in &spec.outputs {
            row.extend(evaluated.iter().map(|(d, r)| o.eval(d, *r)));
        }
        rows.push(row);
    }
    Ok(Table::numeric(headers, rows))
}

/// Label of the best modulator first.
pub fn ranking(rates: &[ModulatorRate]) -> String {
    zalm_core::rates::rank(rates)
        .into_iter()
        .map(|i| rates[i].modulator.label())
        .collect::<Vec<_>>()
        .join(" > ")
}
