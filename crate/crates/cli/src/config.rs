//! Flat `key = value` run configuration.
//!
//! Sources are layered (defaults, preset, file, command-line overrides) and
//! applied in order, so later assignments win. `sweep.start` and
//! `sweep.stop` take the unit of `sweep.variable`, which is why they are
//! resolved after every other key.

use std::fmt;
use std::str::FromStr;

use zalm_core::montecarlo::SimConfig;
use zalm_core::shear::{DriveSignal, PulseTrain, DEFAULT_SAMPLES};
use zalm_core::{
    DesignParams, Error, Harmonics, JsaParams, Modulator, RateParams, WaveShape, Waveform,
};

use crate::sweep::{Output, Scale, Series, SweepSpec};
use crate::units::{format_quantity, parse_quantity, Dimension};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Quantity(Dimension),
    Count,
    Shape,
    Harmonics,
    Variable,
    Bound,
    Scale,
    Series,
    Outputs,
}

pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
}

const fn q(name: &'static str, dim: Dimension) -> Key {
    Key {
        name,
        kind: Kind::Quantity(dim),
    }
}

const fn k(name: &'static str, kind: Kind) -> Key {
    Key { name, kind }
}

use Dimension::*;

/// Every accepted key, in dump order.
pub const KEYS: &[Key] = &[
    q("design.bin_width", Frequency),
    q("design.guard_band", Frequency),
    q("design.tbp", Dimensionless),
    q("design.rf_power", Power),
    q("design.v_pi", Voltage),
    k("design.waveform", Kind::Shape),
    q("design.sine_phase", Angle),
    q("design.containment", Dimensionless),
    q("design.phase_tolerance", Angle),
    q("jsa.pump_duration", Time),
    q("jsa.pump_bandwidth", Frequency),
    q("jsa.pm_fwhm", Frequency),
    q("jsa.filter_fwhm", Frequency),
    k("jsa.filter_order", Kind::Count),
    k("jsa.grid_size", Kind::Count),
    q("jsa.span", Frequency),
    q("rates.pair_prob", Dimensionless),
    q("rates.eta_a", Dimensionless),
    q("rates.eta_b", Dimensionless),
    q("rates.herald_eta", Dimensionless),
    q("rates.circulator_loss", Decibel),
    q("rates.insertion_loss", Decibel),
    q("rates.bsm_eff", Dimensionless),
    k("sim.pulses", Kind::Count),
    k("sim.seed", Kind::Count),
    k("sim.workers", Kind::Count),
    q("shear.bin_spacing", Time),
    q("shear.pulse_fwhm", Time),
    q("shear.drive_freq", Frequency),
    q("shear.peak_voltage", Voltage),
    q("shear.v_pi", Voltage),
    k("shear.waveform", Kind::Shape),
    q("shear.phase", Angle),
    k("shear.harmonics", Kind::Harmonics),
    k("shear.samples", Kind::Count),
    k("shear.points", Kind::Count),
    k("sweep.variable", Kind::Variable),
    k("sweep.start", Kind::Bound),
    k("sweep.stop", Kind::Bound),
    k("sweep.points", Kind::Count),
    k("sweep.scale", Kind::Scale),
    k("sweep.series", Kind::Series),
    k("sweep.outputs", Kind::Outputs),
];

pub fn key(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

/// Dimension of a numeric key that can be swept.
pub fn sweepable(name: &str) -> Option<Dimension> {
    match key(name)?.kind {
        Kind::Quantity(dim) if name.starts_with("design.") || name.starts_with("rates.") => {
            Some(dim)
        }
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub pulses: u64,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearSettings {
    pub bin_spacing: f64,
    pub pulse_fwhm: f64,
    pub drive_freq: f64,
    pub peak_voltage: f64,
    pub v_pi: f64,
    pub waveform: WaveShape,
    pub phase: f64,
    pub harmonics: Harmonics,
    pub samples: usize,
    /// Drive phases in a sweep; 0 runs only the configured phase.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub design: DesignParams,
    pub waveform: WaveShape,
    pub sine_phase: f64,
    /// Allowed phase error for the drive-noise bound, rad.
    pub phase_tolerance: f64,
    pub jsa: JsaParams,
    pub rates: RateParams,
    pub sim: SimSettings,
    pub shear: ShearSettings,
    pub sweep: SweepSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        let design = DesignParams::default();
        Self {
            waveform: design.waveform.shape(),
            sine_phase: design.waveform.phase(),
            design,
            phase_tolerance: 5f64.to_radians(),
            jsa: JsaParams::default(),
            rates: RateParams::default(),
            sim: SimSettings {
                pulses: 1_000_000,
                seed: 0,
                workers: 1,
            },
            shear: ShearSettings {
                bin_spacing: 2.1e-9,
                pulse_fwhm: 200e-12,
                drive_freq: 2.0 / 2.1e-9,
                peak_voltage: 2.5,
                v_pi: 5.0,
                waveform: WaveShape::Sine,
                phase: 0.0,
                harmonics: Harmonics::Unlimited,
                samples: DEFAULT_SAMPLES,
                points: 32,
            },
            sweep: SweepSpec::default(),
        }
    }
}

fn parse_count(name: &str, text: &str) -> Result<u64, ConfigError> {
    let text = text.trim();
    if let Ok(v) = text.parse::<u64>() {
        return Ok(v);
    }
    // allow 1e6-style counts while they are exact
    match text.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(53) => Ok(v as u64),
        _ => Err(ConfigError::new(
            name,
            format!("`{text}` is not a non-negative integer"),
        )),
    }
}

fn parse_shape(name: &str, text: &str) -> Result<WaveShape, ConfigError> {
    WaveShape::from_str(text.trim()).map_err(|e| ConfigError::new(name, e.to_string()))
}

fn to_usize(name: &str, v: u64) -> Result<usize, ConfigError> {
    usize::try_from(v).map_err(|_| ConfigError::new(name, format!("{v} is too large")))
}

impl RunConfig {
    /// Parses a single text source over the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut b = ConfigBuilder::default();
        b.add_text(text, "config")?;
        b.build()
    }

    fn set(&mut self, name: &str, text: &str) -> Result<(), ConfigError> {
        let spec = key(name).ok_or_else(|| ConfigError::new(name, "unknown key"))?;
        let num = |dim| parse_quantity(text, dim).map_err(|e| ConfigError::new(name, e.0));
        let count = || parse_count(name, text);
        match (name, spec.kind) {
            (_, Kind::Quantity(dim)) => {
                let v = num(dim)?;
                *self.quantity_mut(name).expect("quantity key") = v;
            }
            ("design.waveform", _) => self.waveform = parse_shape(name, text)?,
            ("shear.waveform", _) => self.shear.waveform = parse_shape(name, text)?,
            ("jsa.filter_order", _) => {
                self.jsa.filter.shape_order = u32::try_from(count()?)
                    .map_err(|_| ConfigError::new(name, "order is too large"))?
            }
            ("jsa.grid_size", _) => self.jsa.grid_size = to_usize(name, count()?)?,
            ("sim.pulses", _) => self.sim.pulses = count()?,
            ("sim.seed", _) => self.sim.seed = count()?,
            ("sim.workers", _) => self.sim.workers = to_usize(name, count()?)?,
            ("shear.samples", _) => self.shear.samples = to_usize(name, count()?)?,
            ("shear.points", _) => self.shear.points = to_usize(name, count()?)?,
            ("shear.harmonics", _) => {
                let t = text.trim();
                self.shear.harmonics = if t.eq_ignore_ascii_case("all") {
                    Harmonics::Unlimited
                } else {
                    Harmonics::Kept(
                        u32::try_from(count()?)
                            .map_err(|_| ConfigError::new(name, "too many harmonics"))?,
                    )
                };
            }
            ("sweep.variable", _) => {
                let v = text.trim();
                if sweepable(v).is_none() {
                    return Err(ConfigError::new(
                        name,
                        format!("`{v}` is not a numeric design.* or rates.* key"),
                    ));
                }
                self.sweep.variable = v.to_string();
            }
            ("sweep.start" | "sweep.stop", _) => {
                let dim = sweepable(&self.sweep.variable).expect("validated variable");
                let v = num(dim)?;
                if name == "sweep.start" {
                    self.sweep.start = v;
                } else {
                    self.sweep.stop = v;
                }
            }
            ("sweep.points", _) => self.sweep.points = to_usize(name, count()?)?,
            ("sweep.scale", _) => {
                self.sweep.scale = Scale::from_str(text).map_err(|e| ConfigError::new(name, e))?
            }
            ("sweep.series", _) => {
                self.sweep.series = Series::from_str(text).map_err(|e| ConfigError::new(name, e))?
            }
            ("sweep.outputs", _) => {
                self.sweep.outputs = text
                    .split(',')
                    .map(|s| Output::from_str(s).map_err(|e| ConfigError::new(name, e)))
                    .collect::<Result<_, _>>()?;
                if self.sweep.outputs.is_empty() {
                    return Err(ConfigError::new(name, "at least one output is required"));
                }
            }
            _ => unreachable!("key table and setter disagree on `{name}`"),
        }
        Ok(())
    }

    fn quantity_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "design.bin_width" => &mut self.design.bin_width,
            "design.guard_band" => &mut self.design.guard_band,
            "design.tbp" => &mut self.design.tbp,
            "design.rf_power" => &mut self.design.rf_power,
            "design.v_pi" => &mut self.design.v_pi,
            "design.sine_phase" => &mut self.sine_phase,
            "design.containment" => &mut self.design.containment,
            "design.phase_tolerance" => &mut self.phase_tolerance,
            "jsa.pump_duration" => &mut self.jsa.pump_fwhm_duration,
            "jsa.pump_bandwidth" => &mut self.jsa.pump_fwhm_bandwidth,
            "jsa.pm_fwhm" => &mut self.jsa.pm_fwhm,
            "jsa.filter_fwhm" => &mut self.jsa.filter.fwhm,
            "jsa.span" => &mut self.jsa.span,
            "rates.pair_prob" => &mut self.rates.pair_prob,
            "rates.eta_a" => &mut self.rates.eta_a,
            "rates.eta_b" => &mut self.rates.eta_b,
            "rates.herald_eta" => &mut self.rates.herald_eta,
            "rates.circulator_loss" => &mut self.rates.circulator_loss,
            "rates.insertion_loss" => &mut self.rates.modulator.insertion_loss,
            "rates.bsm_eff" => &mut self.rates.bsm_eff,
            "shear.bin_spacing" => &mut self.shear.bin_spacing,
            "shear.pulse_fwhm" => &mut self.shear.pulse_fwhm,
            "shear.drive_freq" => &mut self.shear.drive_freq,
            "shear.peak_voltage" => &mut self.shear.peak_voltage,
            "shear.v_pi" => &mut self.shear.v_pi,
            "shear.phase" => &mut self.shear.phase,
            _ => return None,
        })
    }

    /// Sets a numeric key in base SI units; used by sweeps.
    pub fn set_quantity(&mut self, name: &str, value: f64) -> Result<(), ConfigError> {
        let slot = self
            .quantity_mut(name)
            .ok_or_else(|| ConfigError::new(name, "not a numeric key"))?;
        *slot = value;
        Ok(())
    }

    pub fn quantity(&self, name: &str) -> Option<f64> {
        self.clone().quantity_mut(name).map(|v| *v)
    }

    fn value_text(&self, spec: &Key) -> String {
        let name = spec.name;
        match spec.kind {
            Kind::Quantity(dim) => format_quantity(self.quantity(name).expect("quantity"), dim),
            Kind::Shape if name == "design.waveform" => self.waveform.name().to_string(),
            Kind::Shape => self.shear.waveform.name().to_string(),
            Kind::Harmonics => match self.shear.harmonics {
                Harmonics::Unlimited => "all".to_string(),
                Harmonics::Kept(h) => h.to_string(),
            },
            Kind::Count => match name {
                "jsa.filter_order" => self.jsa.filter.shape_order.to_string(),
                "jsa.grid_size" => self.jsa.grid_size.to_string(),
                "sim.pulses" => self.sim.pulses.to_string(),
                "sim.seed" => self.sim.seed.to_string(),
                "sim.workers" => self.sim.workers.to_string(),
                "shear.samples" => self.shear.samples.to_string(),
                "shear.points" => self.shear.points.to_string(),
                "sweep.points" => self.sweep.points.to_string(),
                _ => unreachable!("count key `{name}`"),
            },
            Kind::Variable => self.sweep.variable.clone(),
            Kind::Bound => {
                let dim = sweepable(&self.sweep.variable).expect("validated variable");
                let v = if name == "sweep.start" {
                    self.sweep.start
                } else {
                    self.sweep.stop
                };
                format_quantity(v, dim)
            }
            Kind::Scale => self.sweep.scale.to_string(),
            Kind::Series => self.sweep.series.to_string(),
            Kind::Outputs => self
                .sweep
                .outputs
                .iter()
                .map(|o| o.name())
                .collect::<Vec<_>>()
                .join(","),
        }
    }

    /// Every key with exact values in base units; reparses to `self`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for spec in KEYS {
            let s = spec.name.split('.').next().unwrap_or_default();
            if s != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                section = s;
            }
            out.push_str(&format!("{} = {}\n", spec.name, self.value_text(spec)));
        }
        out
    }

    fn waveform_for(shape: WaveShape, phase: f64) -> Waveform {
        match shape {
            WaveShape::Sine => Waveform::sine(phase),
            other => Waveform::from_shape(other),
        }
    }

    pub fn design_params(&self) -> Result<DesignParams, ConfigError> {
        let p = DesignParams {
            waveform: Self::waveform_for(self.waveform, self.sine_phase),
            ..self.design
        };
        p.validate().map_err(|e| config_error(e, "design"))?;
        if !(self.phase_tolerance > 0.0 && self.phase_tolerance < std::f64::consts::PI) {
            return Err(ConfigError::new(
                "design.phase_tolerance",
                "must lie in (0, π) rad",
            ));
        }
        Ok(p)
    }

    /// Rate parameters with the modulator Vπ taken from the design.
    pub fn rate_params(&self) -> Result<RateParams, ConfigError> {
        let p = RateParams {
            modulator: Modulator::new(self.design.v_pi, self.rates.modulator.insertion_loss),
            ..self.rates
        };
        p.validate().map_err(|e| config_error(e, "rates"))?;
        Ok(p)
    }

    pub fn jsa_params(&self) -> Result<JsaParams, ConfigError> {
        self.jsa.validate().map_err(|e| config_error(e, "jsa"))?;
        Ok(self.jsa)
    }

    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        let design = zalm_core::derive_design(&self.design_params()?)
            .map_err(|e| config_error(e, "design"))?;
        let c = SimConfig {
            design,
            rate_params: self.rate_params()?,
            n_pulses: self.sim.pulses,
            seed: self.sim.seed,
            workers: self.sim.workers,
        };
        c.validate().map_err(|e| config_error(e, "sim"))?;
        Ok(c)
    }

    pub fn pulse_train(&self) -> Result<PulseTrain, ConfigError> {
        let s = &self.shear;
        PulseTrain::gaussian_pair_with_samples(s.bin_spacing, s.pulse_fwhm, s.samples)
            .map_err(|e| config_error(e, "shear"))
    }

    pub fn drive(&self) -> Result<DriveSignal, ConfigError> {
        let s = &self.shear;
        let d = DriveSignal::new(
            Self::waveform_for(s.waveform, 0.0),
            s.drive_freq,
            s.peak_voltage,
        )
        .with_phase(s.phase)
        .with_harmonics(s.harmonics);
        d.validate().map_err(|e| config_error(e, "shear"))?;
        if !(s.v_pi > 0.0) {
            return Err(ConfigError::new("shear.v_pi", "must be > 0 V"));
        }
        if s.points != 0 && s.points < 8 {
            return Err(ConfigError::new(
                "shear.points",
                "use 0 or at least 8 phases",
            ));
        }
        Ok(d)
    }
}

/// Maps a core parameter name onto the config key it came from.
fn key_for(section: &str, name: &str) -> String {
    let mapped = match (section, name) {
        ("rates", "v_pi") => "design.v_pi",
        ("sim", "bins_usable") => "design.rf_power",
        ("shear", "frequency") => "shear.drive_freq",
        ("shear", "phase_offset") => "shear.phase",
        ("shear", "bin_fwhm") => "shear.pulse_fwhm",
        ("shear", "bin_centers") => "shear.bin_spacing",
        ("shear", "sample_period" | "envelope") => "shear.samples",
        ("shear", "n_points") => "shear.points",
        ("jsa", "values") => "jsa.grid_size",
        _ => "",
    };
    if !mapped.is_empty() {
        return mapped.to_string();
    }
    let direct = format!("{section}.{name}");
    if key(&direct).is_some() {
        direct
    } else {
        section.to_string()
    }
}

pub fn config_error(e: Error, section: &str) -> ConfigError {
    match e {
        Error::InvalidParameter { name, reason } => {
            ConfigError::new(key_for(section, name), reason)
        }
        other => ConfigError::new(section, other.to_string()),
    }
}

/// Layered sources of `key = value` assignments.
#[derive(Debug, Default, Clone)]
pub struct ConfigBuilder {
    assignments: Vec<(String, String)>,
}

impl ConfigBuilder {
    /// Adds every assignment in `text`; `#` starts a comment.
    pub fn add_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                ConfigError::new(format!("{origin}:{}", n + 1), "expected `key = value`")
            })?;
            self.add(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn add(&mut self, name: &str, value: &str) -> Result<(), ConfigError> {
        if key(name).is_none() {
            return Err(ConfigError::new(name, "unknown key"));
        }
        self.assignments.push((name.to_string(), value.to_string()));
        Ok(())
    }

    /// Parses a `key=value` override.
    pub fn add_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::new(assignment, "expected `key=value`"))?;
        self.add(k.trim(), v.trim())
    }

    pub fn build(&self) -> Result<RunConfig, ConfigError> {
        let mut c = RunConfig::default();
        let deferred = |k: &str| k == "sweep.start" || k == "sweep.stop";
        for (k, v) in self.assignments.iter().filter(|(k, _)| !deferred(k)) {
            c.set(k, v)?;
        }
        for (k, v) in self.assignments.iter().filter(|(k, _)| deferred(k)) {
            c.set(k, v)?;
        }
        Ok(c)
    }
}
