//! Closed-form design equations for spectral multiplexing of time bins.
//!
//! Starting from the frequency-bin filter (width, guard band, time-bandwidth
//! product) and the shearing hardware (RF power, modulator Vπ, drive
//! waveform), [`derive_design`] produces the full operating point: bin
//! spacing, Fourier-limited pulse width, time-bin spacing, the fastest
//! admissible shearing drive, pump repetition rate, the achievable frequency
//! shift and hence the number of bins that can be folded onto the centre bin.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{check, invalid, Result};

/// FWHM expressed in Gaussian standard deviations (rounded, as used for the
/// time-bin spacing and ramp containment rules).
pub const FWHM_IN_SIGMAS: f64 = 2.355;

/// Time-bin separation in standard deviations of the bin pulse (>10 FWHM).
pub const TIME_BIN_SIGMAS: f64 = 24.0;

/// Default number of pulse standard deviations the shear ramp must span.
pub const DEFAULT_CONTAINMENT: f64 = 8.0;

/// Load impedance of the RF chain, ohms.
pub const LOAD_IMPEDANCE: f64 = 50.0;

/// Slack when flooring `D·Δt_b` so exact multiples (e.g. 3.0) survive rounding.
const MULTIPLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveShape {
    Sawtooth,
    Triangle,
    Sine,
}

impl WaveShape {
    pub const ALL: [WaveShape; 3] = [WaveShape::Sawtooth, WaveShape::Sine, WaveShape::Triangle];

    pub fn name(self) -> &'static str {
        match self {
            WaveShape::Sawtooth => "sawtooth",
            WaveShape::Triangle => "triangle",
            WaveShape::Sine => "sine",
        }
    }

    /// Peak voltage per `√(50·P)`, i.e. the reciprocal RMS form factor.
    pub fn rms_factor(self) -> f64 {
        match self {
            WaveShape::Sawtooth => 0.585382,
            WaveShape::Triangle => 0.579814,
            WaveShape::Sine => 1.0 / SQRT_2,
        }
    }

    /// Fraction of a period over which the slope keeps one sign.
    fn ramp_fraction(self) -> f64 {
        match self {
            WaveShape::Sawtooth => 1.0,
            WaveShape::Triangle | WaveShape::Sine => 0.5,
        }
    }

    /// Peak slope in units of `V·D` (sawtooth 2, triangle 4, sine 2π).
    fn slope_factor(self) -> f64 {
        match self {
            WaveShape::Sawtooth => 2.0,
            WaveShape::Triangle => 4.0,
            WaveShape::Sine => 2.0 * PI,
        }
    }

    /// Closed-form bin coefficient `C` such that
    /// `n = 2·(C/σ)·δf_b·√P / (Vπ·TBP·ΔF_b) + 1`.
    ///
    /// Evaluated from the RMS factors and the containment rule at σ = 8 where
    /// the integer drive multiples are 3 (sawtooth) and 1 (triangle, sine).
    pub fn bins_coefficient(self) -> f64 {
        let multiple = match self {
            WaveShape::Sawtooth => 3.0,
            WaveShape::Triangle | WaveShape::Sine => 1.0,
        };
        LOAD_IMPEDANCE.sqrt() / self.rms_factor()
            * (self.slope_factor() / 2.0)
            * multiple
            * (FWHM_IN_SIGMAS / TIME_BIN_SIGMAS)
            * DEFAULT_CONTAINMENT
    }
}

impl std::str::FromStr for WaveShape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sawtooth" | "saw" => Ok(WaveShape::Sawtooth),
            "triangle" | "tri" => Ok(WaveShape::Triangle),
            "sine" | "sin" => Ok(WaveShape::Sine),
            other => Err(format!("unknown waveform `{other}`")),
        }
    }
}

impl std::fmt::Display for WaveShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Drive waveform shape plus, for sines, the phase of the sine relative to
/// the optical pulse (0 = rising zero crossing on the pulse).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waveform {
    shape: WaveShape,
    phase: f64,
}

impl Waveform {
    pub fn sawtooth() -> Self {
        Self {
            shape: WaveShape::Sawtooth,
            phase: 0.0,
        }
    }

    pub fn triangle() -> Self {
        Self {
            shape: WaveShape::Triangle,
            phase: 0.0,
        }
    }

    /// Sine with `phase` wrapped into `[-π, π)`.
    pub fn sine(phase: f64) -> Self {
        Self {
            shape: WaveShape::Sine,
            phase: crate::wrap_phase(phase),
        }
    }

    pub fn from_shape(shape: WaveShape) -> Self {
        match shape {
            WaveShape::Sawtooth => Self::sawtooth(),
            WaveShape::Triangle => Self::triangle(),
            WaveShape::Sine => Self::sine(0.0),
        }
    }

    pub fn shape(&self) -> WaveShape {
        self.shape
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Local slope at the pulse in units of `V·D`.
    fn shift_factor(&self) -> f64 {
        match self.shape {
            WaveShape::Sine => PI * self.phase.cos(),
            s => s.slope_factor() / 2.0,
        }
    }
}

impl Default for Waveform {
    fn default() -> Self {
        Self::sine(0.0)
    }
}

/// Free hardware parameters of the multiplexing design. SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignParams {
    /// Frequency-bin FWHM δf_b, Hz.
    pub bin_width: f64,
    /// Extra filter transition spacing δ_s, Hz.
    pub guard_band: f64,
    /// Time-bandwidth product ΔfΔt of the bin's spectral mode.
    pub tbp: f64,
    /// Average RF power into the modulator, W.
    pub rf_power: f64,
    /// Modulator half-wave voltage, V.
    pub v_pi: f64,
    pub waveform: Waveform,
    /// Pulse standard deviations one shear ramp must contain.
    pub containment: f64,
}

impl Default for DesignParams {
    /// 12.5 GHz flat-top bins, 2 GHz guard band, 10 W into a 1 V modulator.
    fn default() -> Self {
        Self {
            bin_width: 12.5e9,
            guard_band: 2e9,
            tbp: 0.89,
            rf_power: 10.0,
            v_pi: 1.0,
            waveform: Waveform::sine(0.0),
            containment: DEFAULT_CONTAINMENT,
        }
    }
}

impl DesignParams {
    pub fn with_waveform(mut self, waveform: Waveform) -> Self {
        self.waveform = waveform;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check("bin_width", self.bin_width, |v| v > 0.0, "> 0 Hz")?;
        check("guard_band", self.guard_band, |v| v >= 0.0, ">= 0 Hz")?;
        check(
            "tbp",
            self.tbp,
            |v| v > 0.0 && v <= 1.0,
            "a value in (0, 1]",
        )?;
        check("rf_power", self.rf_power, |v| v >= 0.0, ">= 0 W")?;
        check("v_pi", self.v_pi, |v| v > 0.0, "> 0 V")?;
        check("containment", self.containment, |v| v >= 2.0, ">= 2")?;
        check(
            "sine_phase",
            self.waveform.phase,
            |_| true,
            "a finite angle",
        )?;
        Ok(())
    }
}

/// Every quantity derived from a [`DesignParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPoint {
    /// Centre-to-centre bin spacing ΔF_b, Hz.
    pub bin_spacing: f64,
    /// Fourier-conjugate bin pulse FWHM τ_b, s.
    pub bin_pulse_width: f64,
    /// Early/late separation Δt_b, s.
    pub time_bin_spacing: f64,
    /// Shearing drive frequency D, Hz; always an integer multiple of 1/Δt_b.
    pub drive_freq: f64,
    /// Pump repetition rate R_P, Hz.
    pub pump_rate: f64,
    /// Peak drive voltage, V.
    pub peak_voltage: f64,
    /// Frequency shift at the pulse, Hz (signed; negative for a falling sine).
    pub freq_shift: f64,
    /// Real-valued bin count `2|Δf|/ΔF_b + 1`.
    pub bins_real: f64,
    /// Largest odd integer not above `bins_real`, at least 1.
    pub bins_usable: u32,
}

impl DesignPoint {
    /// `D·Δt_b`, the integer number of drive periods between time bins.
    pub fn drive_multiple(&self) -> u32 {
        (self.drive_freq * self.time_bin_spacing).round() as u32
    }

    /// Largest |bin offset| reachable by the feedforward shift.
    pub fn max_offset(&self) -> u32 {
        (self.bins_usable - 1) / 2
    }
}

/// Largest odd integer ≤ `n`, clamped to at least 1.
pub fn odd_floor(n: f64) -> u32 {
    if !(n >= 1.0) {
        return 1;
    }
    let f = n.floor() as u32;
    if f % 2 == 1 {
        f
    } else {
        f - 1
    }
}

/// Composes the design equations into a [`DesignPoint`].
///
/// The drive-frequency bound `D ≤ 2.355/(σ·r·τ_b)` (r = 1 for sawtooth,
/// 1/2 for triangle and sine) is floored to an integer multiple of `1/Δt_b`
/// so both time bins meet the same part of the waveform. A containment σ
/// so strict that no multiple fits is rejected.
pub fn derive_design(params: &DesignParams) -> Result<DesignPoint> {
    params.validate()?;
    let shape = params.waveform.shape();

    let bin_spacing = params.bin_width / params.tbp + params.guard_band;
    let bin_pulse_width = params.tbp / params.bin_width;
    let time_bin_spacing = TIME_BIN_SIGMAS / FWHM_IN_SIGMAS * bin_pulse_width;

    let ramp = params.containment / FWHM_IN_SIGMAS * bin_pulse_width / shape.ramp_fraction();
    let bound = 1.0 / ramp;
    let multiple = (bound * time_bin_spacing + MULTIPLE_EPS).floor();
    if multiple < 1.0 {
        return Err(invalid(
            "containment",
            format!(
                "{} sigmas leaves no integer drive multiple of 1/Δt_b for a {} drive",
                params.containment,
                shape.name()
            ),
        ));
    }
    let drive_freq = multiple / time_bin_spacing;
    let pump_rate = 1.0 / (3.0 * time_bin_spacing);

    let peak_voltage = (LOAD_IMPEDANCE * params.rf_power).sqrt() / shape.rms_factor();
    let freq_shift = params.waveform.shift_factor() * peak_voltage * drive_freq / params.v_pi;
    let bins_real = 2.0 * freq_shift.abs() / bin_spacing + 1.0;

    Ok(DesignPoint {
        bin_spacing,
        bin_pulse_width,
        time_bin_spacing,
        drive_freq,
        pump_rate,
        peak_voltage,
        freq_shift,
        bins_real,
        bins_usable: odd_floor(bins_real),
    })
}

/// Bin count from the collapsed single-expression form,
/// `n = 2·(C/σ)·δf_b·√P / (Vπ·TBP·(δf_b/TBP + δ_s)) + 1`.
///
/// The `C/σ` scaling is exact at the default σ = 8; for other σ it follows
/// the unfloored sawtooth bound and will not match [`derive_design`].
pub fn bins_closed_form(params: &DesignParams) -> Result<f64> {
    params.validate()?;
    let p = params;
    let mut coeff = p.waveform.shape().bins_coefficient() / p.containment;
    if p.waveform.shape() == WaveShape::Sine {
        coeff *= p.waveform.phase().cos().abs();
    }
    Ok(2.0 * coeff * p.bin_width * p.rf_power.sqrt()
        / (p.v_pi * p.tbp * (p.bin_width / p.tbp + p.guard_band))
        + 1.0)
}

/// Largest DC offset on the ramp that keeps the added phase below
/// `allowed_phase`: `δV = Δφ·Vπ/π`.
pub fn max_voltage_offset(allowed_phase: f64, v_pi: f64) -> Result<f64> {
    check("allowed_phase", allowed_phase, |v| v >= 0.0, ">= 0 rad")?;
    check("v_pi", v_pi, |v| v > 0.0, "> 0 V")?;
    Ok(allowed_phase * v_pi / PI)
}

/// Phase error picked up from a constant offset: `Δφ = π·δV/Vπ`.
pub fn phase_error_from_offset(offset: f64, v_pi: f64) -> Result<f64> {
    check("offset", offset, |_| true, "a finite voltage")?;
    check("v_pi", v_pi, |v| v > 0.0, "> 0 V")?;
    Ok(PI * offset / v_pi)
}

/// Ramp `V(t) = slope·t + offset` applied to a modulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub allowed_phase: f64,
    pub v_pi: f64,
    pub offset: f64,
    /// Ramp slope, V/s.
    pub slope: f64,
}

impl NoiseSpec {
    /// Spec whose offset sits exactly at the bound for `allowed_phase`.
    pub fn at_bound(allowed_phase: f64, v_pi: f64, slope: f64) -> Result<Self> {
        check("slope", slope, |_| true, "a finite slope")?;
        Ok(Self {
            allowed_phase,
            v_pi,
            offset: max_voltage_offset(allowed_phase, v_pi)?,
            slope,
        })
    }

    /// Frequency shift of the ramp, `slope/(2Vπ)`, Hz.
    pub fn frequency_shift(&self) -> f64 {
        self.slope / (2.0 * self.v_pi)
    }

    /// Constant phase picked up from the offset, rad.
    pub fn phase_error(&self) -> f64 {
        PI * self.offset / self.v_pi
    }

    /// Total applied phase `π(slope·t + offset)/Vπ`.
    pub fn applied_phase(&self, t: f64) -> f64 {
        PI * (self.slope * t + self.offset) / self.v_pi
    }

    pub fn within_bound(&self) -> bool {
        self.phase_error().abs() <= self.allowed_phase * (1.0 + 1e-12)
    }
}
