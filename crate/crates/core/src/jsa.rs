//! Joint spectral amplitude of a filtered SPDC pair source and its Schmidt
//! purity.
//!
//! The amplitude over signal/idler detunings `(Ωs, Ωi)` is
//! `pump(Ωs+Ωi) · sinc(pm·(Ωs−Ωi)) · filter(Ωs) · filter(Ωi)`: the pump
//! envelope runs across the anti-diagonal (energy conservation), phase
//! matching along it, and the frequency-bin filter acts on each marginal.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check, invalid, Error, Result};

/// `x` where `sinc²(x) = 1/2`.
const SINC_SQ_HALF_POINT: f64 = 1.391_557_378_251_510_3;

/// Pump duration × bandwidth of the reference pump pulses (70 ps, 12.9 GHz).
pub const DEFAULT_PUMP_TBP: f64 = 70e-12 * 12.9e9;

/// Grid cells the filter FWHM must span.
const MIN_FILTER_CELLS: f64 = 8.0;

/// Super-Gaussian frequency-bin filter, `T(Ω) = exp(−ln2·(2Ω/FWHM)^(2m))`
/// in intensity. Order 1 is Gaussian; 4 and above approach a flat top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    /// Intensity FWHM, Hz.
    pub fwhm: f64,
    pub shape_order: u32,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            fwhm: 12.5e9,
            shape_order: 4,
        }
    }
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        check("filter_fwhm", self.fwhm, |v| v > 0.0, "> 0 Hz")?;
        if self.shape_order == 0 {
            return Err(invalid("filter_order", "order must be at least 1"));
        }
        Ok(())
    }

    /// Intensity transmission at detuning `omega`.
    pub fn transmission(&self, omega: f64) -> f64 {
        let x = 2.0 * omega / self.fwhm;
        (-std::f64::consts::LN_2 * x.abs().powi(2 * self.shape_order as i32)).exp()
    }

    /// Field transmission, `√T`.
    pub fn amplitude(&self, omega: f64) -> f64 {
        self.transmission(omega).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsaParams {
    /// Pump pulse FWHM duration, s. Descriptive; the amplitude uses the bandwidth.
    pub pump_fwhm_duration: f64,
    /// Pump intensity FWHM, Hz.
    pub pump_fwhm_bandwidth: f64,
    /// Intensity FWHM of the phase-matching sinc² along `Ωs − Ωi`, Hz.
    pub pm_fwhm: f64,
    pub filter: FilterSpec,
    /// Points per axis.
    pub grid_size: usize,
    /// Half-width of both detuning axes, Hz.
    pub span: f64,
}

impl Default for JsaParams {
    /// 70 ps / 12.9 GHz pump on 12.5 GHz bins.
    fn default() -> Self {
        Self {
            pump_fwhm_duration: 70e-12,
            pump_fwhm_bandwidth: 12.9e9,
            pm_fwhm: 200e9,
            filter: FilterSpec::default(),
            grid_size: 512,
            span: 60e9,
        }
    }
}

impl JsaParams {
    pub fn with_pump(mut self, duration: f64, bandwidth: f64) -> Self {
        self.pump_fwhm_duration = duration;
        self.pump_fwhm_bandwidth = bandwidth;
        self
    }

    /// Pump of the given duration with bandwidth `DEFAULT_PUMP_TBP/duration`.
    pub fn with_pump_duration(self, duration: f64) -> Self {
        self.with_pump(duration, DEFAULT_PUMP_TBP / duration)
    }

    pub fn validate(&self) -> Result<()> {
        check(
            "pump_duration",
            self.pump_fwhm_duration,
            |v| v > 0.0,
            "> 0 s",
        )?;
        check(
            "pump_bandwidth",
            self.pump_fwhm_bandwidth,
            |v| v > 0.0,
            "> 0 Hz",
        )?;
        check("pm_fwhm", self.pm_fwhm, |v| v > 0.0, "> 0 Hz")?;
        self.filter.validate()?;
        if self.grid_size < 64 {
            return Err(invalid(
                "grid_size",
                format!("need at least 64 points per axis, got {}", self.grid_size),
            ));
        }
        check(
            "span",
            self.span,
            |v| v > 2.0 * self.filter.fwhm,
            "> 2 × filter FWHM",
        )?;
        Ok(())
    }

    fn cell(&self) -> f64 {
        2.0 * self.span / (self.grid_size - 1) as f64
    }
}

/// Sampled amplitude; rows index the signal axis, columns the idler axis.
#[derive(Debug, Clone, PartialEq)]
pub struct JsaGrid {
    pub values: DMatrix<Complex64>,
    pub signal_axis: Vec<f64>,
    pub idler_axis: Vec<f64>,
}

impl JsaGrid {
    /// Wraps an arbitrary amplitude matrix, normalising it to unit Frobenius
    /// norm.
    pub fn from_amplitudes(
        values: DMatrix<Complex64>,
        signal_axis: Vec<f64>,
        idler_axis: Vec<f64>,
    ) -> Result<Self> {
        if values.nrows() != signal_axis.len() || values.ncols() != idler_axis.len() {
            return Err(invalid("values", "matrix shape does not match the axes"));
        }
        let norm = values.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid("values", "amplitude must be finite and non-zero"));
        }
        Ok(Self {
            values: values / Complex64::new(norm, 0.0),
            signal_axis,
            idler_axis,
        })
    }

    /// `|values|²`.
    pub fn intensity(&self) -> DMatrix<f64> {
        self.values.map(|v| v.norm_sqr())
    }

    pub fn transpose(&self) -> Self {
        Self {
            values: self.values.transpose(),
            signal_axis: self.idler_axis.clone(),
            idler_axis: self.signal_axis.clone(),
        }
    }
}

fn linspace(half_width: f64, n: usize) -> Vec<f64> {
    let step = 2.0 * half_width / (n - 1) as f64;
    // symmetric by construction: x[k] = -x[n-1-k]
    (0..n)
        .map(|k| (2.0 * k as f64 - (n - 1) as f64) * 0.5 * step)
        .collect()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Filtered two-photon amplitude on a square detuning grid.
pub fn build_jsa(params: &JsaParams) -> Result<JsaGrid> {
    params.validate()?;
    let cells = params.filter.fwhm / params.cell();
    if cells < MIN_FILTER_CELLS {
        return Err(Error::Resolution(format!(
            "filter FWHM spans {cells:.2} grid cells, need {MIN_FILTER_CELLS}"
        )));
    }
    let n = params.grid_size;
    let axis = linspace(params.span, n);
    let pump_scale = 2.0 * std::f64::consts::LN_2 / params.pump_fwhm_bandwidth.powi(2);
    let pm_scale = 2.0 * SINC_SQ_HALF_POINT / params.pm_fwhm;
    let filt: Vec<f64> = axis.iter().map(|&w| params.filter.amplitude(w)).collect();

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let ws = axis[i];
            (0..n)
                .map(|j| {
                    let wi = axis[j];
                    let pump = (-pump_scale * (ws + wi).powi(2)).exp();
                    pump * sinc(pm_scale * (ws - wi)) * filt[i] * filt[j]
                })
                .collect()
        })
        .collect();
    let values = DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0));
    JsaGrid::from_amplitudes(values, axis.clone(), axis)
}

/// Singular values of the unit-norm amplitude, descending. Their squares are
/// the Schmidt weights.
pub fn schmidt_coefficients(grid: &JsaGrid) -> Result<Vec<f64>> {
    let norm = grid.values.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Decomposition(
            "amplitude is zero or non-finite".into(),
        ));
    }
    let eps = 1e-14;
    let max_iter = 10_000;
    let mut s: Vec<f64> = if grid.values.iter().all(|v| v.im == 0.0) {
        let real = grid.values.map(|v| v.re / norm);
        real.try_svd(false, false, eps, max_iter)
            .ok_or_else(|| Error::Decomposition("SVD did not converge".into()))?
            .singular_values
            .iter()
            .copied()
            .collect()
    } else {
        let scaled = grid.values.map(|v| v / norm);
        scaled
            .try_svd(false, false, eps, max_iter)
            .ok_or_else(|| Error::Decomposition("SVD did not converge".into()))?
            .singular_values
            .iter()
            .copied()
            .collect()
    };
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Decomposition("non-finite singular value".into()));
    }
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Schmidt purity `Σ s_k⁴` (the inverse Schmidt number).
pub fn purity(grid: &JsaGrid) -> Result<f64> {
    let s = schmidt_coefficients(grid)?;
    let total: f64 = s.iter().map(|v| v * v).sum();
    Ok(s.iter().map(|v| (v * v / total).powi(2)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Signal,
    Idler,
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "signal" | "s" | "x" => Ok(Axis::Signal),
            "idler" | "i" | "y" => Ok(Axis::Idler),
            other => Err(format!("unknown axis `{other}`")),
        }
    }
}

/// Intensity marginal along `axis`, normalised to unit sum.
pub fn marginal(grid: &JsaGrid, axis: Axis) -> Vec<f64> {
    let intensity = grid.intensity();
    let raw: Vec<f64> = match axis {
        Axis::Signal => intensity.row_iter().map(|r| r.sum()).collect(),
        Axis::Idler => intensity.column_iter().map(|c| c.sum()).collect(),
    };
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Full width at half maximum of a sampled single-peaked curve, with linear
/// interpolation at the crossings.
pub fn fwhm(axis: &[f64], values: &[f64]) -> Option<f64> {
    let (peak_idx, &peak) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let half = peak / 2.0;
    let lerp = |i: usize, j: usize| {
        let (x0, x1, y0, y1) = (axis[i], axis[j], values[i], values[j]);
        x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    };
    let left = (1..=peak_idx).rev().find(|&i| values[i - 1] < half)?;
    let right = (peak_idx..values.len() - 1).find(|&i| values[i + 1] < half)?;
    Some(lerp(right, right + 1) - lerp(left - 1, left))
}
