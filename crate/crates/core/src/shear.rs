//! Time-domain simulation of electro-optic spectral shearing applied to a
//! pair of time-bin pulses.
//!
//! The optical field is carried as a sampled complex envelope with the
//! carrier removed. A drive voltage `V(t)` on a modulator with half-wave
//! voltage `Vπ` multiplies the envelope by `exp(iπV(t)/Vπ)`. Each time bin's
//! frequency shift and residual phase are read off an intensity-weighted
//! straight-line fit of the applied phase across that bin.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::design::{WaveShape, Waveform};
use crate::error::{check, invalid, Error, Result};
use crate::spectrum::spectral_centroid;
use crate::wrap_phase;

/// Default number of envelope samples (spanning about three bin spacings).
pub const DEFAULT_SAMPLES: usize = 1 << 14;

/// Minimum share of total intensity a bin needs for a phase fit.
const MIN_BIN_WEIGHT: f64 = 1e-12;

/// Fourier-series truncation of the drive waveform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Harmonics {
    Unlimited,
    /// Keep the first `n` non-zero Fourier terms.
    Kept(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSignal {
    pub waveform: Waveform,
    /// Hz.
    pub frequency: f64,
    /// Peak voltage of the untruncated waveform, V.
    pub peak_voltage: f64,
    /// Drive phase relative to the early pulse, rad. Added to the waveform's
    /// own phase.
    pub phase_offset: f64,
    pub harmonics: Harmonics,
}

impl DriveSignal {
    pub fn new(waveform: Waveform, frequency: f64, peak_voltage: f64) -> Self {
        Self {
            waveform,
            frequency,
            peak_voltage,
            phase_offset: 0.0,
            harmonics: Harmonics::Unlimited,
        }
    }

    pub fn with_phase(mut self, phase_offset: f64) -> Self {
        self.phase_offset = phase_offset;
        self
    }

    pub fn with_harmonics(mut self, harmonics: Harmonics) -> Self {
        self.harmonics = harmonics;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check("frequency", self.frequency, |v| v > 0.0, "> 0 Hz")?;
        check(
            "peak_voltage",
            self.peak_voltage,
            |_| true,
            "a finite voltage",
        )?;
        check(
            "phase_offset",
            self.phase_offset,
            |_| true,
            "a finite angle",
        )?;
        if self.harmonics == Harmonics::Kept(0) {
            return Err(invalid("harmonics", "at least one harmonic must be kept"));
        }
        Ok(())
    }

    /// `V(t)` without validation.
    pub fn voltage(&self, t: f64) -> f64 {
        let theta = TAU * self.frequency * t + self.waveform.phase() + self.phase_offset;
        self.peak_voltage * unit_waveform(self.waveform.shape(), self.harmonics, theta)
    }
}

/// Unit-peak waveform at phase `theta`; 0 at `theta = 0` with positive slope.
fn unit_waveform(shape: WaveShape, harmonics: Harmonics, theta: f64) -> f64 {
    match (shape, harmonics) {
        (WaveShape::Sine, _) => theta.sin(),
        (WaveShape::Triangle, Harmonics::Unlimited) => {
            let u = (theta / TAU).rem_euclid(1.0);
            if u < 0.25 {
                4.0 * u
            } else if u < 0.75 {
                2.0 - 4.0 * u
            } else {
                4.0 * u - 4.0
            }
        }
        (WaveShape::Triangle, Harmonics::Kept(h)) => {
            let sum: f64 = (0..h)
                .map(|j| {
                    let k = (2 * j + 1) as f64;
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    sign * (k * theta).sin() / (k * k)
                })
                .sum();
            8.0 / (PI * PI) * sum
        }
        (WaveShape::Sawtooth, Harmonics::Unlimited) => {
            2.0 * (theta / TAU + 0.5).rem_euclid(1.0) - 1.0
        }
        (WaveShape::Sawtooth, Harmonics::Kept(h)) => {
            let sum: f64 = (1..=h)
                .map(|k| {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign * (k as f64 * theta).sin() / k as f64
                })
                .sum();
            2.0 / PI * sum
        }
    }
}

/// Validated drive voltage at time `t`.
pub fn synth_drive(drive: &DriveSignal, t: f64) -> Result<f64> {
    drive.validate()?;
    Ok(drive.voltage(t))
}

/// Sampled early/late pulse pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    /// s.
    pub sample_period: f64,
    /// Time of sample 0, s.
    pub t0: f64,
    pub envelope: Vec<Complex64>,
    /// Early and late bin centres, s.
    pub bin_centers: [f64; 2],
    /// Intensity FWHM of each bin pulse, s.
    pub bin_fwhm: f64,
}

impl PulseTrain {
    pub fn new(
        sample_period: f64,
        t0: f64,
        envelope: Vec<Complex64>,
        bin_centers: [f64; 2],
        bin_fwhm: f64,
    ) -> Result<Self> {
        let train = Self {
            sample_period,
            t0,
            envelope,
            bin_centers,
            bin_fwhm,
        };
        train.validate()?;
        Ok(train)
    }

    /// Two equal Gaussian pulses at `0` and `bin_spacing` on the default grid.
    pub fn gaussian_pair(bin_spacing: f64, fwhm: f64) -> Result<Self> {
        Self::gaussian_pair_with_samples(bin_spacing, fwhm, DEFAULT_SAMPLES)
    }

    /// Two Gaussian pulses on a grid of `samples` points covering about
    /// `[-Δt_b, 2Δt_b)`. The sample period divides `bin_spacing` exactly so
    /// both bins see identical sample offsets.
    pub fn gaussian_pair_with_samples(bin_spacing: f64, fwhm: f64, samples: usize) -> Result<Self> {
        check("bin_spacing", bin_spacing, |v| v > 0.0, "> 0 s")?;
        check("bin_fwhm", fwhm, |v| v > 0.0, "> 0 s")?;
        if samples < 48 {
            return Err(invalid(
                "samples",
                format!("need at least 48 samples, got {samples}"),
            ));
        }
        let per_bin = samples / 3;
        let dt = bin_spacing / per_bin as f64;
        // intensity exp(-t²/2σ²) => amplitude exp(-t²/4σ²)
        let sigma = fwhm / FWHM_IN_SIGMAS_EXACT;
        let envelope = (0..samples)
            .map(|k| {
                let rel = k as i64 - per_bin as i64;
                let te = rel as f64 * dt;
                let tl = (rel - per_bin as i64) as f64 * dt;
                let a = (-te * te / (4.0 * sigma * sigma)).exp()
                    + (-tl * tl / (4.0 * sigma * sigma)).exp();
                Complex64::new(a, 0.0)
            })
            .collect();
        Self::new(
            dt,
            -(per_bin as f64) * dt,
            envelope,
            [0.0, bin_spacing],
            fwhm,
        )
    }

    pub fn validate(&self) -> Result<()> {
        check("sample_period", self.sample_period, |v| v > 0.0, "> 0 s")?;
        check("bin_fwhm", self.bin_fwhm, |v| v > 0.0, "> 0 s")?;
        check("t0", self.t0, |_| true, "a finite time")?;
        if self.sample_period > self.bin_fwhm / 20.0 {
            return Err(invalid(
                "sample_period",
                format!("{} s exceeds bin_fwhm/20", self.sample_period),
            ));
        }
        let [early, late] = self.bin_centers;
        if !(late - early > 4.0 * self.bin_fwhm) {
            return Err(invalid(
                "bin_centers",
                "bins must be separated by more than 4 FWHM",
            ));
        }
        let end = self.time(self.envelope.len().saturating_sub(1));
        let reach = 4.0 * self.bin_fwhm;
        if early - reach < self.t0 || late + reach > end {
            return Err(invalid(
                "bin_centers",
                format!(
                    "pulses extend beyond the sampled window [{:e}, {:e}] s",
                    self.t0, end
                ),
            ));
        }
        let energy = self.energy();
        if !(energy.is_finite() && energy > 0.0) {
            return Err(invalid("envelope", "energy must be finite and non-zero"));
        }
        Ok(())
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.sample_period
    }

    pub fn bin_spacing(&self) -> f64 {
        self.bin_centers[1] - self.bin_centers[0]
    }

    /// `Σ|E|²·dt`.
    pub fn energy(&self) -> f64 {
        self.envelope.iter().map(|e| e.norm_sqr()).sum::<f64>() * self.sample_period
    }
}

/// Exact FWHM-to-σ ratio used to synthesise Gaussian pulses.
const FWHM_IN_SIGMAS_EXACT: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearResult {
    /// Hz.
    pub shift_early: f64,
    pub shift_late: f64,
    /// Fitted phase at each bin centre, wrapped to `[-π, π)`.
    pub phase_early: f64,
    pub phase_late: f64,
    /// `wrap(phase_late − phase_early)`.
    pub differential_phase: f64,
    /// First moment of the whole train's power spectrum, Hz.
    pub centroid_shift: f64,
}

fn check_v_pi(v_pi: f64) -> Result<()> {
    check("v_pi", v_pi, |v| v > 0.0, "> 0 V")
}

fn applied_phases(train: &PulseTrain, drive: &DriveSignal, v_pi: f64) -> Vec<f64> {
    (0..train.envelope.len())
        .map(|k| PI * drive.voltage(train.time(k)) / v_pi)
        .collect()
}

/// Envelope after the modulator.
pub fn modulate(train: &PulseTrain, drive: &DriveSignal, v_pi: f64) -> Result<PulseTrain> {
    train.validate()?;
    drive.validate()?;
    check_v_pi(v_pi)?;
    let phases = applied_phases(train, drive, v_pi);
    let envelope = train
        .envelope
        .iter()
        .zip(&phases)
        .map(|(e, &p)| e * Complex64::from_polar(1.0, p))
        .collect();
    Ok(PulseTrain {
        envelope,
        ..train.clone()
    })
}

/// Weighted least-squares `phase ≈ intercept + slope·(t − centre)`.
fn fit_bin(
    train: &PulseTrain,
    phases: &[f64],
    centre: f64,
    total: f64,
    label: &'static str,
) -> Result<(f64, f64)> {
    let half = 0.5 * train.bin_spacing();
    let mut sw = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let support: Vec<(f64, f64, f64)> = train
        .envelope
        .iter()
        .enumerate()
        .filter_map(|(k, e)| {
            let x = train.time(k) - centre;
            (x.abs() <= half).then(|| (e.norm_sqr(), x, phases[k]))
        })
        .collect();
    for &(w, x, y) in &support {
        sw += w;
        sx += w * x;
        sy += w * y;
    }
    let fraction = sw / total;
    if !(fraction >= MIN_BIN_WEIGHT) {
        return Err(Error::FitDegenerate {
            bin: label,
            fraction,
        });
    }
    let (mx, my) = (sx / sw, sy / sw);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(w, x, y) in &support {
        sxx += w * (x - mx) * (x - mx);
        sxy += w * (x - mx) * (y - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::FitDegenerate {
            bin: label,
            fraction,
        });
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Applies the drive to the train and extracts per-bin shift and phase.
pub fn shear(train: &PulseTrain, drive: &DriveSignal, v_pi: f64) -> Result<ShearResult> {
    train.validate()?;
    drive.validate()?;
    check_v_pi(v_pi)?;
    let phases = applied_phases(train, drive, v_pi);
    let total: f64 = train.envelope.iter().map(|e| e.norm_sqr()).sum();
    let (slope_e, phase_e) = fit_bin(train, &phases, train.bin_centers[0], total, "early")?;
    let (slope_l, phase_l) = fit_bin(train, &phases, train.bin_centers[1], total, "late")?;

    let modulated: Vec<Complex64> = train
        .envelope
        .iter()
        .zip(&phases)
        .map(|(e, &p)| e * Complex64::from_polar(1.0, p))
        .collect();

    Ok(ShearResult {
        shift_early: slope_e / TAU,
        shift_late: slope_l / TAU,
        phase_early: wrap_phase(phase_e),
        phase_late: wrap_phase(phase_l),
        differential_phase: wrap_phase(phase_l - phase_e),
        centroid_shift: spectral_centroid(&modulated, train.sample_period),
    })
}

/// `offset + amplitude·cos(θ + phase)` least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    /// `1 − R²`; zero when the data has no variance and is fitted exactly.
    pub residual: f64,
}

impl SinusoidFit {
    pub fn eval(&self, theta: f64) -> f64 {
        self.offset + self.amplitude * (theta + self.phase).cos()
    }
}

pub fn fit_sinusoid(points: &[(f64, f64)]) -> Result<SinusoidFit> {
    if points.len() < 3 {
        return Err(invalid(
            "n_points",
            "a sinusoid fit needs at least 3 points",
        ));
    }
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for &(theta, y) in points {
        let row = Vector3::new(1.0, theta.cos(), theta.sin());
        ata += row * row.transpose();
        aty += row * y;
    }
    let coef = ata
        .lu()
        .solve(&aty)
        .ok_or_else(|| invalid("n_points", "phase samples do not determine a sinusoid"))?;
    let (c, a, b) = (coef[0], coef[1], coef[2]);
    // a·cosθ + b·sinθ = A·cos(θ + φ) with A cosφ = a, A sinφ = −b
    let fit = SinusoidFit {
        amplitude: a.hypot(b),
        phase: (-b).atan2(a),
        offset: c,
        residual: 0.0,
    };
    let mean = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|&(t, y)| (y - fit.eval(t)).powi(2)).sum();
    let residual = if ss_tot > 0.0 {
        ss_res / ss_tot
    } else if ss_res == 0.0 {
        0.0
    } else {
        1.0
    };
    Ok(SinusoidFit { residual, ..fit })
}

/// Centroid shift tabulated against drive phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSweep {
    /// `(phase_offset, centroid_shift)` in increasing phase order.
    pub points: Vec<(f64, f64)>,
    pub fit: SinusoidFit,
}

/// Phases `2πk/n` for `k = 0..n`.
fn phase_grid(n_points: usize) -> Vec<f64> {
    (0..n_points)
        .map(|k| TAU * k as f64 / n_points as f64)
        .collect()
}

/// Sweeps the drive phase uniformly over `[0, 2π)` and fits a sinusoid to
/// the resulting centroid shifts.
pub fn shift_vs_phase(
    train: &PulseTrain,
    drive: &DriveSignal,
    v_pi: f64,
    n_points: usize,
) -> Result<ShiftSweep> {
    if n_points < 8 {
        return Err(invalid(
            "n_points",
            format!("need at least 8 phases, got {n_points}"),
        ));
    }
    let points = phase_grid(n_points)
        .into_par_iter()
        .map(|phase| {
            let r = shear(train, &drive.with_phase(phase), v_pi)?;
            Ok((phase, r.centroid_shift))
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_sinusoid(&points)?;
    Ok(ShiftSweep { points, fit })
}

/// Differential time-bin phase the analyzer interferometer would see.
pub fn differential_phase_experiment(
    train: &PulseTrain,
    drive: &DriveSignal,
    v_pi: f64,
) -> Result<f64> {
    Ok(shear(train, drive, v_pi)?.differential_phase)
}

/// Drive phase maximising `|differential_phase|`: a grid of `n_points`
/// phases followed by golden-section refinement around the best one.
/// Returns `(phase_offset, differential_phase)`.
pub fn max_differential_phase(
    train: &PulseTrain,
    drive: &DriveSignal,
    v_pi: f64,
    n_points: usize,
) -> Result<(f64, f64)> {
    if n_points < 8 {
        return Err(invalid(
            "n_points",
            format!("need at least 8 phases, got {n_points}"),
        ));
    }
    let eval = |phase: f64| differential_phase_experiment(train, &drive.with_phase(phase), v_pi);
    let grid = phase_grid(n_points)
        .into_par_iter()
        .map(|p| eval(p).map(|d| (p, d)))
        .collect::<Result<Vec<_>>>()?;
    let (mut best_p, mut best_d) = grid[0];
    for &(p, d) in &grid[1..] {
        if d.abs() > best_d.abs() {
            best_p = p;
            best_d = d;
        }
    }

    let step = TAU / n_points as f64;
    let (mut lo, mut hi) = (best_p - step, best_p + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = eval(a)?.abs();
    let mut fb = eval(b)?.abs();
    for _ in 0..40 {
        if fa > fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = eval(a)?.abs();
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = eval(b)?.abs();
        }
    }
    let mid = 0.5 * (lo + hi);
    let d = eval(mid)?;
    if d.abs() > best_d.abs() {
        best_p = mid;
        best_d = d;
    }
    Ok((best_p.rem_euclid(TAU), best_d))
}

/// `(t, V(t), |E(t)|²)` samples for overlay plots of drive and pulses.
pub fn drive_trace(train: &PulseTrain, drive: &DriveSignal) -> Vec<(f64, f64, f64)> {
    train
        .envelope
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let t = train.time(k);
            (t, drive.voltage(t), e.norm_sqr())
        })
        .collect()
}

/// Gaussian pulse-averaging factor `exp(−(2πD)²σ_t²/2)` for sine drive,
/// with `σ_t` the intensity standard deviation.
pub fn gaussian_averaging_factor(drive_freq: f64, fwhm: f64) -> f64 {
    let sigma = fwhm / FWHM_IN_SIGMAS_EXACT;
    (-(TAU * drive_freq * sigma).powi(2) / 2.0).exp()
}
