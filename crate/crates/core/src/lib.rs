//! Design and simulation toolkit for zero-added-loss multiplexed (ZALM)
//! heralded entanglement sources built from time-bin qubits and
//! electro-optic spectral shearing.
//!
//! - [`design`]: closed-form multiplexing design equations and the
//!   voltage-noise phase bound.
//! - [`shear`]: time-domain simulation of serrodyne shearing applied to a
//!   pair of time-bin pulses.
//! - [`jsa`]: joint spectral amplitude construction and Schmidt purity.
//! - [`rates`]: analytic heralded coincidence rates.
//! - [`montecarlo`]: event-level simulator cross-checking [`rates`].

pub mod design;
pub mod error;
pub mod jsa;
pub mod montecarlo;
pub mod rates;
pub mod shear;
mod spectrum;

pub use design::{
    bins_closed_form, derive_design, max_voltage_offset, phase_error_from_offset, DesignParams,
    DesignPoint, NoiseSpec, WaveShape, Waveform,
};
pub use error::{Error, Result};
pub use jsa::{build_jsa, marginal, purity, Axis, FilterSpec, JsaGrid, JsaParams};
pub use montecarlo::{convergence_check, run, ConvergenceReport, SimConfig, SimResult};
pub use rates::{basic_rate, compare_modulators, zalm_rate, Modulator, RateParams, RateReport};
pub use shear::{
    differential_phase_experiment, shear, shift_vs_phase, DriveSignal, Harmonics, PulseTrain,
    ShearResult, ShiftSweep,
};

/// Wraps an angle into `[-π, π)`.
pub fn wrap_phase(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let w = x - TAU * ((x + PI) / TAU).floor();
    // (x + π)/2π can round up to an integer for x just below π
    if w >= PI {
        w - TAU
    } else {
        w
    }
}
