//! Subcommand bodies. Each builds its full output in memory; nothing is
//! written until the command has succeeded.

use std::f64::consts::TAU;
use std::path::Path;

use zalm_core::design::{bins_closed_form, max_voltage_offset};
use zalm_core::jsa::{fwhm, schmidt_coefficients};
use zalm_core::shear::{
    drive_trace, fit_sinusoid, gaussian_averaging_factor, max_differential_phase,
};
use zalm_core::{
    build_jsa, compare_modulators, convergence_check, derive_design, marginal, rates, shear,
    zalm_rate, Axis, WaveShape,
};

use crate::config::{config_error, RunConfig};
use crate::output::{fmt_num, pgm, sibling, Artifact, Table};
use crate::sweep::{ranking, run_sweep, REFERENCE_MODULATORS};
use crate::units::{header, Dimension};
use crate::CliError;

/// Printed text, warnings for stderr, and files to write.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub warnings: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    fn line(&mut self, name: &str, dim: Dimension, v: f64) {
        self.stdout
            .push_str(&format!("{} = {}\n", header(name, dim), fmt_num(v)));
    }

    fn text(&mut self, name: &str, v: impl std::fmt::Display) {
        self.stdout.push_str(&format!("{name} = {v}\n"));
    }
}

use Dimension::*;

pub fn design(c: &RunConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    let params = c.design_params()?;
    let d = derive_design(&params).map_err(|e| config_error(e, "design"))?;
    let mut o = Outcome::default();
    o.text("waveform", params.waveform.shape().name());
    if params.waveform.shape() == WaveShape::Sine {
        o.line("sine_phase", Angle, params.waveform.phase());
    }
    o.line("bin_spacing", Frequency, d.bin_spacing);
    o.line("bin_pulse_width", Time, d.bin_pulse_width);
    o.line("time_bin_spacing", Time, d.time_bin_spacing);
    o.line("drive_freq", Frequency, d.drive_freq);
    o.line("drive_multiple", Dimensionless, d.drive_multiple() as f64);
    o.line("pump_rate", Frequency, d.pump_rate);
    o.line("peak_voltage", Voltage, d.peak_voltage);
    o.line("freq_shift", Frequency, d.freq_shift);
    o.line("bins_real", Dimensionless, d.bins_real);
    o.line("bins_usable", Dimensionless, d.bins_usable as f64);
    o.line("max_offset", Dimensionless, d.max_offset() as f64);
    o.line(
        "bins_closed_form",
        Dimensionless,
        bins_closed_form(&params).map_err(|e| config_error(e, "design"))?,
    );
    o.line("phase_tolerance", Angle, c.phase_tolerance);
    o.line(
        "max_voltage_offset",
        Voltage,
        max_voltage_offset(c.phase_tolerance, params.v_pi)
            .map_err(|e| config_error(e, "design.phase_tolerance"))?,
    );
    if d.freq_shift == 0.0 {
        o.warnings
            .push("zero frequency shift; only the centre bin is usable".into());
    }

    let mut rows = Vec::new();
    for shape in WaveShape::ALL {
        let mut v = c.clone();
        v.waveform = shape;
        let p = derive_design(&v.design_params()?).map_err(|e| config_error(e, "design"))?;
        rows.push(vec![
            p.bins_real,
            p.bins_usable as f64,
            p.drive_freq,
            p.freq_shift,
        ]);
    }
    let headers = vec![
        header("n", Dimensionless),
        header("bins", Dimensionless),
        header("drive_freq", Frequency),
        header("freq_shift", Frequency),
    ];
    let table = Table::numeric(headers, rows);
    o.stdout.push('\n');
    let csv = table.to_csv();
    let mut lines = csv.lines();
    o.stdout
        .push_str(&format!("waveform,{}\n", lines.next().unwrap_or_default()));
    for (shape, line) in WaveShape::ALL.iter().zip(lines) {
        o.stdout.push_str(&format!("{},{line}\n", shape.name()));
    }
    if let Some(path) = out {
        o.artifacts.push(Artifact::new(path, o.stdout.clone()));
    }
    Ok(o)
}

pub fn sweep(c: &RunConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    let table = run_sweep(c)?;
    let csv = table.to_csv();
    let mut o = Outcome::default();
    if c.rates.pair_prob > rates::PAIR_PROB_VALIDITY {
        o.warnings.push(format!(
            "pair_prob {} exceeds {}; multi-pair events are not modelled",
            c.rates.pair_prob,
            rates::PAIR_PROB_VALIDITY
        ));
    }
    match out {
        Some(path) => {
            o.stdout = format!(
                "wrote {} rows x {} columns to {}\n",
                table.values().len(),
                table.headers.len(),
                path.display()
            );
            o.artifacts.push(Artifact::new(path, csv));
        }
        None => o.stdout = csv,
    }
    Ok(o)
}

pub fn jsa(c: &RunConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    let p = c.jsa_params()?;
    let grid = build_jsa(&p).map_err(|e| config_error(e, "jsa"))?;
    let s = schmidt_coefficients(&grid)?;
    let purity: f64 = s.iter().map(|v| v.powi(4)).sum();
    let signal = marginal(&grid, Axis::Signal);
    let idler = marginal(&grid, Axis::Idler);
    let width = fwhm(&grid.signal_axis, &signal).unwrap_or(f64::NAN);

    let mut o = Outcome::default();
    o.line("purity", Dimensionless, purity);
    o.line("schmidt_number", Dimensionless, 1.0 / purity);
    o.line("marginal_fwhm", Frequency, width);
    o.line("filter_fwhm", Frequency, p.filter.fwhm);
    o.line("pump_bandwidth", Frequency, p.pump_fwhm_bandwidth);

    if let Some(path) = out {
        let intensity = grid.intensity();
        let mut rows = Vec::with_capacity(p.grid_size * p.grid_size);
        for (i, &ws) in grid.signal_axis.iter().enumerate() {
            for (j, &wi) in grid.idler_axis.iter().enumerate() {
                rows.push(vec![ws, wi, intensity[(i, j)]]);
            }
        }
        let headers = vec![
            header("signal_detuning", Frequency),
            header("idler_detuning", Frequency),
            header("intensity", Dimensionless),
        ];
        o.artifacts
            .push(Artifact::new(path, Table::numeric(headers, rows).to_csv()));
        // image rows run from high to low idler detuning, columns along signal
        let n = p.grid_size;
        o.artifacts.push(Artifact::new(
            sibling(path, "", "pgm"),
            pgm(n, n, |r, col| intensity[(col, n - 1 - r)]),
        ));
        let rows = grid
            .signal_axis
            .iter()
            .enumerate()
            .map(|(k, &w)| vec![w, signal[k], idler[k], p.filter.transmission(w)])
            .collect();
        let headers = vec![
            header("detuning", Frequency),
            header("signal_marginal", Dimensionless),
            header("idler_marginal", Dimensionless),
            header("filter_transmission", Dimensionless),
        ];
        o.artifacts.push(Artifact::new(
            sibling(path, "_marginal", "csv"),
            Table::numeric(headers, rows).to_csv(),
        ));
    }
    Ok(o)
}

pub fn rates(c: &RunConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    let dp = c.design_params()?;
    let rp = c.rate_params()?;
    let d = derive_design(&dp).map_err(|e| config_error(e, "design"))?;
    let r = zalm_rate(&d, &rp).map_err(|e| config_error(e, "rates"))?;

    let mut o = Outcome::default();
    if let Some(w) = rp.validity_warning() {
        o.warnings.push(w);
    }
    o.line("pump_rate", Frequency, d.pump_rate);
    o.line("bins_used", Dimensionless, r.bins_used as f64);
    o.line("basic_rate", Frequency, r.basic_rate);
    o.line("zalm_rate", Frequency, r.zalm_rate);
    o.line("gain", Dimensionless, r.zalm_rate / r.basic_rate);
    let cmp = compare_modulators(&dp, &rp, &REFERENCE_MODULATORS)?;
    for m in &cmp {
        o.line(
            &format!("zalm_rate_{}", m.modulator.label()),
            Frequency,
            m.report.zalm_rate,
        );
    }
    o.text("ranking", ranking(&cmp));

    if let Some(path) = out {
        let rows = r
            .per_bin_rates
            .iter()
            .enumerate()
            .map(|(i, &rate)| {
                vec![
                    i as f64,
                    rates::bin_offset(i) as f64,
                    rates::chain_depth(i) as f64,
                    rate,
                ]
            })
            .collect();
        let headers = vec![
            header("index", Dimensionless),
            header("offset", Dimensionless),
            header("chain_depth", Dimensionless),
            header("rate", Frequency),
        ];
        o.artifacts
            .push(Artifact::new(path, Table::numeric(headers, rows).to_csv()));
    }
    Ok(o)
}

pub fn sim(c: &RunConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    let cfg = c.sim_config()?;
    let oracle = zalm_rate(&cfg.design, &cfg.rate_params).map_err(|e| config_error(e, "rates"))?;
    let rep = convergence_check(&cfg, &oracle)?;
    let res = &rep.result;

    let mut o = Outcome::default();
    if let Some(w) = cfg.rate_params.validity_warning() {
        o.warnings.push(w);
    }
    o.line("pulses", Dimensionless, res.pulses_run as f64);
    o.text("seed [1]", res.seed_used);
    o.line("workers", Dimensionless, res.workers as f64);
    o.line("bins_used", Dimensionless, res.heralds_per_bin.len() as f64);
    o.line("heralds", Dimensionless, res.total_heralds() as f64);
    o.line("coincidences", Dimensionless, res.coincidences as f64);
    o.line("estimated_rate", Frequency, res.estimated_rate);
    o.line("std_error", Frequency, res.std_error);
    o.line("analytic_rate", Frequency, rep.analytic_rate);
    o.line("z_score", Dimensionless, rep.z_score);
    o.text("low_power", rep.low_power);
    o.text("passed", rep.passed);
    if rep.low_power {
        o.warnings
            .push("fewer than 10 expected coincidences; the comparison is under-powered".into());
    }

    if let Some(path) = out {
        o.artifacts.push(Artifact::new(path, o.stdout.clone()));
        let rows = res
            .heralds_per_bin
            .iter()
            .enumerate()
            .map(|(i, &h)| vec![i as f64, rates::bin_offset(i) as f64, h as f64])
            .collect();
        let headers = vec![
            header("index", Dimensionless),
            header("offset", Dimensionless),
            header("heralds", Dimensionless),
        ];
        o.artifacts.push(Artifact::new(
            sibling(path, "_bins", "csv"),
            Table::numeric(headers, rows).to_csv(),
        ));
    }
    Ok(o)
}

/// Differential phases below this are reported as zero to numerical
/// tolerance.
pub const DIFFERENTIAL_TOLERANCE: f64 = 1e-6;

pub fn shear_cmd(c: &RunConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    let train = c.pulse_train()?;
    let drive = c.drive()?;
    let s = &c.shear;
    let v_pi = s.v_pi;
    let at = |phase: f64| shear(&train, &drive.with_phase(phase), v_pi);

    let r = at(s.phase)?;
    let mut o = Outcome::default();
    o.line("drive_freq", Frequency, s.drive_freq);
    o.line(
        "drive_multiple",
        Dimensionless,
        s.drive_freq * s.bin_spacing,
    );
    o.line("phase", Angle, s.phase);
    o.line("shift_early", Frequency, r.shift_early);
    o.line("shift_late", Frequency, r.shift_late);
    o.line("phase_early", Angle, r.phase_early);
    o.line("phase_late", Angle, r.phase_late);
    o.line("differential_phase", Angle, r.differential_phase);
    o.line("centroid_shift", Frequency, r.centroid_shift);
    if s.waveform == WaveShape::Sine {
        let expected = std::f64::consts::PI * s.peak_voltage * s.drive_freq / v_pi
            * gaussian_averaging_factor(s.drive_freq, s.pulse_fwhm);
        o.line("averaged_peak_shift", Frequency, expected);
    }

    let mut rows = Vec::new();
    if s.points == 0 {
        rows.push(vec![
            s.phase,
            r.shift_early,
            r.shift_late,
            r.centroid_shift,
            r.differential_phase,
        ]);
    } else {
        let n = s.points;
        for k in 0..n {
            let phase = TAU * k as f64 / n as f64;
            let p = at(phase)?;
            rows.push(vec![
                phase,
                p.shift_early,
                p.shift_late,
                p.centroid_shift,
                p.differential_phase,
            ]);
        }
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[3])).collect();
        let fit = fit_sinusoid(&points)?;
        o.line("fit_amplitude", Frequency, fit.amplitude);
        o.line("fit_phase", Angle, fit.phase);
        o.line("fit_offset", Frequency, fit.offset);
        o.line("fit_residual", Dimensionless, fit.residual);
        let grid_max = rows.iter().map(|r| r[4].abs()).fold(0.0, f64::max);
        let (best_phase, best) = max_differential_phase(&train, &drive, v_pi, n)?;
        let max = grid_max.max(best.abs());
        o.line("max_differential_phase", Angle, max);
        o.line("max_differential_at_phase", Angle, best_phase);
        if max < DIFFERENTIAL_TOLERANCE {
            o.stdout.push_str(&format!(
                "differential_phase < {DIFFERENTIAL_TOLERANCE:e} rad at every drive phase\n"
            ));
        }
    }

    if let Some(path) = out {
        let headers = vec![
            header("phase", Angle),
            header("shift_early", Frequency),
            header("shift_late", Frequency),
            header("centroid_shift", Frequency),
            header("differential_phase", Angle),
        ];
        o.artifacts
            .push(Artifact::new(path, Table::numeric(headers, rows).to_csv()));
        let trace = drive_trace(&train, &drive.with_phase(s.phase))
            .into_iter()
            .map(|(t, v, i)| vec![t, v, i])
            .collect();
        let headers = vec![
            header("time", Time),
            header("voltage", Voltage),
            header("intensity", Dimensionless),
        ];
        o.artifacts.push(Artifact::new(
            sibling(path, "_trace", "csv"),
            Table::numeric(headers, trace).to_csv(),
        ));
    }
    Ok(o)
}
