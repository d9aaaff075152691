//! Acceptance checks, one per criterion. Runs without the libtest harness so
//! every verdict line is printed; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use zalm_cli::config::RunConfig;
use zalm_cli::load_config;
use zalm_cli::sweep::{run_sweep, REFERENCE_MODULATORS};
use zalm_core::montecarlo::convergence_check;
use zalm_core::shear::{gaussian_averaging_factor, max_differential_phase, Harmonics};
use zalm_core::{
    bins_closed_form, build_jsa, compare_modulators, derive_design, max_voltage_offset, purity,
    shear, shift_vs_phase, zalm_rate, DesignParams, Modulator, WaveShape, Waveform,
};

const SHIFT_TOL: f64 = 0.02;
const COEFF_TOL: f64 = 1e-3;
const COMPOSE_TOL: f64 = 1e-6;
const NOISE_TOL: f64 = 0.5e-3;
const LINEAR_TOL: f64 = 1e-9;
const PURITY_TOL: f64 = 0.03;
const REFINE_TOL: f64 = 1e-3;
const DIFF_TOL: f64 = 1e-6;
const DIFF_MIN: f64 = 0.1;
const FIT_TOL: f64 = 1e-6;
const CENTROID_TOL: f64 = 0.01;
const Z_MAX: f64 = 3.0;
const SINE_RATIO_MIN: f64 = 0.8;

struct Check {
    ok: bool,
    detail: String,
}

struct Report(Vec<Check>);

impl Report {
    fn new() -> Self {
        Report(Vec::new())
    }

    fn check(&mut self, ok: bool, detail: impl Into<String>) {
        self.0.push(Check {
            ok,
            detail: detail.into(),
        });
    }

    fn runtime(&mut self, elapsed: Duration, limit: f64) {
        let s = elapsed.as_secs_f64();
        self.check(s < limit, format!("runtime {s:.3} s (limit {limit} s)"));
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn config(preset: Option<&str>, overrides: &[&str]) -> RunConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    load_config(preset, None, &o).unwrap()
}

/// `1 − R²` of the least-squares line through `(x, y)`.
fn linear_misfit(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    1.0 - sxy * sxy / (sxx * syy)
}

fn criterion_1(r: &mut Report) {
    let t = Instant::now();
    let c = config(None, &[]);
    let sine = derive_design(&c.design_params().unwrap()).unwrap();
    let elapsed = t.elapsed();
    r.check(
        rel(sine.drive_freq, 1.378e9) < SHIFT_TOL,
        format!("sine drive {:.4} GHz vs 1.378 GHz", sine.drive_freq / 1e9),
    );
    r.check(
        rel(sine.pump_rate, 459.4e6) < SHIFT_TOL,
        format!("pump rate {:.2} MHz vs 459.4 MHz", sine.pump_rate / 1e6),
    );
    r.runtime(elapsed, 1.0);
}

fn criterion_2(r: &mut Report) {
    let t = Instant::now();
    let table = [
        (WaveShape::Sawtooth, 28.44697),
        (WaveShape::Triangle, 19.14679),
        (WaveShape::Sine, 24.66150),
    ];
    for (shape, expected) in table {
        let k = shape.bins_coefficient();
        r.check(
            rel(k, expected) < COEFF_TOL,
            format!("{} coefficient {k:.6} vs {expected}", shape.name()),
        );
    }

    let mut rng = StdRng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = DesignParams {
            bin_width: rng.random_range(2e9..60e9),
            guard_band: rng.random_range(0.0..5e9),
            tbp: rng.random_range(0.1..=1.0),
            rf_power: rng.random_range(0.01..200.0),
            v_pi: rng.random_range(0.2..10.0),
            waveform: Waveform::from_shape(WaveShape::ALL[rng.random_range(0..3)]),
            containment: 8.0,
        };
        let composed = derive_design(&p).unwrap().bins_real;
        worst = worst.max(rel(bins_closed_form(&p).unwrap(), composed));
    }
    r.check(
        worst < COMPOSE_TOL,
        format!("closed form vs pipeline, worst relative error {worst:.2e} over 1000 draws"),
    );
    r.runtime(t.elapsed(), 5.0);
}

fn criterion_3(r: &mut Report) {
    let dv = max_voltage_offset(5f64.to_radians(), 1.0).unwrap();
    r.check(
        (dv - 27.78e-3).abs() < 0.01e-3,
        format!("offset bound {:.3} mV vs 27.78 mV", dv * 1e3),
    );
    r.check(
        (dv - 28e-3).abs() <= NOISE_TOL,
        format!("within {} mV of 28 mV", NOISE_TOL * 1e3),
    );
}

fn criterion_4(r: &mut Report) {
    let t = Instant::now();
    for (preset, increasing) in [("fig2a", true), ("fig2b", false)] {
        let table = run_sweep(&config(Some(preset), &["sweep.outputs=n"])).unwrap();
        let rows = table.values();
        for (col, shape) in WaveShape::ALL.iter().enumerate() {
            let n: Vec<f64> = rows.iter().map(|row| row[col + 1]).collect();
            let monotone = n
                .windows(2)
                .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
            let dir = if increasing {
                "increasing"
            } else {
                "decreasing"
            };
            r.check(
                monotone,
                format!("{preset}: n_{} strictly {dir}", shape.name()),
            );
        }
        let ordered = rows.iter().all(|row| row[1] > row[2] && row[2] > row[3]);
        r.check(
            ordered,
            format!("{preset}: sawtooth > sine > triangle at every point"),
        );
    }

    let table = run_sweep(&config(
        Some("fig3"),
        &["sweep.series=none", "sweep.outputs=drive_freq,pump_rate,n"],
    ))
    .unwrap();
    let x = table.column(0);
    for (i, name) in [(1, "drive_freq"), (2, "pump_rate")] {
        let m = linear_misfit(&x, &table.column(i));
        r.check(
            m < LINEAR_TOL,
            format!("{name} vs bin width, 1-R^2 = {m:.2e}"),
        );
    }
    let n = table.column(3);
    let i10 = x.iter().position(|&v| (v - 10e9).abs() < 1.0).unwrap();
    let last = x.len() - 1;
    let s10 = (n[i10 + 1] - n[i10 - 1]) / (x[i10 + 1] - x[i10 - 1]);
    let s50 = (n[last] - n[last - 1]) / (x[last] - x[last - 1]);
    r.check(
        s50 < s10,
        format!(
            "dn/dbin_width {:.3}/GHz at 50 GHz < {:.3}/GHz at 10 GHz",
            s50 * 1e9,
            s10 * 1e9
        ),
    );
    r.runtime(t.elapsed(), 5.0);
}

fn criterion_5(r: &mut Report) {
    let cases = [("fig4b", 0.95, false), ("fig4c", 0.985, true)];
    for (preset, target, floor) in cases {
        let params = config(Some(preset), &[]).jsa_params().unwrap();
        let t = Instant::now();
        let p = purity(&build_jsa(&params).unwrap()).unwrap();
        let elapsed = t.elapsed();
        if floor {
            r.check(p >= target, format!("{preset}: purity {p:.4} >= {target}"));
        } else {
            r.check(
                (p - target).abs() <= PURITY_TOL,
                format!("{preset}: purity {p:.4} vs {target} +/- {PURITY_TOL}"),
            );
        }
        r.runtime(elapsed, 10.0);

        let fine = zalm_core::JsaParams {
            grid_size: 2 * params.grid_size,
            ..params
        };
        let pf = purity(&build_jsa(&fine).unwrap()).unwrap();
        r.check(
            (pf - p).abs() < REFINE_TOL,
            format!(
                "{preset}: grid {} -> {} changes purity by {:.2e}",
                params.grid_size,
                fine.grid_size,
                (pf - p).abs()
            ),
        );
    }
}

fn criterion_6(r: &mut Report) {
    let t = Instant::now();
    let base = config(Some("fig10"), &[]);
    let train = base.pulse_train().unwrap();
    let dtb = base.shear.bin_spacing;
    let v_pi = base.shear.v_pi;
    let phases: Vec<f64> = (0..48)
        .map(|k| 2.0 * PI * (k as f64 + 0.37) / 48.0)
        .collect();

    for m in [1.0, 2.0, 3.0] {
        for shape in WaveShape::ALL {
            let drive = zalm_core::DriveSignal::new(
                Waveform::from_shape(shape),
                m / dtb,
                base.shear.peak_voltage,
            );
            let worst = phases
                .iter()
                .map(|&ph| {
                    shear(&train, &drive.with_phase(ph), v_pi)
                        .unwrap()
                        .differential_phase
                        .abs()
                })
                .fold(0.0, f64::max);
            r.check(
                worst < DIFF_TOL,
                format!(
                    "D*dt_b = {m}, {}: max |differential phase| {worst:.2e} rad",
                    shape.name()
                ),
            );
        }
    }

    let c9 = config(Some("fig9"), &[]);
    let (_, d) = max_differential_phase(&train, &c9.drive().unwrap(), v_pi, 32).unwrap();
    r.check(
        d.abs() > DIFF_MIN,
        format!("D*dt_b = 1.75: max |differential phase| {:.3} rad", d.abs()),
    );

    for preset in ["fig8", "fig7"] {
        let c = config(Some(preset), &[]);
        let drive = c.drive().unwrap();
        let sweep = shift_vs_phase(&train, &drive, v_pi, c.shear.points).unwrap();
        let harmonics = match drive.harmonics {
            Harmonics::Unlimited => "all harmonics".to_string(),
            Harmonics::Kept(h) => format!("{h} harmonic"),
        };
        r.check(
            sweep.fit.residual < FIT_TOL,
            format!(
                "{preset} {} ({harmonics}): sinusoid fit 1-R^2 = {:.2e}",
                drive.waveform.shape().name(),
                sweep.fit.residual
            ),
        );
    }
    r.runtime(t.elapsed(), 20.0);
}

fn criterion_7(r: &mut Report) {
    let c = config(
        None,
        &[
            "shear.pulse_fwhm=200ps",
            "shear.peak_voltage=2.5V",
            "shear.v_pi=5V",
            "shear.waveform=sine",
            "shear.drive_freq=952.381MHz",
        ],
    );
    let s = &c.shear;
    let res = shear(&c.pulse_train().unwrap(), &c.drive().unwrap(), s.v_pi).unwrap();
    let expected = PI * s.peak_voltage * s.drive_freq / s.v_pi
        * gaussian_averaging_factor(s.drive_freq, s.pulse_fwhm);
    r.check(
        rel(res.centroid_shift, expected) < CENTROID_TOL,
        format!(
            "centroid shift {:.4} GHz vs averaged slope {:.4} GHz",
            res.centroid_shift / 1e9,
            expected / 1e9
        ),
    );
    r.check(
        (res.centroid_shift - 1.31e9).abs() < 0.01e9,
        format!(
            "centroid shift {:.3} GHz vs 1.31 GHz",
            res.centroid_shift / 1e9
        ),
    );
}

fn criterion_8(r: &mut Report) {
    let c = config(
        None,
        &[
            "rates.pair_prob=0.01",
            "rates.circulator_loss=0dB",
            "rates.insertion_loss=0dB",
            "sim.pulses=1000000",
            "sim.workers=1",
            "sim.seed=8",
        ],
    );
    let sim = c.sim_config().unwrap();
    let oracle = zalm_rate(&sim.design, &sim.rate_params).unwrap();
    let t = Instant::now();
    let rep = convergence_check(&sim, &oracle).unwrap();
    let elapsed = t.elapsed();
    r.check(
        sim.design.bins_usable == 17,
        format!("{} usable bins", sim.design.bins_usable),
    );
    r.check(rep.z_score.abs() < Z_MAX, format!("z = {:.3}", rep.z_score));
    let res = &rep.result;
    let gain = res.estimated_rate / oracle.basic_rate;
    let gain_se = res.std_error / oracle.basic_rate;
    let bins = sim.design.bins_usable as f64;
    r.check(
        (gain - bins).abs() < Z_MAX * gain_se,
        format!(
            "estimated/basic {gain:.3} vs {bins} (3 SE = {:.3})",
            Z_MAX * gain_se
        ),
    );
    r.runtime(elapsed, 30.0);
}

fn criterion_9(r: &mut Report) {
    let c = config(Some("fig5b"), &[]);
    let design = c.design_params().unwrap();
    let rates = c.rate_params().unwrap();
    let at = |p: f64| {
        let d = DesignParams {
            rf_power: p,
            ..design
        };
        compare_modulators(&d, &rates, &REFERENCE_MODULATORS).unwrap()
    };
    let zalm = |m: &zalm_core::rates::ModulatorRate| m.report.zalm_rate;

    let low: Vec<f64> = (0..=40).map(|i| 0.1 + 0.01 * i as f64).collect();
    let losing: Vec<f64> = low
        .iter()
        .copied()
        .filter(|&p| {
            let m = at(p);
            zalm(&m[0]) <= zalm(&m[1])
        })
        .collect();
    let detail = match (losing.first(), losing.last()) {
        (Some(a), Some(b)) => format!(
            "{} outrates {} at P <= 0.5 W: fails at {} of {} powers, {a:.2}..{b:.2} W",
            Modulator::CONVENTIONAL.label(),
            Modulator::THIN_FILM.label(),
            losing.len(),
            low.len()
        ),
        _ => format!(
            "{} outrates {} at every P in [0.1, 0.5] W",
            Modulator::CONVENTIONAL.label(),
            Modulator::THIN_FILM.label()
        ),
    };
    r.check(losing.is_empty(), detail);

    let powers: Vec<f64> = (0..=60)
        .map(|i| 0.1 * 1000f64.powf(i as f64 / 60.0))
        .collect();
    let hero_ok = powers.iter().all(|&p| {
        let m = at(p);
        zalm(&m[2]) >= zalm(&m[0]) && zalm(&m[2]) >= zalm(&m[1])
    });
    r.check(
        hero_ok,
        format!(
            "{} dominates over P in [0.1, 100] W",
            Modulator::HERO.label()
        ),
    );

    let defaults = RunConfig::default();
    let rate_for = |shape: WaveShape| {
        let mut c = defaults.clone();
        c.waveform = shape;
        let d = derive_design(&c.design_params().unwrap()).unwrap();
        zalm_rate(&d, &c.rate_params().unwrap()).unwrap().zalm_rate
    };
    let ratio = rate_for(WaveShape::Sine) / rate_for(WaveShape::Sawtooth);
    r.check(
        ratio >= SINE_RATIO_MIN,
        format!("sine/sawtooth rate ratio {ratio:.3} at defaults"),
    );
}

fn criterion_10(r: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_zalm"))
            .args([
                "sim",
                "--seed",
                "1234",
                "--workers",
                "4",
                "--set",
                "sim.pulses=200000",
            ])
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        let bins = out.with_file_name(format!("{name}_bins.csv"));
        (std::fs::read(&out).unwrap(), std::fs::read(bins).unwrap())
    };
    let a = run("first");
    let b = run("second");
    r.check(
        a.0 == b.0,
        format!("report files identical ({} bytes)", a.0.len()),
    );
    r.check(
        a.1 == b.1,
        format!("per-bin files identical ({} bytes)", a.1.len()),
    );
}

type Criterion = fn(&mut Report);

fn main() -> ExitCode {
    let criteria: [(u32, Criterion); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = Vec::new();
    for (n, f) in criteria {
        let mut report = Report::new();
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| f(&mut report)));
        if let Err(e) = outcome {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            report.check(false, format!("panicked: {msg}"));
        }
        let ok = report.0.iter().all(|c| c.ok);
        println!("acceptance {n}: {}", if ok { "PASS" } else { "FAIL" });
        for c in &report.0 {
            println!("    [{}] {}", if c.ok { "ok" } else { "FAIL" }, c.detail);
        }
        if !ok {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
