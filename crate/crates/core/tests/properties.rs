use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use zalm_core::design::{
    bins_closed_form, derive_design, DesignParams, DesignPoint, WaveShape, Waveform,
};
use zalm_core::jsa::{purity, JsaGrid};
use zalm_core::montecarlo::{run, SimConfig};
use zalm_core::rates::{basic_rate, zalm_rate, RateParams};
use zalm_core::shear::{modulate, shear, DriveSignal, Harmonics, PulseTrain};
use zalm_core::{max_voltage_offset, phase_error_from_offset};

fn shape() -> impl Strategy<Value = WaveShape> {
    prop_oneof![
        Just(WaveShape::Sawtooth),
        Just(WaveShape::Triangle),
        Just(WaveShape::Sine)
    ]
}

prop_compose! {
    fn design_params()(
        bin_width in 1e9..100e9f64,
        guard_band in 0.0..10e9f64,
        tbp in 0.1..=1.0f64,
        rf_power in 0.01..100.0f64,
        v_pi in 0.2..10.0f64,
        shape in shape(),
    ) -> DesignParams {
        DesignParams {
            bin_width,
            guard_band,
            tbp,
            rf_power,
            v_pi,
            waveform: Waveform::from_shape(shape),
            containment: 8.0,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn composition_matches_closed_form(p in design_params()) {
        let composed = derive_design(&p).unwrap().bins_real;
        let closed = bins_closed_form(&p).unwrap();
        prop_assert!(rel(composed, closed) < 1e-6, "{composed} vs {closed}");
    }
}

proptest! {
    #[test]
    fn bins_increase_with_power_and_fall_with_v_pi(p in design_params(), k in 1.01..4.0f64) {
        let n = derive_design(&p).unwrap().bins_real;
        let more_power = derive_design(&DesignParams { rf_power: p.rf_power * k, ..p }).unwrap().bins_real;
        let higher_v_pi = derive_design(&DesignParams { v_pi: p.v_pi * k, ..p }).unwrap().bins_real;
        prop_assert!(more_power > n);
        prop_assert!(higher_v_pi < n);
    }

    #[test]
    fn waveform_ordering(p in design_params()) {
        let n = |s| derive_design(&p.with_waveform(Waveform::from_shape(s))).unwrap().bins_real;
        prop_assert!(n(WaveShape::Sawtooth) > n(WaveShape::Sine));
        prop_assert!(n(WaveShape::Sine) > n(WaveShape::Triangle));
    }

    #[test]
    fn excess_bins_scale_as_sqrt_power(p in design_params()) {
        let n1 = derive_design(&p).unwrap().bins_real - 1.0;
        let n2 = derive_design(&DesignParams { rf_power: 2.0 * p.rf_power, ..p }).unwrap().bins_real - 1.0;
        prop_assert!(rel(n2 / n1, 2f64.sqrt()) < 1e-12);
    }

    #[test]
    fn rates_linear_in_bin_width(p in design_params(), k in 0.2..5.0f64) {
        let a = derive_design(&p).unwrap();
        let b = derive_design(&DesignParams { bin_width: k * p.bin_width, ..p }).unwrap();
        prop_assert!(rel(b.drive_freq, k * a.drive_freq) < 1e-12);
        prop_assert!(rel(b.pump_rate, k * a.pump_rate) < 1e-12);
        let d_sine = derive_design(&p.with_waveform(Waveform::sine(0.0))).unwrap().drive_freq;
        let d_saw = derive_design(&p.with_waveform(Waveform::sawtooth())).unwrap().drive_freq;
        prop_assert!(rel(a.pump_rate, d_sine / 3.0) < 1e-12);
        prop_assert!(rel(a.pump_rate, d_saw / 9.0) < 1e-12);
    }

    #[test]
    fn design_point_invariants(p in design_params()) {
        let d = derive_design(&p).unwrap();
        prop_assert!(d.bin_spacing >= p.bin_width);
        prop_assert!(rel(d.bin_pulse_width * p.bin_width, p.tbp) < 1e-12);
        prop_assert!(rel(d.time_bin_spacing, 24.0 / 2.355 * d.bin_pulse_width) < 1e-12);
        let m = d.drive_freq * d.time_bin_spacing;
        prop_assert!((m - m.round()).abs() < 1e-9 && m.round() >= 1.0);
        prop_assert!(rel(d.pump_rate * 3.0 * d.time_bin_spacing, 1.0) < 1e-12);
        prop_assert!(d.bins_usable % 2 == 1);
        prop_assert!(d.bins_usable as f64 <= d.bins_real);
        prop_assert!(d.bins_usable as f64 + 2.0 > d.bins_real);
    }

    #[test]
    fn noise_round_trip(phase in 0.0..PI, v_pi in 0.1..20.0f64) {
        let dv = max_voltage_offset(phase, v_pi).unwrap();
        let back = phase_error_from_offset(dv, v_pi).unwrap();
        prop_assert!((back - phase).abs() <= 1e-12 * phase.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn rate_scalings(p in design_params(), pp in 0.001..0.1f64, eta in 0.05..1.0f64) {
        let d = derive_design(&p).unwrap();
        let base = RateParams { pair_prob: pp, ..RateParams::default() };
        let r = zalm_rate(&d, &base).unwrap();
        let half_a = zalm_rate(&d, &RateParams { eta_a: 0.5, ..base }).unwrap();
        prop_assert!(rel(half_a.zalm_rate, 0.5 * r.zalm_rate) < 1e-12);
        let eta_b = zalm_rate(&d, &RateParams { eta_b: eta, ..base }).unwrap();
        prop_assert!(rel(eta_b.zalm_rate, eta * r.zalm_rate) < 1e-12);
        let herald = zalm_rate(&d, &RateParams { herald_eta: eta, ..base }).unwrap();
        prop_assert!(rel(herald.zalm_rate, eta * eta * r.zalm_rate) < 1e-12);
        let double_pp = zalm_rate(&d, &RateParams { pair_prob: 2.0 * pp, ..base }).unwrap();
        prop_assert!(rel(double_pp.zalm_rate, 4.0 * r.zalm_rate) < 1e-12);
        let faster = DesignPoint { pump_rate: 2.0 * d.pump_rate, ..d };
        let r2 = zalm_rate(&faster, &base).unwrap();
        prop_assert!(rel(r2.zalm_rate, 2.0 * r.zalm_rate) < 1e-12);
    }

    #[test]
    fn lossless_gain_equals_bins(p in design_params(), pp in 0.0001..0.1f64) {
        let d = derive_design(&p).unwrap();
        let lp = RateParams::lossless(pp);
        let r = zalm_rate(&d, &lp).unwrap();
        prop_assert!(rel(r.zalm_rate, d.bins_usable as f64 * basic_rate(&d, &lp).unwrap()) < 1e-12);
    }

    #[test]
    fn rate_nondecreasing_in_bins(p in design_params()) {
        let d = derive_design(&p).unwrap();
        let more = DesignPoint { bins_usable: d.bins_usable + 2, ..d };
        let params = RateParams::default();
        prop_assert!(zalm_rate(&more, &params).unwrap().zalm_rate >= zalm_rate(&d, &params).unwrap().zalm_rate);
    }
}

#[test]
fn pair_probability_tenfold_is_hundredfold_rate() {
    let d = derive_design(&DesignParams::default()).unwrap();
    let low = zalm_rate(
        &d,
        &RateParams {
            pair_prob: 0.01,
            ..RateParams::default()
        },
    )
    .unwrap();
    let high = zalm_rate(
        &d,
        &RateParams {
            pair_prob: 0.1,
            ..RateParams::default()
        },
    )
    .unwrap();
    assert!(rel(high.zalm_rate / low.zalm_rate, 100.0) < 1e-12);
}

const DTB: f64 = 2.1e-9;

fn train() -> PulseTrain {
    PulseTrain::gaussian_pair(DTB, 200e-12).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integer_drive_multiples_leave_no_differential_phase(
        multiple in 1u32..=3,
        phase in 0.0..TAU,
        shape in shape(),
        peak in 0.1..5.0f64,
    ) {
        let drive = DriveSignal::new(Waveform::from_shape(shape), multiple as f64 / DTB, peak)
            .with_phase(phase);
        let r = shear(&train(), &drive, 3.0).unwrap();
        prop_assert!(r.differential_phase.abs() < 1e-6, "{r:?}");
        prop_assert!((r.shift_early - r.shift_late).abs() <= 1e-9 * r.shift_early.abs().max(1.0));
    }

    #[test]
    fn modulation_conserves_energy(
        freq in 0.1e9..3e9f64,
        phase in 0.0..TAU,
        shape in shape(),
        peak in 0.0..8.0f64,
        harmonics in prop_oneof![Just(Harmonics::Unlimited), (1u32..6).prop_map(Harmonics::Kept)],
    ) {
        let t = train();
        let drive = DriveSignal::new(Waveform::from_shape(shape), freq, peak)
            .with_phase(phase)
            .with_harmonics(harmonics);
        let m = modulate(&t, &drive, 2.0).unwrap();
        prop_assert!(rel(m.energy(), t.energy()) < 1e-12);
    }

    #[test]
    fn differential_phase_is_wrapped(freq in 0.2e9..2e9f64, phase in 0.0..TAU, peak in 0.0..20.0f64) {
        let drive = DriveSignal::new(Waveform::sine(0.0), freq, peak).with_phase(phase);
        let r = shear(&train(), &drive, 1.0).unwrap();
        prop_assert!((-PI..PI).contains(&r.differential_phase));
        prop_assert!((-PI..PI).contains(&r.phase_early));
        prop_assert!((-PI..PI).contains(&r.phase_late));
    }
}

fn random_grid(values: &[(f64, f64)], rows: usize) -> JsaGrid {
    let cols = values.len() / rows;
    let m = nalgebra::DMatrix::from_fn(rows, cols, |i, j| {
        let (re, im) = values[i * cols + j];
        num_complex::Complex64::new(re, im)
    });
    JsaGrid::from_amplitudes(m, vec![0.0; rows], vec![0.0; cols]).unwrap()
}

proptest! {
    #[test]
    fn purity_invariances(
        values in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 24),
        rows in prop_oneof![Just(4usize), Just(6), Just(3)],
        global in 0.0..TAU,
    ) {
        prop_assume!(values.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3));
        let g = random_grid(&values, rows);
        let p = purity(&g).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0 + 1e-12);
        prop_assert!((purity(&g.transpose()).unwrap() - p).abs() < 1e-12);
        let rotated = JsaGrid {
            values: g.values.map(|v| v * num_complex::Complex64::from_polar(1.0, global)),
            ..g.clone()
        };
        prop_assert!((purity(&rotated).unwrap() - p).abs() < 1e-12);
        // Schmidt weights satisfy Σλ² = ‖A·A†‖²_F for unit-norm A
        let rho = &g.values * g.values.adjoint();
        prop_assert!((rho.norm_squared() - p).abs() < 1e-12);
    }
}

fn sim(params: RateParams, seed: u64, workers: usize) -> zalm_core::SimResult {
    let design = derive_design(&DesignParams {
        rf_power: 1.0,
        ..DesignParams::default()
    })
    .unwrap();
    run(&SimConfig {
        design,
        rate_params: params,
        n_pulses: 20_000,
        seed,
        workers,
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulation_monotone_in_efficiencies(
        seed in any::<u64>(),
        eta in 0.3..1.0f64,
        drop in 0.05..0.3f64,
        which in 0usize..4,
    ) {
        let base = RateParams {
            pair_prob: 0.1,
            eta_a: eta,
            eta_b: eta,
            herald_eta: eta,
            bsm_eff: 0.5,
            ..RateParams::default()
        };
        let mut worse = base;
        match which {
            0 => worse.eta_a -= drop,
            1 => worse.eta_b -= drop,
            2 => worse.herald_eta -= drop,
            _ => worse.bsm_eff -= drop,
        }
        let a = sim(base, seed, 1);
        let b = sim(worse, seed, 1);
        prop_assert!(b.coincidences <= a.coincidences);
        prop_assert!(b.total_heralds() <= a.total_heralds());
    }

    #[test]
    fn simulation_reproducible(seed in any::<u64>(), workers in 1usize..6) {
        let p = RateParams { pair_prob: 0.05, ..RateParams::default() };
        let a = sim(p, seed, workers);
        prop_assert_eq!(&a, &sim(p, seed, workers));
        prop_assert_eq!(a.pulses_run, 20_000);
        prop_assert!(a.coincidences <= a.total_heralds());
    }
}
