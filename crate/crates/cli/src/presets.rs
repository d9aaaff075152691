//! Named parameter sets for the reference figures. Each preset is config
//! text layered over the defaults.

pub struct Preset {
    pub name: &'static str,
    pub about: &'static str,
    pub text: &'static str,
}

const BIN_WIDTH_SWEEP: &str = "\
sweep.variable = design.bin_width
sweep.start = 5 GHz
sweep.stop = 50 GHz
sweep.points = 46
sweep.scale = linear
";

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2a",
        about: "bins vs RF power, three drive waveforms",
        text: "\
sweep.variable = design.rf_power
sweep.start = 0.1 W
sweep.stop = 100 W
sweep.points = 31
sweep.scale = log
sweep.series = waveform
sweep.outputs = n,bins
",
    },
    Preset {
        name: "fig2b",
        about: "bins vs modulator Vpi, three drive waveforms",
        text: "\
sweep.variable = design.v_pi
sweep.start = 0.2 V
sweep.stop = 10 V
sweep.points = 31
sweep.scale = log
sweep.series = waveform
sweep.outputs = n,bins
",
    },
    Preset {
        name: "fig2c",
        about: "bins vs pulse time-bandwidth product, three drive waveforms",
        text: "\
sweep.variable = design.tbp
sweep.start = 0.1
sweep.stop = 1
sweep.points = 37
sweep.scale = linear
sweep.series = waveform
sweep.outputs = n,bins
",
    },
    Preset {
        name: "fig3",
        about: "bins, drive frequency and pump rate vs bin width",
        text: "\
sweep.variable = design.bin_width
sweep.start = 5 GHz
sweep.stop = 50 GHz
sweep.points = 46
sweep.scale = linear
sweep.series = waveform
sweep.outputs = n,bins,drive_freq,pump_rate
",
    },
    Preset {
        name: "timing",
        about: "bin pulse width and time-bin spacing vs bin width",
        text: "\
sweep.series = none
sweep.outputs = tau_b,dt_b
",
    },
    Preset {
        name: "fig4b",
        about: "joint spectrum, 70 ps / 12.9 GHz pump on 12.5 GHz bins",
        text: "\
jsa.pump_duration = 70 ps
jsa.pump_bandwidth = 12.9 GHz
jsa.filter_fwhm = 12.5 GHz
",
    },
    Preset {
        name: "fig4c",
        about: "joint spectrum, 35 ps / 25.8 GHz pump on 12.5 GHz bins",
        text: "\
jsa.pump_duration = 35 ps
jsa.pump_bandwidth = 25.8 GHz
jsa.filter_fwhm = 12.5 GHz
",
    },
    Preset {
        name: "fig5a",
        about: "basic and multiplexed rates vs RF power per waveform, P_p = 0.01",
        text: "\
rates.pair_prob = 0.01
sweep.variable = design.rf_power
sweep.start = 0.1 W
sweep.stop = 100 W
sweep.points = 31
sweep.scale = log
sweep.series = waveform
sweep.outputs = basic_rate,zalm_rate,bins
",
    },
    Preset {
        name: "fig5b",
        about: "multiplexed rate vs RF power per modulator, P_p = 0.01",
        text: "\
rates.pair_prob = 0.01
sweep.variable = design.rf_power
sweep.start = 0.1 W
sweep.stop = 100 W
sweep.points = 31
sweep.scale = log
sweep.series = modulator
sweep.outputs = zalm_rate,bins
",
    },
    Preset {
        name: "fig5c",
        about: "multiplexed rate vs RF power per modulator, P_p = 0.1",
        text: "\
rates.pair_prob = 0.1
sweep.variable = design.rf_power
sweep.start = 0.1 W
sweep.stop = 100 W
sweep.points = 31
sweep.scale = log
sweep.series = modulator
sweep.outputs = zalm_rate,bins
",
    },
    Preset {
        name: "fig7",
        about: "shift vs phase, 952 MHz triangle through a fundamental-only channel",
        text: "\
shear.waveform = triangle
shear.harmonics = 1
shear.drive_freq = 9.523809523809523e8 Hz
shear.points = 32
",
    },
    Preset {
        name: "fig8",
        about: "shift vs phase, 952 MHz sine",
        text: "\
shear.waveform = sine
shear.drive_freq = 9.523809523809523e8 Hz
shear.points = 32
",
    },
    Preset {
        name: "fig9",
        about: "differential time-bin phase, 833 MHz sine",
        text: "\
shear.waveform = sine
shear.drive_freq = 8.333333333333334e8 Hz
shear.points = 32
",
    },
    Preset {
        name: "fig10",
        about: "differential time-bin phase, 952 MHz sine",
        text: "\
shear.waveform = sine
shear.drive_freq = 9.523809523809523e8 Hz
shear.points = 32
",
    },
];

pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name.eq_ignore_ascii_case(name))
}

/// Full text of a preset, including shared fragments.
pub fn preset_text(p: &Preset) -> String {
    match p.name {
        "timing" => format!("{BIN_WIDTH_SWEEP}{}", p.text),
        _ => p.text.to_string(),
    }
}
