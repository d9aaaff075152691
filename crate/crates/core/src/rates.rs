//! Analytic heralded-coincidence rates for a basic entanglement-swapping
//! source and for the spectrally multiplexed (ZALM) source.
//!
//! Each spectral bin acts as an independent swap: both sources emit a pair
//! into the bin with probability `P_p` per pulse, both heralding photons
//! survive their path (including circulator chain loss at the bin's filter
//! depth), and the linear-optics Bell measurement succeeds with `bsm_eff`.
//! The shifted output photon additionally passes the phase modulator.

use crate::design::{derive_design, DesignParams, DesignPoint};
use crate::error::{check, Result};

/// Phase modulator used as the frequency shifter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulator {
    pub v_pi: f64,
    /// dB.
    pub insertion_loss: f64,
}

impl Modulator {
    pub const fn new(v_pi: f64, insertion_loss: f64) -> Self {
        Self {
            v_pi,
            insertion_loss,
        }
    }

    /// 3 V / 3 dB conventional bulk lithium niobate.
    pub const CONVENTIONAL: Modulator = Modulator::new(3.0, 3.0);
    /// 1 V / 6 dB thin-film lithium niobate.
    pub const THIN_FILM: Modulator = Modulator::new(1.0, 6.0);
    /// 0.5 V / 1 dB, beyond current devices.
    pub const HERO: Modulator = Modulator::new(0.5, 1.0);

    pub fn transmission(&self) -> f64 {
        db_to_transmission(self.insertion_loss)
    }

    pub fn label(&self) -> String {
        format!("{}V_{}dB", self.v_pi, self.insertion_loss)
    }
}

pub fn db_to_transmission(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    /// Pair probability per pulse, per spectral bin, per source.
    pub pair_prob: f64,
    pub eta_a: f64,
    pub eta_b: f64,
    /// Per-detector heralding-path transmission before chain loss.
    pub herald_eta: f64,
    /// dB per circulator pass in the filter chain.
    pub circulator_loss: f64,
    pub modulator: Modulator,
    pub bsm_eff: f64,
}

impl Default for RateParams {
    fn default() -> Self {
        Self {
            pair_prob: 0.01,
            eta_a: 1.0,
            eta_b: 1.0,
            herald_eta: 1.0,
            circulator_loss: 0.6,
            modulator: Modulator::THIN_FILM,
            bsm_eff: 0.5,
        }
    }
}

/// Pair probability above which multi-pair events make the model unreliable.
pub const PAIR_PROB_VALIDITY: f64 = 0.1;

impl RateParams {
    /// No loss anywhere except the 50 % Bell measurement.
    pub fn lossless(pair_prob: f64) -> Self {
        Self {
            pair_prob,
            circulator_loss: 0.0,
            modulator: Modulator::new(1.0, 0.0),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        check("pair_prob", self.pair_prob, prob, "a probability in [0, 1]")?;
        check("eta_a", self.eta_a, prob, "a transmission in [0, 1]")?;
        check("eta_b", self.eta_b, prob, "a transmission in [0, 1]")?;
        check(
            "herald_eta",
            self.herald_eta,
            prob,
            "a transmission in [0, 1]",
        )?;
        check("bsm_eff", self.bsm_eff, prob, "a probability in [0, 1]")?;
        check(
            "circulator_loss",
            self.circulator_loss,
            |v| v >= 0.0,
            ">= 0 dB",
        )?;
        check(
            "insertion_loss",
            self.modulator.insertion_loss,
            |v| v >= 0.0,
            ">= 0 dB",
        )?;
        check("v_pi", self.modulator.v_pi, |v| v > 0.0, "> 0 V")?;
        Ok(())
    }

    /// Warning text when `pair_prob` leaves the single-pair regime.
    pub fn validity_warning(&self) -> Option<String> {
        (self.pair_prob > PAIR_PROB_VALIDITY).then(|| {
            format!(
                "pair_prob {} exceeds {PAIR_PROB_VALIDITY}; multi-pair events are not modelled",
                self.pair_prob
            )
        })
    }

    /// Probability that bin at chain depth `depth` heralds on a given pulse.
    pub fn herald_probability(&self, depth: u32) -> f64 {
        let path = self.pair_prob
            * self.herald_eta
            * db_to_transmission(depth as f64 * self.circulator_loss);
        path * path * self.bsm_eff
    }

    /// Probability that both output photons survive.
    pub fn output_probability(&self) -> f64 {
        self.eta_a * self.eta_b * self.modulator.transmission()
    }
}

/// Signed offset of the `i`-th bin in centre-first order: 0, +1, −1, +2, −2, …
pub fn bin_offset(index: usize) -> i64 {
    let k = index.div_ceil(2) as i64;
    if index % 2 == 1 {
        k
    } else {
        -k
    }
}

/// Filter-chain depth of the `i`-th bin in centre-first order: 0, 1, 1, 2, 2, …
pub fn chain_depth(index: usize) -> u32 {
    index.div_ceil(2) as u32
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Hz.
    pub basic_rate: f64,
    /// Hz; sum of `per_bin_rates`.
    pub zalm_rate: f64,
    /// Hz, in centre-first order (see [`bin_offset`]).
    pub per_bin_rates: Vec<f64>,
    pub bins_used: u32,
}

/// Single-bin swapped-entanglement heralded rate,
/// `R_P·(P_p·η_H)²·bsm_eff·η_A·η_B`.
pub fn basic_rate(design: &DesignPoint, params: &RateParams) -> Result<f64> {
    params.validate()?;
    check("pump_rate", design.pump_rate, |v| v >= 0.0, ">= 0 Hz")?;
    let p = params.pair_prob * params.herald_eta;
    Ok(design.pump_rate * p * p * params.bsm_eff * params.eta_a * params.eta_b)
}

/// Multiplexed rate summed over the design's usable bins.
pub fn zalm_rate(design: &DesignPoint, params: &RateParams) -> Result<RateReport> {
    let basic = basic_rate(design, params)?;
    let out = params.output_probability();
    let per_bin_rates: Vec<f64> = (0..design.bins_usable as usize)
        .map(|i| design.pump_rate * params.herald_probability(chain_depth(i)) * out)
        .collect();
    Ok(RateReport {
        basic_rate: basic,
        zalm_rate: per_bin_rates.iter().sum(),
        per_bin_rates,
        bins_used: design.bins_usable,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulatorRate {
    pub modulator: Modulator,
    pub design: DesignPoint,
    pub report: RateReport,
}

/// Evaluates the ZALM rate for each modulator, redesigning for its Vπ with
/// everything else held fixed. Results keep input order; [`rank`] orders
/// them.
pub fn compare_modulators(
    design: &DesignParams,
    params: &RateParams,
    modulators: &[Modulator],
) -> Result<Vec<ModulatorRate>> {
    modulators
        .iter()
        .map(|&modulator| {
            let point = derive_design(&DesignParams {
                v_pi: modulator.v_pi,
                ..*design
            })?;
            let report = zalm_rate(
                &point,
                &RateParams {
                    modulator,
                    ..*params
                },
            )?;
            Ok(ModulatorRate {
                modulator,
                design: point,
                report,
            })
        })
        .collect()
}

/// Indices of `rates` from highest to lowest ZALM rate (stable on ties).
pub fn rank(rates: &[ModulatorRate]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rates.len()).collect();
    idx.sort_by(|&a, &b| {
        rates[b]
            .report
            .zalm_rate
            .total_cmp(&rates[a].report.zalm_rate)
    });
    idx
}
