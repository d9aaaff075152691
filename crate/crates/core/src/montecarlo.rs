//! Event-level Monte Carlo of the multiplexed heralding pipeline, used as an
//! independent check on [`crate::rates`].
//!
//! Per pulse and per bin, each of the two sources emits a pair with
//! probability `P_p`. A bin heralds when both heralding photons survive their
//! path (base transmission times circulator loss at the bin's chain depth)
//! and the Bell measurement succeeds. One feedforward shifter serves the
//! output, so at most one herald is consumed per pulse: the first heralding
//! bin in centre-first order. The heralded pulse yields a coincidence when
//! both output photons survive.
//!
//! # Random streams
//!
//! Pulses are split into `workers` contiguous blocks; block `w` covers
//! pulses `[w·N/W, (w+1)·N/W)` and draws from `ChaCha8Rng` seeded with
//! `seed_from_u64(seed)` on stream `w`. Draws per pulse depend only on the
//! emission pattern, never on efficiencies, so runs that differ only in
//! efficiencies share random numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::design::DesignPoint;
use crate::error::{invalid, Error, Result};
use crate::rates::{bin_offset, chain_depth, db_to_transmission, RateParams, RateReport};

/// Expected coincidences below which a comparison is flagged as
/// under-powered.
pub const LOW_POWER_COUNTS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub design: DesignPoint,
    pub rate_params: RateParams,
    pub n_pulses: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.rate_params.validate()?;
        if self.n_pulses == 0 {
            return Err(invalid("pulses", "at least one pulse is required"));
        }
        if self.workers == 0 {
            return Err(invalid("workers", "at least one worker is required"));
        }
        if self.design.bins_usable == 0 || self.design.bins_usable.is_multiple_of(2) {
            return Err(invalid("bins_usable", "must be a positive odd count"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Consumed heralds per bin, centre-first order.
    pub heralds_per_bin: Vec<u64>,
    pub coincidences: u64,
    /// Hz.
    pub estimated_rate: f64,
    /// Binomial standard error of `estimated_rate`, Hz.
    pub std_error: f64,
    pub pulses_run: u64,
    pub seed_used: u64,
    pub workers: usize,
}

impl SimResult {
    pub fn total_heralds(&self) -> u64 {
        self.heralds_per_bin.iter().sum()
    }
}

#[derive(Debug, Clone)]
struct Tally {
    heralds: Vec<u64>,
    coincidences: u64,
}

struct Pipeline {
    pair_prob: f64,
    herald_survival: Vec<f64>,
    bsm_eff: f64,
    eta_a: f64,
    eta_b: f64,
}

impl Pipeline {
    fn new(config: &SimConfig) -> Result<Self> {
        let p = &config.rate_params;
        let d = &config.design;
        let bins = d.bins_usable as usize;
        for i in 0..bins {
            let offset = bin_offset(i);
            let needed = offset.unsigned_abs() as f64 * d.bin_spacing;
            if needed > d.freq_shift.abs() * (1.0 + 1e-9) {
                return Err(Error::InfeasibleBin {
                    offset,
                    needed,
                    available: d.freq_shift.abs(),
                });
            }
        }
        Ok(Self {
            pair_prob: p.pair_prob,
            herald_survival: (0..bins)
                .map(|i| {
                    p.herald_eta * db_to_transmission(chain_depth(i) as f64 * p.circulator_loss)
                })
                .collect(),
            bsm_eff: p.bsm_eff,
            eta_a: p.eta_a,
            eta_b: p.eta_b * p.modulator.transmission(),
        })
    }

    fn run_block(&self, rng: &mut ChaCha8Rng, pulses: u64) -> Tally {
        let mut tally = Tally {
            heralds: vec![0; self.herald_survival.len()],
            coincidences: 0,
        };
        for _ in 0..pulses {
            let mut heralded = false;
            let mut any_double = false;
            for (bin, &survive) in self.herald_survival.iter().enumerate() {
                if rng.random::<f64>() >= self.pair_prob || rng.random::<f64>() >= self.pair_prob {
                    continue;
                }
                any_double = true;
                let h1: f64 = rng.random();
                let h2: f64 = rng.random();
                let bsm: f64 = rng.random();
                if !heralded && h1 < survive && h2 < survive && bsm < self.bsm_eff {
                    heralded = true;
                    tally.heralds[bin] += 1;
                }
            }
            if any_double {
                let a: f64 = rng.random();
                let b: f64 = rng.random();
                if heralded && a < self.eta_a && b < self.eta_b {
                    tally.coincidences += 1;
                }
            }
        }
        tally
    }
}

/// Runs the simulation. Reproducible for a fixed `(seed, workers)`.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let pipeline = Pipeline::new(config)?;
    let n = config.n_pulses;
    let w = config.workers as u64;
    let block = |k: u64| ((k as u128 * n as u128) / w as u128) as u64;

    let tallies: Vec<Tally> = (0..w)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k);
            pipeline.run_block(&mut rng, block(k + 1) - block(k))
        })
        .collect();

    let bins = config.design.bins_usable as usize;
    let mut heralds = vec![0u64; bins];
    let mut coincidences = 0;
    for t in &tallies {
        for (acc, h) in heralds.iter_mut().zip(&t.heralds) {
            *acc += h;
        }
        coincidences += t.coincidences;
    }

    let rate = config.design.pump_rate;
    let p_hat = coincidences as f64 / n as f64;
    Ok(SimResult {
        heralds_per_bin: heralds,
        coincidences,
        estimated_rate: p_hat * rate,
        std_error: (p_hat * (1.0 - p_hat) / n as f64).sqrt() * rate,
        pulses_run: n,
        seed_used: config.seed,
        workers: config.workers,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub result: SimResult,
    /// Hz.
    pub analytic_rate: f64,
    /// Binomial standard error implied by the analytic rate, Hz.
    pub expected_std_error: f64,
    pub z_score: f64,
    /// Expected coincidences under the oracle fall below [`LOW_POWER_COUNTS`].
    pub low_power: bool,
    pub passed: bool,
}

/// Simulates `config` and scores it against an analytic rate report.
pub fn convergence_check(config: &SimConfig, oracle: &RateReport) -> Result<ConvergenceReport> {
    let result = run(config)?;
    let rate = config.design.pump_rate;
    let n = result.pulses_run as f64;
    let p0 = (oracle.zalm_rate / rate).clamp(0.0, 1.0);
    let sigma = (p0 * (1.0 - p0) / n).sqrt() * rate;
    let diff = result.estimated_rate - oracle.zalm_rate;
    let z_score = if sigma > 0.0 {
        diff / sigma
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    };
    Ok(ConvergenceReport {
        analytic_rate: oracle.zalm_rate,
        expected_std_error: sigma,
        z_score,
        low_power: n * p0 < LOW_POWER_COUNTS,
        passed: z_score.abs() < 3.0,
        result,
    })
}
