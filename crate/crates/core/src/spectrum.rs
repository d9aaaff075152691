//! Power-spectrum moments of sampled complex envelopes.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Signed DFT bin frequencies in natural FFT order.
pub(crate) fn fft_frequencies(n: usize, sample_period: f64) -> Vec<f64> {
    let df = 1.0 / (n as f64 * sample_period);
    (0..n)
        .map(|k| {
            let k = k as i64;
            let signed = if k < (n as i64 + 1) / 2 {
                k
            } else {
                k - n as i64
            };
            signed as f64 * df
        })
        .collect()
}

/// First moment of `|DFT(envelope)|²`, Hz, relative to the carrier.
///
/// Uses the `e^{-iωt}` forward convention, so a phase `e^{+i2πft}` on the
/// envelope appears at `+f`.
pub(crate) fn spectral_centroid(envelope: &[Complex64], sample_period: f64) -> f64 {
    let n = envelope.len();
    let mut buf = envelope.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let freqs = fft_frequencies(n, sample_period);
    let (num, den) = buf
        .iter()
        .zip(&freqs)
        .fold((0.0, 0.0), |(num, den), (x, f)| {
            let p = x.norm_sqr();
            (num + p * f, den + p)
        });
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    // direct O(N²) transform
    fn naive_centroid(x: &[Complex64], dt: f64) -> f64 {
        let n = x.len();
        let freqs = fft_frequencies(n, dt);
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, f) in freqs.iter().enumerate() {
            let s: Complex64 = x
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -TAU * (k * j) as f64 / n as f64))
                .sum();
            num += s.norm_sqr() * f;
            den += s.norm_sqr();
        }
        num / den
    }

    #[test]
    fn matches_direct_transform() {
        let n = 96;
        let dt = 1e-12;
        let x: Vec<Complex64> = (0..n)
            .map(|j| {
                let t = (j as f64 - 40.0) * dt;
                let a = (-(t / 8e-12).powi(2)).exp();
                Complex64::from_polar(a, 0.3 * (TAU * 7e9 * t).sin() + TAU * 2e10 * t)
            })
            .collect();
        let fast = spectral_centroid(&x, dt);
        let slow = naive_centroid(&x, dt);
        assert!((fast - slow).abs() < 1e-6 * slow.abs(), "{fast} vs {slow}");
    }

    #[test]
    fn tone_lands_on_its_frequency() {
        let n = 256;
        let dt = 1e-12;
        let f0 = 16.0 / (n as f64 * dt);
        let x: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0, TAU * f0 * j as f64 * dt))
            .collect();
        assert!((spectral_centroid(&x, dt) - f0).abs() < 1e-6 * f0);
        let neg: Vec<Complex64> = x.iter().map(|v| v.conj()).collect();
        assert!((spectral_centroid(&neg, dt) + f0).abs() < 1e-6 * f0);
    }

    #[test]
    fn frequency_layout() {
        let f = fft_frequencies(4, 0.25);
        assert_eq!(f, vec![0.0, 1.0, -2.0, -1.0]);
        let f = fft_frequencies(5, 0.2);
        assert_eq!(f, vec![0.0, 1.0, 2.0, -2.0, -1.0]);
    }
}
