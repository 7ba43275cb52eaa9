//! Monte Carlo estimate of `I(s; √γ s + n)`, kept as an independent
//! cross-check for the quadrature path.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constellation::Constellation;
use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// Bits.
    pub estimate: f64,
    /// Standard error of `estimate`, bits.
    pub std_error: f64,
}

/// Samples `(s_j, n)` and averages `−log2 Σ_k p_k exp(−|d_jk|² − 2 Re(d_jk n̄))`.
///
/// Deterministic for a given seed: ChaCha8 stream, ziggurat normals from
/// `rand_distr`.
pub fn mc_mutual_info(c: &Constellation, gamma: f64, n_samples: usize, seed: u64) -> Result<McEstimate> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::invalid(format!("effective SNR must be finite and >= 0, got {gamma}")));
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::invalid(format!(
            "Monte Carlo needs at least {MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    let points = c.points();
    let probs = c.probs();
    let log_probs: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
    let cdf: Vec<f64> = probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let root = gamma.sqrt();
    let sigma = 0.5f64.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut expo = vec![0.0; points.len()];
    // Welford accumulation.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..n_samples {
        let u: f64 = rng.random();
        let j = cdf.iter().position(|&c| u < c).unwrap_or(points.len() - 1);
        let nr: f64 = rng.sample(StandardNormal);
        let ni: f64 = rng.sample(StandardNormal);
        let noise = Complex64::new(nr * sigma, ni * sigma);
        for (k, e) in expo.iter_mut().enumerate() {
            let d = (points[j] - points[k]) * root;
            *e = log_probs[k] - d.norm_sqr() - 2.0 * (d * noise.conj()).re;
        }
        let peak = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = peak + expo.iter().map(|e| (e - peak).exp()).sum::<f64>().ln();
        let value = -lse / LN_2;
        let delta = value - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (value - mean);
    }
    let var = m2 / (n_samples - 1) as f64;
    Ok(McEstimate {
        estimate: mean,
        std_error: (var / n_samples as f64).sqrt(),
    })
}
