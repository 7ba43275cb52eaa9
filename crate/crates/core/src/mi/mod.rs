//! Mutual information and MMSE of a finite constellation over the channel
//! `y = √γ·s + n`, with `n` circularly-symmetric complex Gaussian of unit
//! total variance.
//!
//! With `d_jk = √γ (s_j − s_k)` the log-likelihood ratio of symbol `k`
//! against the transmitted symbol `j` is `−|d_jk|² − 2 Re(d_jk n̄)`, linear in
//! the noise, so
//!
//! ```text
//! I(γ) = H(s) − H(s|y) = −Σ_j p_j E_n[ log2 Σ_k p_k exp(−|d_jk|² − 2 Re(d_jk n̄)) ]
//! ```
//!
//! The inner sum is evaluated as a log-sum-exp with max subtraction.
//! Constellations that factor into independent real and imaginary parts
//! (square QAM, anything on a line) are reduced exactly to one-dimensional
//! integrals; everything else uses the planar rule.

pub mod monte_carlo;
pub mod quadrature;

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::sync::Mutex;

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use quadrature::{NoiseRule, DEFAULT_ORDER, MIN_ORDER};

pub use monte_carlo::{mc_mutual_info, McEstimate};

/// Gaps to `H(s)` below this are treated as saturation.
const SATURATION_GAP: f64 = 1e-12;
const CACHE_CAPACITY: usize = 1 << 18;
const LEVEL_TOL: f64 = 1e-12;

/// Capacity of the Gaussian-input channel, `log2(1 + γ)`.
pub fn gaussian_mi(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(gamma.ln_1p() / LN_2)
}

/// MMSE of a unit-power complex Gaussian input, `1/(1 + γ)`.
pub fn gaussian_mmse(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(1.0 / (1.0 + gamma))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("effective SNR must be finite and >= 0, got {gamma}")))
    }
}

/// One independent real dimension of a separable constellation.
#[derive(Debug, Clone)]
struct Axis {
    levels: Vec<f64>,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Kernel {
    Separable(Vec<Axis>),
    Planar {
        points: Vec<Complex64>,
        probs: Vec<f64>,
        log_probs: Vec<f64>,
        nodes: Vec<(f64, f64, f64)>,
    },
}

/// Quadrature-based evaluator of `I(γ)` (bits) and `MMSE(γ)` for one constellation.
#[derive(Debug)]
pub struct MiEvaluator {
    constellation: Constellation,
    order: usize,
    entropy: f64,
    rule: NoiseRule,
    kernel: Kernel,
    mi_cache: Mutex<HashMap<u64, f64>>,
    mmse_cache: Mutex<HashMap<u64, f64>>,
}

impl Clone for MiEvaluator {
    fn clone(&self) -> Self {
        Self {
            constellation: self.constellation.clone(),
            order: self.order,
            entropy: self.entropy,
            rule: self.rule.clone(),
            kernel: self.kernel.clone(),
            mi_cache: Mutex::new(HashMap::new()),
            mmse_cache: Mutex::new(HashMap::new()),
        }
    }
}

impl MiEvaluator {
    pub fn new(constellation: Constellation) -> Self {
        Self::with_order(constellation, DEFAULT_ORDER).expect("default order is valid")
    }

    /// Uses `order` nodes per real noise dimension.
    pub fn with_order(constellation: Constellation, order: usize) -> Result<Self> {
        if order < MIN_ORDER {
            return Err(Error::invalid(format!(
                "quadrature order must be >= {MIN_ORDER}, got {order}"
            )));
        }
        let rule = NoiseRule::new(order);
        let kernel = match separate_axes(&constellation) {
            Some(axes) => Kernel::Separable(axes),
            None => planar_kernel(&constellation, &rule),
        };
        Ok(Self::assemble(constellation, order, rule, kernel))
    }

    /// Forces the two-dimensional rule even for separable constellations.
    pub fn planar(constellation: Constellation, order: usize) -> Result<Self> {
        if order < MIN_ORDER {
            return Err(Error::invalid(format!(
                "quadrature order must be >= {MIN_ORDER}, got {order}"
            )));
        }
        let rule = NoiseRule::new(order);
        let kernel = planar_kernel(&constellation, &rule);
        Ok(Self::assemble(constellation, order, rule, kernel))
    }

    fn assemble(constellation: Constellation, order: usize, rule: NoiseRule, kernel: Kernel) -> Self {
        Self {
            entropy: constellation.entropy(),
            constellation,
            order,
            rule,
            kernel,
            mi_cache: Mutex::new(HashMap::new()),
            mmse_cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.kernel, Kernel::Separable(_))
    }

    /// `I(s; √γ s + n)` in bits.
    pub fn mutual_info(&self, gamma: f64) -> Result<f64> {
        check_gamma(gamma)?;
        if gamma == 0.0 {
            return Ok(0.0);
        }
        Ok(cached(&self.mi_cache, gamma, || self.compute_mi(gamma)))
    }

    /// `E|s − E[s | √γ s + n]|²`.
    pub fn mmse(&self, gamma: f64) -> Result<f64> {
        check_gamma(gamma)?;
        Ok(cached(&self.mmse_cache, gamma, || self.compute_mmse(gamma)))
    }

    fn compute_mi(&self, gamma: f64) -> f64 {
        let nats = match &self.kernel {
            Kernel::Separable(axes) => axes.iter().map(|a| axis_neg_mi(a, &self.rule, gamma)).sum::<f64>(),
            Kernel::Planar {
                points,
                probs,
                log_probs,
                nodes,
            } => planar_neg_mi(points, probs, log_probs, nodes, gamma),
        };
        let mi = (-nats / LN_2).clamp(0.0, self.entropy);
        if self.entropy - mi < SATURATION_GAP {
            self.entropy
        } else {
            mi
        }
    }

    fn compute_mmse(&self, gamma: f64) -> f64 {
        let v = match &self.kernel {
            Kernel::Separable(axes) => axes.iter().map(|a| axis_mmse(a, &self.rule, gamma)).sum::<f64>(),
            Kernel::Planar {
                points,
                probs,
                log_probs,
                nodes,
            } => planar_mmse(points, probs, log_probs, nodes, gamma),
        };
        v.max(0.0)
    }
}

fn cached(cache: &Mutex<HashMap<u64, f64>>, gamma: f64, f: impl FnOnce() -> f64) -> f64 {
    let key = gamma.to_bits();
    if let Some(v) = cache.lock().expect("cache poisoned").get(&key) {
        return *v;
    }
    let v = f();
    let mut guard = cache.lock().expect("cache poisoned");
    if guard.len() >= CACHE_CAPACITY {
        guard.clear();
    }
    guard.insert(key, v);
    v
}

/// `Σ_j p_j E_x[ ln Σ_k p_k exp(−d² − 2 d x) ]` for one real axis (nats, ≤ 0).
fn axis_neg_mi(axis: &Axis, rule: &NoiseRule, gamma: f64) -> f64 {
    let root = gamma.sqrt();
    let m = axis.levels.len();
    let mut d = vec![0.0; m];
    let mut base = vec![0.0; m];
    let mut expo = vec![0.0; m];
    let mut total = 0.0;
    for j in 0..m {
        for k in 0..m {
            d[k] = root * (axis.levels[j] - axis.levels[k]);
            base[k] = axis.log_probs[k] - d[k] * d[k];
        }
        let mut acc = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            for k in 0..m {
                expo[k] = base[k] - 2.0 * d[k] * x;
            }
            acc += w * log_sum_exp(&expo);
        }
        total += axis.probs[j] * acc;
    }
    total
}

fn axis_mmse(axis: &Axis, rule: &NoiseRule, gamma: f64) -> f64 {
    let root = gamma.sqrt();
    let m = axis.levels.len();
    let mut d = vec![0.0; m];
    let mut base = vec![0.0; m];
    let mut expo = vec![0.0; m];
    let mut total = 0.0;
    for j in 0..m {
        for k in 0..m {
            d[k] = root * (axis.levels[j] - axis.levels[k]);
            base[k] = axis.log_probs[k] - d[k] * d[k];
        }
        let mut acc = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            for k in 0..m {
                expo[k] = base[k] - 2.0 * d[k] * x;
            }
            let peak = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut norm = 0.0;
            let mut err = 0.0;
            for k in 0..m {
                let weight = (expo[k] - peak).exp();
                norm += weight;
                err += weight * (axis.levels[j] - axis.levels[k]);
            }
            let err = err / norm;
            acc += w * err * err;
        }
        total += axis.probs[j] * acc;
    }
    total
}

fn planar_neg_mi(
    points: &[Complex64],
    probs: &[f64],
    log_probs: &[f64],
    nodes: &[(f64, f64, f64)],
    gamma: f64,
) -> f64 {
    let root = gamma.sqrt();
    let m = points.len();
    let mut d = vec![Complex64::new(0.0, 0.0); m];
    let mut base = vec![0.0; m];
    let mut expo = vec![0.0; m];
    let mut total = 0.0;
    for j in 0..m {
        for k in 0..m {
            d[k] = (points[j] - points[k]) * root;
            base[k] = log_probs[k] - d[k].norm_sqr();
        }
        let mut acc = 0.0;
        for &(x, y, w) in nodes {
            for k in 0..m {
                expo[k] = base[k] - 2.0 * (d[k].re * x + d[k].im * y);
            }
            acc += w * log_sum_exp(&expo);
        }
        total += probs[j] * acc;
    }
    total
}

fn planar_mmse(
    points: &[Complex64],
    probs: &[f64],
    log_probs: &[f64],
    nodes: &[(f64, f64, f64)],
    gamma: f64,
) -> f64 {
    let root = gamma.sqrt();
    let m = points.len();
    let mut d = vec![Complex64::new(0.0, 0.0); m];
    let mut base = vec![0.0; m];
    let mut expo = vec![0.0; m];
    let mut total = 0.0;
    for j in 0..m {
        for k in 0..m {
            d[k] = (points[j] - points[k]) * root;
            base[k] = log_probs[k] - d[k].norm_sqr();
        }
        let mut acc = 0.0;
        for &(x, y, w) in nodes {
            for k in 0..m {
                expo[k] = base[k] - 2.0 * (d[k].re * x + d[k].im * y);
            }
            let peak = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut norm = 0.0;
            let mut err = Complex64::new(0.0, 0.0);
            for k in 0..m {
                let weight = (expo[k] - peak).exp();
                norm += weight;
                err += (points[j] - points[k]) * weight;
            }
            acc += w * (err / norm).norm_sqr();
        }
        total += probs[j] * acc;
    }
    total
}

/// `ln Σ exp(v_k)` with the largest term factored out.
fn log_sum_exp(v: &[f64]) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut arg = 0;
    for (k, &x) in v.iter().enumerate() {
        if x > peak {
            peak = x;
            arg = k;
        }
    }
    let rest: f64 = v
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != arg)
        .map(|(_, &x)| (x - peak).exp())
        .sum();
    peak + rest.ln_1p()
}

fn planar_kernel(c: &Constellation, rule: &NoiseRule) -> Kernel {
    let (points, probs): (Vec<_>, Vec<_>) = c
        .points()
        .iter()
        .zip(c.probs())
        .filter(|(_, &p)| p > 0.0)
        .map(|(s, &p)| (*s, p))
        .unzip();
    Kernel::Planar {
        log_probs: probs.iter().map(|p| p.ln()).collect(),
        points,
        probs,
        nodes: rule.planar(),
    }
}

/// Splits a constellation into independent real and imaginary axes when its
/// support is a full grid `A × B` and `p(a, b) = q(a) r(b)`. Axes with a
/// single level carry no information and are dropped.
fn separate_axes(c: &Constellation) -> Option<Vec<Axis>> {
    let support: Vec<(Complex64, f64)> = c
        .points()
        .iter()
        .zip(c.probs())
        .filter(|(_, &p)| p > 0.0)
        .map(|(s, &p)| (*s, p))
        .collect();

    let re_levels = distinct_levels(support.iter().map(|(s, _)| s.re));
    let im_levels = distinct_levels(support.iter().map(|(s, _)| s.im));
    if re_levels.len() * im_levels.len() != support.len() {
        return None;
    }

    let locate = |levels: &[f64], v: f64| levels.iter().position(|l| (l - v).abs() <= LEVEL_TOL);
    let mut joint = vec![vec![None; im_levels.len()]; re_levels.len()];
    for (s, p) in &support {
        let a = locate(&re_levels, s.re)?;
        let b = locate(&im_levels, s.im)?;
        if joint[a][b].is_some() {
            return None;
        }
        joint[a][b] = Some(*p);
    }
    let joint: Vec<Vec<f64>> = joint
        .into_iter()
        .map(|row| row.into_iter().collect::<Option<Vec<f64>>>())
        .collect::<Option<_>>()?;

    let re_marg: Vec<f64> = joint.iter().map(|row| row.iter().sum()).collect();
    let im_marg: Vec<f64> = (0..im_levels.len()).map(|b| joint.iter().map(|row| row[b]).sum()).collect();
    for (a, row) in joint.iter().enumerate() {
        for (b, p) in row.iter().enumerate() {
            if (p - re_marg[a] * im_marg[b]).abs() > LEVEL_TOL {
                return None;
            }
        }
    }

    let axis = |levels: Vec<f64>, probs: Vec<f64>| Axis {
        log_probs: probs.iter().map(|p| p.ln()).collect(),
        levels,
        probs,
    };
    Some(
        [axis(re_levels, re_marg), axis(im_levels, im_marg)]
            .into_iter()
            .filter(|a| a.levels.len() > 1)
            .collect(),
    )
}

fn distinct_levels(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut levels: Vec<f64> = Vec::new();
    for v in values {
        if !levels.iter().any(|l| (l - v).abs() <= LEVEL_TOL) {
            levels.push(v);
        }
    }
    levels
}
