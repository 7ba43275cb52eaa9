//! Finite input distributions normalized to unit average power.
//!
//! A [`Constellation`] is immutable once built. Every constructor checks
//! that the probabilities form a distribution and rescales (or verifies)
//! the points so that `Σ p_k |s_k|² = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `Σ p_k = 1`.
pub const PROB_TOL: f64 = 1e-12;
/// Tolerance on the unit average power constraint.
pub const POWER_TOL: f64 = 1e-9;
/// Minimum separation for two points to count as distinct.
const DISTINCT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    probs: Vec<f64>,
    label: String,
}

impl Constellation {
    /// Builds a constellation from already-normalized data, checking every invariant.
    pub fn new(points: Vec<Complex64>, probs: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        validate_distribution(&points, &probs)?;
        let power = average_power(&points, &probs);
        if (power - 1.0).abs() > POWER_TOL {
            return Err(Error::invalid(format!(
                "average power {power} is not 1 within {POWER_TOL}"
            )));
        }
        Ok(Self {
            points,
            probs,
            label: label.into(),
        })
    }

    /// `order` equally spaced unit-modulus points with uniform probabilities.
    ///
    /// Points sit at phases `π/order + 2πk/order`, except BPSK which uses
    /// `{+1, -1}`.
    pub fn psk(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::invalid(format!("PSK order must be >= 2, got {order}")));
        }
        let offset = if order == 2 { 0.0 } else { PI / order as f64 };
        let points = (0..order)
            .map(|k| Complex64::from_polar(1.0, offset + 2.0 * PI * k as f64 / order as f64))
            .collect();
        let probs = vec![1.0 / order as f64; order];
        let label = match order {
            2 => "bpsk".to_string(),
            4 => "qpsk".to_string(),
            _ => format!("psk{order}"),
        };
        Self::from_raw(points, probs, label)
    }

    /// Square QAM with `order = 4^k` points on the odd-integer grid, uniform
    /// probabilities, scaled to unit power.
    pub fn square_qam(order: usize) -> Result<Self> {
        let side = (order as f64).sqrt().round() as usize;
        if order < 4 || side * side != order || !side.is_power_of_two() {
            return Err(Error::invalid(format!(
                "square QAM order must be 4, 16, 64, 256, ...; got {order}"
            )));
        }
        let level = |i: usize| (2 * i) as f64 - (side as f64 - 1.0);
        let mut points = Vec::with_capacity(order);
        for re in 0..side {
            for im in 0..side {
                points.push(Complex64::new(level(re), level(im)));
            }
        }
        let probs = vec![1.0 / order as f64; order];
        Self::from_raw(points, probs, format!("qam{order}"))
    }

    /// Arbitrary points and probabilities; the points are multiplied by a
    /// single positive factor so that the average power is one.
    pub fn custom(points: Vec<Complex64>, probs: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        Self::from_raw(points, probs, label.into())
    }

    /// Four-level PAM with non-uniform spacing `{-51, -50, 50, 51}·L`, the
    /// classic two-peak secrecy-rate example.
    pub fn pam_two_scale() -> Self {
        let points = [-51.0, -50.0, 50.0, 51.0]
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        Self::from_raw(points, vec![0.25; 4], "pam-two-scale".to_string())
            .expect("fixed constellation is valid")
    }

    /// Looks up one of the named constellations accepted in config files.
    pub fn by_name(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        match lower.as_str() {
            "bpsk" => Self::psk(2),
            "qpsk" => Self::psk(4),
            "pam-two-scale" | "pam-paper-eq14" => Ok(Self::pam_two_scale()),
            _ => {
                if let Some(order) = lower.strip_prefix("psk") {
                    Self::psk(parse_order(name, order)?)
                } else if let Some(order) = lower.strip_prefix("qam") {
                    Self::square_qam(parse_order(name, order)?)
                } else {
                    Err(Error::invalid(format!("unknown constellation `{name}`")))
                }
            }
        }
    }

    fn from_raw(points: Vec<Complex64>, probs: Vec<f64>, label: String) -> Result<Self> {
        validate_distribution(&points, &probs)?;
        let power = average_power(&points, &probs);
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::invalid("constellation has zero (or non-finite) average power"));
        }
        let scale = power.sqrt().recip();
        let points: Vec<Complex64> = points.into_iter().map(|s| s * scale).collect();
        check_distinct(&points)?;
        Ok(Self {
            points,
            probs,
            label,
        })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Entropy `H(s)` in bits.
    pub fn entropy(&self) -> f64 {
        self.probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }

    pub fn average_power(&self) -> f64 {
        average_power(&self.points, &self.probs)
    }

    /// `E[s]`.
    pub fn mean(&self) -> Complex64 {
        self.points
            .iter()
            .zip(&self.probs)
            .map(|(s, p)| s * p)
            .sum()
    }

    /// The same constellation with every point multiplied by `e^{jθ}`.
    pub fn rotated(&self, theta: f64) -> Self {
        let r = Complex64::from_polar(1.0, theta);
        Self {
            points: self.points.iter().map(|s| s * r).collect(),
            probs: self.probs.clone(),
            label: format!("{}@{theta}", self.label),
        }
    }

    /// Re-applies the unit-power normalization.
    pub fn renormalized(&self) -> Result<Self> {
        Self::from_raw(self.points.clone(), self.probs.clone(), self.label.clone())
    }
}

fn parse_order(name: &str, digits: &str) -> Result<usize> {
    digits
        .parse()
        .map_err(|_| Error::invalid(format!("unknown constellation `{name}`")))
}

fn average_power(points: &[Complex64], probs: &[f64]) -> f64 {
    points.iter().zip(probs).map(|(s, p)| p * s.norm_sqr()).sum()
}

fn validate_distribution(points: &[Complex64], probs: &[f64]) -> Result<()> {
    if points.len() != probs.len() {
        return Err(Error::LengthMismatch {
            expected: points.len(),
            got: probs.len(),
        });
    }
    if points.len() < 2 {
        return Err(Error::invalid("a constellation needs at least two points"));
    }
    if points.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
        return Err(Error::invalid("constellation points must be finite"));
    }
    if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(Error::invalid(format!("probability {p} is negative or not finite")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::invalid(format!(
            "probabilities sum to {total}, not 1 within {PROB_TOL}"
        )));
    }
    check_distinct(points)
}

fn check_distinct(points: &[Complex64]) -> Result<()> {
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if (a - b).norm() <= DISTINCT_TOL {
                return Err(Error::invalid(format!("duplicate constellation point {a}")));
            }
        }
    }
    Ok(())
}
