//! Per-carrier and total secrecy rates, plus curve analysis used to exhibit
//! non-concavity of the discrete-input rate.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::mi::{gaussian_mi, MiEvaluator};

/// Slack allowed on the average-power constraint.
pub const BUDGET_TOL: f64 = 1e-9;

/// Strict margin for the midpoint concavity test.
const WITNESS_MARGIN: f64 = 1e-9;

/// Power gains `|h_i|²` (legitimate) and `|g_i|²` (eavesdropper) of one carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubcarrierChannel {
    pub index: usize,
    pub h_gain: f64,
    pub g_gain: f64,
}

impl SubcarrierChannel {
    pub fn new(index: usize, h_gain: f64, g_gain: f64) -> Result<Self> {
        for (name, v) in [("h_gain", h_gain), ("g_gain", g_gain)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self { index, h_gain, g_gain })
    }

    /// True when the legitimate link is strictly stronger.
    pub fn is_advantaged(&self) -> bool {
        self.h_gain > self.g_gain
    }
}

/// Per-carrier transmit powers under an average budget `(1/N) Σ p_i ≤ P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    p: Vec<f64>,
    budget: f64,
}

impl PowerAllocation {
    pub fn new(p: Vec<f64>, budget: f64) -> Result<Self> {
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(Error::invalid(format!("budget must be finite and >= 0, got {budget}")));
        }
        if p.is_empty() {
            return Err(Error::invalid("allocation needs at least one carrier"));
        }
        if let Some(v) = p.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!("carrier power {v} is negative or not finite")));
        }
        let alloc = Self { p, budget };
        if !alloc.is_feasible() {
            return Err(Error::invalid(format!(
                "average power {} exceeds budget {budget}",
                alloc.average_power()
            )));
        }
        Ok(alloc)
    }

    pub fn zeros(n: usize, budget: f64) -> Self {
        Self {
            p: vec![0.0; n],
            budget,
        }
    }

    pub fn powers(&self) -> &[f64] {
        &self.p
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn average_power(&self) -> f64 {
        self.p.iter().sum::<f64>() / self.p.len() as f64
    }

    pub fn is_feasible(&self) -> bool {
        self.average_power() <= self.budget + BUDGET_TOL * self.budget.max(1.0)
    }
}

/// Input distribution on every carrier: a finite constellation or Gaussian.
#[derive(Debug, Clone)]
pub enum InputModel {
    Discrete(Arc<MiEvaluator>),
    Gaussian,
}

impl InputModel {
    pub fn discrete(c: Constellation) -> Self {
        InputModel::Discrete(Arc::new(MiEvaluator::new(c)))
    }

    pub fn label(&self) -> &str {
        match self {
            InputModel::Discrete(ev) => ev.constellation().label(),
            InputModel::Gaussian => "gaussian",
        }
    }

    pub fn mutual_info(&self, gamma: f64) -> Result<f64> {
        match self {
            InputModel::Discrete(ev) => ev.mutual_info(gamma),
            InputModel::Gaussian => gaussian_mi(gamma),
        }
    }

    /// `[I(h p) − I(g p)]⁺` in bits.
    pub fn subcarrier_rate(&self, ch: &SubcarrierChannel, p: f64) -> Result<f64> {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::invalid(format!("power must be finite and >= 0, got {p}")));
        }
        if !ch.is_advantaged() || p == 0.0 {
            return Ok(0.0);
        }
        let legit = self.mutual_info(ch.h_gain * p)?;
        let eave = self.mutual_info(ch.g_gain * p)?;
        Ok((legit - eave).max(0.0))
    }

    /// `(1/N) Σ_i [I(h_i p_i) − I(g_i p_i)]⁺`, clipping each carrier before summing.
    pub fn total_rate(&self, channels: &[SubcarrierChannel], alloc: &PowerAllocation) -> Result<f64> {
        if channels.len() != alloc.len() {
            return Err(Error::LengthMismatch {
                expected: channels.len(),
                got: alloc.len(),
            });
        }
        let mut sum = 0.0;
        for (ch, &p) in channels.iter().zip(alloc.powers()) {
            sum += self.subcarrier_rate(ch, p)?;
        }
        Ok(sum / channels.len() as f64)
    }
}

pub fn subcarrier_rate(ev: &Arc<MiEvaluator>, ch: &SubcarrierChannel, p: f64) -> Result<f64> {
    InputModel::Discrete(ev.clone()).subcarrier_rate(ch, p)
}

pub fn total_rate(ev: &Arc<MiEvaluator>, channels: &[SubcarrierChannel], alloc: &PowerAllocation) -> Result<f64> {
    InputModel::Discrete(ev.clone()).total_rate(channels, alloc)
}

pub fn gaussian_subcarrier_rate(ch: &SubcarrierChannel, p: f64) -> Result<f64> {
    InputModel::Gaussian.subcarrier_rate(ch, p)
}

pub fn gaussian_total_rate(channels: &[SubcarrierChannel], alloc: &PowerAllocation) -> Result<f64> {
    InputModel::Gaussian.total_rate(channels, alloc)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::invalid("power grid needs at least 3 points"));
    }
    if grid.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::invalid("power grid values must be finite and >= 0"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("power grid must be strictly increasing"));
    }
    Ok(())
}

/// Interior grid points whose rate strictly exceeds both neighbours.
pub fn scan_local_maxima(model: &InputModel, ch: &SubcarrierChannel, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_grid(grid)?;
    let rates = grid
        .iter()
        .map(|&p| model.subcarrier_rate(ch, p))
        .collect::<Result<Vec<_>>>()?;
    Ok((1..grid.len() - 1)
        .filter(|&i| rates[i] > rates[i - 1] && rates[i] > rates[i + 1])
        .map(|i| (grid[i], rates[i]))
        .collect())
}

/// Searches the grid for `p1 < p2` with `R((p1+p2)/2) < (R(p1)+R(p2))/2 − 1e-9`.
///
/// `None` only means no violation was found on this grid.
pub fn concavity_violation_witness(
    model: &InputModel,
    ch: &SubcarrierChannel,
    grid: &[f64],
) -> Result<Option<(f64, f64)>> {
    check_grid(grid)?;
    let rates = grid
        .iter()
        .map(|&p| model.subcarrier_rate(ch, p))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..grid.len() {
        for k in i + 1..grid.len() {
            let mid = 0.5 * (grid[i] + grid[k]);
            let chord = 0.5 * (rates[i] + rates[k]);
            let at_mid = match grid.binary_search_by(|p| p.total_cmp(&mid)) {
                Ok(idx) => rates[idx],
                Err(_) => model.subcarrier_rate(ch, mid)?,
            };
            if at_mid < chord - WITNESS_MARGIN {
                return Ok(Some((grid[i], grid[k])));
            }
        }
    }
    Ok(None)
}

/// `n` points evenly spaced on a log scale between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// `n` points evenly spaced between `lo` and `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(hi > lo && n >= 2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(h: f64, g: f64) -> SubcarrierChannel {
        SubcarrierChannel::new(0, h, g).unwrap()
    }

    fn qpsk() -> InputModel {
        InputModel::discrete(Constellation::psk(4).unwrap())
    }

    #[test]
    fn channel_validation() {
        assert!(SubcarrierChannel::new(0, -1.0, 0.0).is_err());
        assert!(SubcarrierChannel::new(0, 1.0, f64::NAN).is_err());
        assert!(SubcarrierChannel::new(0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn allocation_validation() {
        assert!(PowerAllocation::new(vec![1.0, 1.0], 1.0).is_ok());
        assert!(PowerAllocation::new(vec![1.0, 1.5], 1.0).is_err());
        assert!(PowerAllocation::new(vec![-0.1, 0.1], 1.0).is_err());
        assert!(PowerAllocation::new(vec![], 1.0).is_err());
        assert!(PowerAllocation::new(vec![2.0 + 1e-10, 0.0], 1.0).is_ok());
    }

    #[test]
    fn rate_edge_cases() {
        let m = qpsk();
        assert_eq!(m.subcarrier_rate(&ch(1.0, 0.25), 0.0).unwrap(), 0.0);
        assert!(m.subcarrier_rate(&ch(1.0, 0.25), 1e4).unwrap() < 1e-4);
        for p in [0.1, 1.0, 10.0] {
            assert_eq!(m.subcarrier_rate(&ch(0.7, 0.7), p).unwrap(), 0.0);
            assert_eq!(m.subcarrier_rate(&ch(0.3, 0.7), p).unwrap(), 0.0);
        }
        assert!(m.subcarrier_rate(&ch(1.0, 0.25), -1.0).is_err());
    }

    #[test]
    fn total_rate_cases() {
        let m = qpsk();
        let chans = [ch(2.0, 0.5), ch(0.4, 0.9)];
        let zero = PowerAllocation::zeros(2, 1.0);
        assert_eq!(m.total_rate(&chans, &zero).unwrap(), 0.0);

        let alloc = PowerAllocation::new(vec![1.5, 0.5], 1.0).unwrap();
        let one = m.subcarrier_rate(&chans[0], 1.5).unwrap();
        assert!((m.total_rate(&chans, &alloc).unwrap() - one / 2.0).abs() < 1e-15);

        let single = PowerAllocation::new(vec![0.8], 1.0).unwrap();
        assert_eq!(
            m.total_rate(&chans[..1], &single).unwrap(),
            m.subcarrier_rate(&chans[0], 0.8).unwrap()
        );
        assert!(matches!(
            m.total_rate(&chans, &single),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn gaussian_rate_values() {
        let r = gaussian_subcarrier_rate(&ch(2.0, 1.0), 1.0).unwrap();
        assert!((r - (3f64.log2() - 1.0)).abs() < 1e-15);
        assert!((r - 0.58496).abs() < 1e-5);
        let far = gaussian_subcarrier_rate(&ch(2.0, 1.0), 1e12).unwrap();
        assert!((far - 1.0).abs() < 1e-9);
        assert_eq!(gaussian_subcarrier_rate(&ch(1.0, 2.0), 5.0).unwrap(), 0.0);
    }

    #[test]
    fn grid_validation() {
        let m = qpsk();
        let c = ch(1.0, 0.25);
        assert!(scan_local_maxima(&m, &c, &[0.0, 1.0]).is_err());
        assert!(scan_local_maxima(&m, &c, &[0.0, 2.0, 1.0]).is_err());
        assert!(concavity_violation_witness(&m, &c, &[0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn qpsk_single_peak() {
        let grid = log_grid(1e-2, 1e4, 2000);
        let peaks = scan_local_maxima(&qpsk(), &ch(1.0, 0.25), &grid).unwrap();
        assert_eq!(peaks.len(), 1, "{peaks:?}");
    }

    #[test]
    fn gaussian_has_no_interior_peak() {
        let grid = log_grid(1e-2, 1e4, 2000);
        let peaks = scan_local_maxima(&InputModel::Gaussian, &ch(1.0, 0.25), &grid).unwrap();
        assert!(peaks.is_empty());
    }

    #[test]
    fn witness_cases() {
        let grid = linear_grid(0.0, 200.0, 201);
        assert!(concavity_violation_witness(&qpsk(), &ch(1.0, 0.25), &grid).unwrap().is_some());
        assert!(concavity_violation_witness(&InputModel::Gaussian, &ch(1.0, 0.25), &grid)
            .unwrap()
            .is_none());
        assert!(concavity_violation_witness(&qpsk(), &ch(0.5, 0.5), &grid).unwrap().is_none());
    }
}
