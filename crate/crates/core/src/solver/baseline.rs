//! Closed-form Gaussian-input allocation and the equal-power baseline.

use crate::error::{Error, Result};
use crate::secrecy::{PowerAllocation, SubcarrierChannel};

const MAX_BISECTIONS: usize = 400;

/// Gaussian-optimal allocation together with its multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianAllocation {
    pub alloc: PowerAllocation,
    /// Multiplier in nats per unit power.
    pub u: f64,
    /// Set when no carrier has `h_gain > g_gain`; the allocation is then all zero.
    pub degenerate: bool,
}

/// Stationary point of `ln(1+hp) − ln(1+gp) − u p`, or 0 when `h − g ≤ u`.
///
/// Positive root of `hg p² + (h+g) p + 1 − (h−g)/u = 0`, written in the
/// cancellation-free form `−2c / (b + √(b² − 4ac))` so that `g = 0` (pure
/// water-filling, `p = 1/u − 1/h`) needs no special case.
pub fn gaussian_power_for_multiplier(ch: &SubcarrierChannel, u: f64) -> f64 {
    let (h, g) = (ch.h_gain, ch.g_gain);
    if h - g <= u {
        return 0.0;
    }
    let a = h * g;
    let b = h + g;
    let c = 1.0 - (h - g) / u;
    let disc = (b * b - 4.0 * a * c).sqrt();
    -2.0 * c / (b + disc)
}

/// Optimal allocation for Gaussian inputs with the multiplier chosen so that
/// `(1/N) Σ p_i = P`.
pub fn gaussian_optimal_pa(channels: &[SubcarrierChannel], budget: f64) -> Result<GaussianAllocation> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::invalid(format!("budget must be finite and > 0, got {budget}")));
    }
    if channels.is_empty() {
        return Err(Error::invalid("need at least one carrier"));
    }
    let n = channels.len() as f64;
    let u_top = channels
        .iter()
        .map(|c| c.h_gain - c.g_gain)
        .fold(f64::NEG_INFINITY, f64::max);
    if u_top <= 0.0 {
        return Ok(GaussianAllocation {
            alloc: PowerAllocation::zeros(channels.len(), budget),
            u: 0.0,
            degenerate: true,
        });
    }
    let average = |u: f64| channels.iter().map(|c| gaussian_power_for_multiplier(c, u)).sum::<f64>() / n;

    // average(u) decreases from +∞ at u → 0 to 0 at u_top.
    let mut lo = u_top;
    while average(lo) < budget {
        lo *= 0.5;
    }
    let mut hi = u_top;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if average(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p: Vec<f64> = channels.iter().map(|c| gaussian_power_for_multiplier(c, hi)).collect();
    Ok(GaussianAllocation {
        alloc: PowerAllocation::new(p, budget)?,
        u: hi,
        degenerate: false,
    })
}

/// Splits `N·P` evenly over the carriers with `h_gain > g_gain`.
pub fn equal_pa(channels: &[SubcarrierChannel], budget: f64) -> Result<PowerAllocation> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::invalid(format!("budget must be finite and > 0, got {budget}")));
    }
    if channels.is_empty() {
        return Err(Error::invalid("need at least one carrier"));
    }
    let n = channels.len();
    let m = channels.iter().filter(|c| c.is_advantaged()).count();
    if m == 0 {
        return Ok(PowerAllocation::zeros(n, budget));
    }
    let share = n as f64 * budget / m as f64;
    let p = channels
        .iter()
        .map(|c| if c.is_advantaged() { share } else { 0.0 })
        .collect();
    PowerAllocation::new(p, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(i: usize, h: f64, g: f64) -> SubcarrierChannel {
        SubcarrierChannel::new(i, h, g).unwrap()
    }

    #[test]
    fn closed_form_value() {
        let p = gaussian_power_for_multiplier(&ch(0, 2.0, 1.0), 0.5);
        let expected = (-3.0 + 17f64.sqrt()) / 4.0;
        assert!((p - expected).abs() < 1e-15);
        assert!((p - 0.28078).abs() < 1e-5);
    }

    #[test]
    fn closed_form_is_stationary() {
        let c = ch(0, 3.0, 0.7);
        let u = 0.4;
        let p = gaussian_power_for_multiplier(&c, u);
        let slope = c.h_gain / (1.0 + c.h_gain * p) - c.g_gain / (1.0 + c.g_gain * p);
        assert!((slope - u).abs() < 1e-14);
    }

    #[test]
    fn zero_above_threshold() {
        assert_eq!(gaussian_power_for_multiplier(&ch(0, 2.0, 1.0), 1.0), 0.0);
        assert_eq!(gaussian_power_for_multiplier(&ch(0, 2.0, 1.0), 3.0), 0.0);
        assert_eq!(gaussian_power_for_multiplier(&ch(0, 1.0, 2.0), 0.1), 0.0);
    }

    #[test]
    fn water_filling_limit() {
        let p = gaussian_power_for_multiplier(&ch(0, 4.0, 0.0), 0.5);
        assert!((p - (2.0 - 0.25)).abs() < 1e-14);
    }

    #[test]
    fn recovers_multiplier() {
        let target = (-3.0 + 17f64.sqrt()) / 4.0;
        let sol = gaussian_optimal_pa(&[ch(0, 2.0, 1.0)], target).unwrap();
        assert!((sol.u - 0.5).abs() < 1e-9);
        assert!((sol.alloc.powers()[0] - target).abs() < 1e-12);
        assert!(!sol.degenerate);
    }

    #[test]
    fn budget_saturated() {
        let chans = [ch(0, 2.0, 1.0), ch(1, 0.5, 0.1), ch(2, 0.1, 0.9), ch(3, 5.0, 0.2)];
        for budget in [0.01, 1.0, 100.0, 1e4] {
            let sol = gaussian_optimal_pa(&chans, budget).unwrap();
            assert!((sol.alloc.average_power() - budget).abs() <= 1e-9 * budget);
            assert_eq!(sol.alloc.powers()[2], 0.0);
        }
    }

    #[test]
    fn degenerate_channels() {
        let sol = gaussian_optimal_pa(&[ch(0, 1.0, 2.0), ch(1, 1.0, 1.0)], 1.0).unwrap();
        assert!(sol.degenerate);
        assert!(sol.alloc.powers().iter().all(|&p| p == 0.0));
        assert!(gaussian_optimal_pa(&[ch(0, 1.0, 2.0)], 0.0).is_err());
    }

    #[test]
    fn equal_split() {
        let chans = [ch(0, 2.0, 1.0), ch(1, 0.5, 0.9), ch(2, 3.0, 0.1), ch(3, 0.2, 0.2)];
        let a = equal_pa(&chans, 1.0).unwrap();
        assert_eq!(a.powers(), &[2.0, 0.0, 2.0, 0.0]);

        let all = [ch(0, 2.0, 1.0), ch(1, 3.0, 1.0)];
        assert_eq!(equal_pa(&all, 1.5).unwrap().powers(), &[1.5, 1.5]);

        let none = [ch(0, 1.0, 2.0), ch(1, 1.0, 1.0)];
        assert_eq!(equal_pa(&none, 1.0).unwrap().powers(), &[0.0, 0.0]);
    }
}
