//! Exhaustive reference solver for tiny instances and the empirical
//! duality-gap study.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::multipath;
use crate::error::{Error, Result};
use crate::secrecy::{InputModel, PowerAllocation, SubcarrierChannel, BUDGET_TOL};
use crate::solver::{solve_dual, SolverConfig};

pub const MAX_BRUTE_FORCE_CARRIERS: usize = 4;
pub const MAX_BRUTE_FORCE_GRID: usize = 400;

/// Gaps at or below this (bits) are round-off around a zero gap and are
/// left out of the log-log regression.
pub const GAP_NOISE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub alloc: PowerAllocation,
    /// Bits per carrier.
    pub rate: f64,
    /// Spacing of the per-carrier grid on `[0, N·P]`.
    pub grid_step: f64,
}

/// Maximizes the total secrecy rate over every feasible point of the
/// product grid `{0, e, 2e, …, N·P}^N` with `e = N·P / (grid − 1)`.
pub fn brute_force_solve(
    model: &InputModel,
    channels: &[SubcarrierChannel],
    budget: f64,
    grid_per_carrier: usize,
) -> Result<BruteForceResult> {
    let n = channels.len();
    if n == 0 || n > MAX_BRUTE_FORCE_CARRIERS {
        return Err(Error::InstanceTooLarge(format!(
            "brute force handles 1..={MAX_BRUTE_FORCE_CARRIERS} carriers, got {n}"
        )));
    }
    if !(2..=MAX_BRUTE_FORCE_GRID).contains(&grid_per_carrier) {
        return Err(Error::InstanceTooLarge(format!(
            "brute force grid must have 2..={MAX_BRUTE_FORCE_GRID} points, got {grid_per_carrier}"
        )));
    }
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::invalid(format!("budget must be > 0, got {budget}")));
    }
    let total = budget * n as f64;
    let step = total / (grid_per_carrier - 1) as f64;
    let powers: Vec<f64> = (0..grid_per_carrier).map(|j| j as f64 * step).collect();
    let rates: Vec<Vec<f64>> = channels
        .par_iter()
        .map(|ch| powers.iter().map(|&p| model.subcarrier_rate(ch, p)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    // Integer grid indices make feasibility exact: Σ j_i ≤ grid − 1.
    let cap = grid_per_carrier - 1;

    let best = (0..grid_per_carrier)
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0usize; n];
            idx[0] = first;
            let mut best = (f64::NEG_INFINITY, idx.clone());
            search(&rates, &mut idx, 1, first, rates[0][first], cap, &mut best);
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::NEG_INFINITY, vec![]), |acc, cand| if cand.0 > acc.0 { cand } else { acc });

    let p: Vec<f64> = best.1.iter().map(|&j| powers[j]).collect();
    let alloc = PowerAllocation::new(p, budget)?;
    Ok(BruteForceResult {
        alloc,
        rate: best.0 / n as f64,
        grid_step: step,
    })
}

fn search(
    rates: &[Vec<f64>],
    idx: &mut Vec<usize>,
    depth: usize,
    used: usize,
    partial: f64,
    cap: usize,
    best: &mut (f64, Vec<usize>),
) {
    if depth == rates.len() {
        if partial > best.0 {
            *best = (partial, idx.clone());
        }
        return;
    }
    for j in 0..=(cap - used) {
        idx[depth] = j;
        search(rates, idx, depth + 1, used + j, partial + rates[depth][j], cap, best);
    }
    idx[depth] = 0;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapStudyRow {
    pub n: usize,
    pub dual_value: f64,
    pub primal_value: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapStudyResult {
    pub rows: Vec<GapStudyRow>,
    /// Least-squares slope of `ln(gap)` against `ln(N)` over the gaps above
    /// [`GAP_NOISE_FLOOR`]; `None` with fewer than two of them.
    pub slope: Option<f64>,
}

impl GapStudyResult {
    pub fn n_values(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.n).collect()
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gap).collect()
    }
}

/// Solves the same multipath channel sampled at every `N` in `n_list`.
pub fn gap_study(
    model: &InputModel,
    taps_h: &[Complex64],
    taps_g: &[Complex64],
    n_list: &[usize],
    cfg: &SolverConfig,
) -> Result<GapStudyResult> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("n_list must be nonempty and strictly increasing"));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let realization = multipath(n, taps_h, taps_g)?;
        let sol = solve_dual(model, &realization.channels, cfg)?;
        rows.push(GapStudyRow {
            n,
            dual_value: sol.dual_value,
            primal_value: sol.primal_value,
            gap: sol.gap,
        });
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.gap > GAP_NOISE_FLOOR)
        .map(|r| ((r.n as f64).ln(), r.gap.ln()))
        .collect();
    Ok(GapStudyResult {
        slope: regression_slope(&points),
        rows,
    })
}

pub fn regression_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Outcome of one oracle cross-check instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub label: String,
    pub n: usize,
    pub budget: f64,
    pub brute_force_rate: f64,
    pub dual_primal_rate: f64,
    pub dual_value: f64,
    pub grid_slack: f64,
    pub passed: bool,
}

/// Maximum shortfall of the dual primal rate against brute force.
pub const ORACLE_RATE_TOL: f64 = 1e-3;

/// Compares `solve_dual` against `brute_force_solve` on one instance.
///
/// `grid_slack` bounds how far the grid optimum can sit above the true
/// optimum (always zero: the grid is a feasible subset), so the dual value
/// must dominate the grid rate up to the weak-duality tolerance.
pub fn cross_check(
    model: &InputModel,
    channels: &[SubcarrierChannel],
    cfg: &SolverConfig,
    grid_per_carrier: usize,
    label: impl Into<String>,
) -> Result<OracleCheck> {
    let brute = brute_force_solve(model, channels, cfg.budget, grid_per_carrier)?;
    let dual = solve_dual(model, channels, cfg)?;
    let grid_slack = BUDGET_TOL;
    let passed = brute.rate - dual.primal_value < ORACLE_RATE_TOL
        && dual.dual_value >= brute.rate - grid_slack
        && dual.alloc.is_feasible();
    Ok(OracleCheck {
        label: label.into(),
        n: channels.len(),
        budget: cfg.budget,
        brute_force_rate: brute.rate,
        dual_primal_rate: dual.primal_value,
        dual_value: dual.dual_value,
        grid_slack,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Constellation;

    fn ch(i: usize, h: f64, g: f64) -> SubcarrierChannel {
        SubcarrierChannel::new(i, h, g).unwrap()
    }

    fn qpsk() -> InputModel {
        InputModel::discrete(Constellation::psk(4).unwrap())
    }

    #[test]
    fn guardrails() {
        let m = qpsk();
        let five: Vec<_> = (0..5).map(|i| ch(i, 1.0, 0.5)).collect();
        assert!(matches!(
            brute_force_solve(&m, &five, 1.0, 10),
            Err(Error::InstanceTooLarge(_))
        ));
        assert!(matches!(
            brute_force_solve(&m, &five[..2], 1.0, 401),
            Err(Error::InstanceTooLarge(_))
        ));
        assert!(brute_force_solve(&m, &five[..2], 0.0, 10).is_err());
    }

    #[test]
    fn single_carrier_matches_scan() {
        let m = qpsk();
        let c = ch(0, 1.0, 0.25);
        let res = brute_force_solve(&m, &[c], 4.0, 201).unwrap();
        let scan = (0..201)
            .map(|j| m.subcarrier_rate(&c, j as f64 * 4.0 / 200.0).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(res.rate, scan);
        assert!(res.alloc.powers()[0] <= 4.0);
    }

    #[test]
    fn symmetric_carriers() {
        let m = qpsk();
        let chans = [ch(0, 1.5, 0.3), ch(1, 1.5, 0.3)];
        let res = brute_force_solve(&m, &chans, 0.8, 81).unwrap();
        let p = res.alloc.powers();
        let mirrored = PowerAllocation::new(vec![p[1], p[0]], 0.8).unwrap();
        let r = m.total_rate(&chans, &mirrored).unwrap();
        assert!((r - res.rate).abs() < 1e-12);
    }

    #[test]
    fn never_infeasible() {
        let m = qpsk();
        let chans = [ch(0, 2.0, 0.5), ch(1, 1.0, 0.9), ch(2, 0.3, 0.1)];
        for budget in [0.1, 1.0, 5.0] {
            let res = brute_force_solve(&m, &chans, budget, 40).unwrap();
            assert!(res.alloc.is_feasible());
        }
    }

    #[test]
    fn regression() {
        let pts: Vec<(f64, f64)> = [8.0f64, 32.0, 128.0]
            .iter()
            .map(|n| (n.ln(), (3.0 / n.sqrt()).ln()))
            .collect();
        assert!((regression_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(regression_slope(&pts[..1]), None);
    }
}
