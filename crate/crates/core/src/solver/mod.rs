//! Lagrangian dual power allocation for arbitrary input distributions.
//!
//! For a fixed multiplier `u` the Lagrangian decouples into one
//! single-variable problem per carrier,
//!
//! ```text
//! max_{p ≥ 0}  R_i(p) − u·p / ln 2
//! ```
//!
//! solved by a grid scan plus golden-section refinement. The dual function
//! `g(u)` is convex with subgradient `P − (1/N) Σ p_i*(u)`, nondecreasing in
//! `u`, so `u` is located by bisection.
//!
//! The multiplier is expressed in nats per unit power (the unit in which the
//! per-carrier slope is bounded by `h_gain`, and the unit of the Gaussian
//! closed form); rates and dual values are reported in bits per carrier.

pub mod baseline;
pub mod search;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::secrecy::{InputModel, PowerAllocation, SubcarrierChannel};
pub use baseline::{equal_pa, gaussian_optimal_pa, gaussian_power_for_multiplier, GaussianAllocation};
pub use search::{golden_section_maximize, InnerGrid};

/// Default `p_max` is this multiple of the total power `N·P`.
pub const P_MAX_FACTOR: f64 = 50.0;
const SLACK_FILL_ROUNDS: usize = 8;
/// Grid local maxima this close to the best grid value (bits) get refined too.
const REFINE_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Average power budget `P`.
    pub budget: f64,
    /// Per-carrier search ceiling; `None` means `50·N·P`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    #[serde(default = "default_grid_points")]
    pub inner_grid_points: usize,
    /// Bisection stops once the bracket on `u` is narrower than this.
    #[serde(default = "default_dual_tol")]
    pub dual_tol: f64,
    /// Golden-section iterations inside the winning grid cell.
    #[serde(default = "default_refine_iters")]
    pub refine_iters: usize,
}

fn default_grid_points() -> usize {
    512
}
fn default_dual_tol() -> f64 {
    1e-6
}
fn default_refine_iters() -> usize {
    30
}

impl SolverConfig {
    pub fn new(budget: f64) -> Self {
        Self {
            budget,
            p_max: None,
            inner_grid_points: default_grid_points(),
            dual_tol: default_dual_tol(),
            refine_iters: default_refine_iters(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(Error::invalid(format!("budget must be > 0, got {}", self.budget)));
        }
        if let Some(p_max) = self.p_max {
            if !(p_max.is_finite() && p_max > 0.0) {
                return Err(Error::invalid(format!("p_max must be > 0, got {p_max}")));
            }
        }
        if self.inner_grid_points < 100 {
            return Err(Error::invalid(format!(
                "inner_grid_points must be >= 100, got {}",
                self.inner_grid_points
            )));
        }
        if !(self.dual_tol.is_finite() && self.dual_tol > 0.0) {
            return Err(Error::invalid(format!("dual_tol must be > 0, got {}", self.dual_tol)));
        }
        Ok(())
    }

    pub fn resolved_p_max(&self, n_carriers: usize) -> f64 {
        self.p_max
            .unwrap_or(P_MAX_FACTOR * self.budget * n_carriers as f64)
    }

    pub fn grid(&self, n_carriers: usize) -> InnerGrid {
        InnerGrid::new(self.resolved_p_max(n_carriers), self.inner_grid_points)
    }
}

/// One evaluation of the dual function during bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualSample {
    pub u: f64,
    /// `g(u)`, bits per carrier.
    pub value: f64,
    /// `(1/N) Σ p_i*(u)`.
    pub average_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alloc: PowerAllocation,
    /// Final multiplier, nats per unit power.
    pub u: f64,
    /// Secrecy rate of `alloc`, bits per carrier.
    pub primal_value: f64,
    /// Smallest sampled dual value, bits per carrier.
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub trace: Vec<DualSample>,
}

/// Rates of one carrier on the shared inner grid.
#[derive(Debug, Clone)]
pub struct CarrierCurve {
    pub channel: SubcarrierChannel,
    pub rates: Vec<f64>,
}

impl CarrierCurve {
    pub fn new(model: &InputModel, channel: SubcarrierChannel, grid: &InnerGrid) -> Result<Self> {
        let rates = if channel.is_advantaged() {
            grid.points()
                .iter()
                .map(|&p| model.subcarrier_rate(&channel, p))
                .collect::<Result<Vec<_>>>()?
        } else {
            vec![0.0; grid.len()]
        };
        Ok(Self { channel, rates })
    }
}

/// Per-carrier state shared by every `u` visited during one solve.
pub struct DualProblem<'a> {
    model: &'a InputModel,
    grid: InnerGrid,
    curves: Vec<CarrierCurve>,
    budget: f64,
    dual_tol: f64,
    refine_iters: usize,
}

impl<'a> DualProblem<'a> {
    pub fn new(model: &'a InputModel, channels: &[SubcarrierChannel], cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if channels.is_empty() {
            return Err(Error::invalid("need at least one carrier"));
        }
        for ch in channels {
            if !(ch.h_gain.is_finite() && ch.g_gain.is_finite() && ch.h_gain >= 0.0 && ch.g_gain >= 0.0) {
                return Err(Error::invalid(format!("carrier {} has non-finite gains", ch.index)));
            }
        }
        let grid = cfg.grid(channels.len());
        let curves = channels
            .par_iter()
            .map(|ch| CarrierCurve::new(model, *ch, &grid))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            grid,
            curves,
            budget: cfg.budget,
            dual_tol: cfg.dual_tol,
            refine_iters: cfg.refine_iters,
        })
    }

    pub fn grid(&self) -> &InnerGrid {
        &self.grid
    }

    pub fn n_carriers(&self) -> usize {
        self.curves.len()
    }

    /// Maximizer of `R_i(p) − u·p/ln2` for carrier `i` and its objective value (bits).
    ///
    /// Every grid local maximum within `REFINE_MARGIN` of the best grid value
    /// is refined, so two nearly equal peaks cannot hide the true optimum in
    /// the losing cell. Ties go to the smaller power.
    pub fn inner_maximize(&self, i: usize, u: f64) -> Result<(f64, f64)> {
        let curve = &self.curves[i];
        if !curve.channel.is_advantaged() {
            return Ok((0.0, 0.0));
        }
        let price = u / LN_2;
        let pts = self.grid.points();
        let values: Vec<f64> = pts.iter().zip(&curve.rates).map(|(&p, &r)| r - price * p).collect();
        let mut best = 0;
        for (j, &v) in values.iter().enumerate().skip(1) {
            if v > values[best] {
                best = j;
            }
        }
        let mut best_p = pts[best];
        let mut best_val = values[best];
        if self.refine_iters == 0 {
            return Ok((best_p, best_val));
        }
        let last = pts.len() - 1;
        let threshold = best_val - REFINE_MARGIN;
        let ch = curve.channel;
        let mut failure = None;
        for j in 0..=last {
            let left_ok = j == 0 || values[j] >= values[j - 1];
            let right_ok = j == last || values[j] > values[j + 1];
            if !(left_ok && right_ok && values[j] >= threshold) {
                continue;
            }
            let (p, v) = golden_section_maximize(
                |p| match self.model.subcarrier_rate(&ch, p) {
                    Ok(r) => r - price * p,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NEG_INFINITY
                    }
                },
                pts[j.saturating_sub(1)],
                pts[(j + 1).min(last)],
                self.refine_iters,
            );
            if v > best_val || (v == best_val && p < best_p) {
                best_p = p;
                best_val = v;
            }
        }
        match failure {
            Some(e) => Err(e),
            None => Ok((best_p, best_val)),
        }
    }

    /// `g(u)` in bits per carrier and the per-carrier maximizers.
    pub fn dual_value(&self, u: f64) -> Result<(f64, Vec<f64>)> {
        if !(u.is_finite() && u >= 0.0) {
            return Err(Error::invalid(format!("dual variable must be >= 0, got {u}")));
        }
        let parts = (0..self.curves.len())
            .into_par_iter()
            .map(|i| self.inner_maximize(i, u))
            .collect::<Result<Vec<_>>>()?;
        let n = parts.len() as f64;
        let objective: f64 = parts.iter().map(|t| t.1).sum();
        let p_star = parts.into_iter().map(|t| t.0).collect();
        Ok((objective / n + u * self.budget / LN_2, p_star))
    }

    fn rate(&self, i: usize, p: f64) -> Result<f64> {
        self.model.subcarrier_rate(&self.curves[i].channel, p)
    }

    fn total_power(&self) -> f64 {
        self.budget * self.curves.len() as f64
    }

    /// Lowers powers to grid points, cheapest rate loss per unit power
    /// first, until the budget holds.
    fn truncate_to_budget(&self, mut p: Vec<f64>) -> Result<Vec<f64>> {
        let limit = self.total_power();
        let mut total: f64 = p.iter().sum();
        let mut rate: Vec<f64> = (0..p.len()).map(|i| self.rate(i, p[i])).collect::<Result<_>>()?;
        let mut heap = BinaryHeap::new();
        for i in 0..p.len() {
            if let Some(step) = self.truncation_step(i, p[i], rate[i]) {
                heap.push(step);
            }
        }
        while total > limit {
            let Some(step) = heap.pop() else { break };
            let i = step.carrier;
            total -= p[i] - step.target;
            p[i] = step.target;
            rate[i] = self.curves[i].rates[step.grid_index];
            if let Some(next) = self.truncation_step(i, p[i], rate[i]) {
                heap.push(next);
            }
        }
        Ok(p)
    }

    fn truncation_step(&self, i: usize, p: f64, rate: f64) -> Option<TruncationStep> {
        let k = self.grid.index_below(p)?;
        let target = self.grid.points()[k];
        let loss = rate - self.curves[i].rates[k];
        Some(TruncationStep {
            carrier: i,
            grid_index: k,
            target,
            cost: loss / (p - target),
        })
    }

    /// Spends leftover budget greedily: each round moves one carrier to the
    /// best reachable grid point or to its current power plus all remaining
    /// slack.
    fn fill_slack(&self, mut p: Vec<f64>) -> Result<Vec<f64>> {
        let limit = self.total_power();
        let pts = self.grid.points();
        let mut rate: Vec<f64> = (0..p.len()).map(|i| self.rate(i, p[i])).collect::<Result<_>>()?;
        for _ in 0..SLACK_FILL_ROUNDS {
            let slack = limit - p.iter().sum::<f64>();
            if slack <= 0.0 {
                break;
            }
            let mut best: Option<(usize, f64, f64)> = None;
            for (i, curve) in self.curves.iter().enumerate() {
                if !curve.channel.is_advantaged() {
                    continue;
                }
                let top = p[i] + slack;
                let mut consider = |target: f64, r: f64| {
                    let gain = r - rate[i];
                    if gain > 0.0 && best.is_none_or(|b| gain > b.2 - rate[b.0]) {
                        best = Some((i, target, r));
                    }
                };
                let start = pts.partition_point(|&q| q <= p[i]);
                for j in start..pts.len() {
                    if pts[j] >= top {
                        break;
                    }
                    consider(pts[j], curve.rates[j]);
                }
                consider(top, self.rate(i, top)?);
            }
            match best {
                Some((i, target, r)) => {
                    p[i] = target;
                    rate[i] = r;
                }
                None => break,
            }
        }
        Ok(p)
    }

    fn evaluate(&self, p: Vec<f64>) -> Result<(PowerAllocation, f64)> {
        let limit = self.total_power();
        let total: f64 = p.iter().sum();
        // Guard against round-off from the slack fill.
        let p = if total > limit {
            let scale = limit / total;
            p.into_iter().map(|v| v * scale).collect()
        } else {
            p
        };
        let alloc = PowerAllocation::new(p, self.budget)?;
        let mut sum = 0.0;
        for (i, &pi) in alloc.powers().iter().enumerate() {
            sum += self.rate(i, pi)?;
        }
        let rate = sum / alloc.len() as f64;
        Ok((alloc, rate))
    }

    /// Bisection on `u` followed by primal recovery.
    pub fn solve(&self) -> Result<DualSolution> {
        let n = self.n_carriers() as f64;
        let mut trace = Vec::new();
        let sample = |u: f64, trace: &mut Vec<DualSample>| -> Result<Vec<f64>> {
            let (value, p) = self.dual_value(u)?;
            trace.push(DualSample {
                u,
                value,
                average_power: p.iter().sum::<f64>() / n,
            });
            Ok(p)
        };

        let p_zero = sample(0.0, &mut trace)?;
        if trace[0].average_power <= self.budget {
            let (alloc, primal) = self.evaluate(p_zero)?;
            let dual = trace[0].value;
            return Ok(DualSolution {
                alloc,
                u: 0.0,
                primal_value: primal,
                dual_value: dual,
                gap: dual - primal,
                iterations: 0,
                trace,
            });
        }

        // The per-carrier slope never exceeds h_gain (nats), so every
        // maximizer is zero at u = max h_gain.
        let mut u_lo = 0.0;
        let mut u_hi = self
            .curves
            .iter()
            .map(|c| c.channel.h_gain)
            .fold(0.0, f64::max);
        let mut p_lo = p_zero;
        let mut p_hi = sample(u_hi, &mut trace)?;
        let mut iterations = 0;
        while u_hi - u_lo > self.dual_tol {
            let mid = 0.5 * (u_lo + u_hi);
            let p = sample(mid, &mut trace)?;
            if trace.last().unwrap().average_power > self.budget {
                u_lo = mid;
                p_lo = p;
            } else {
                u_hi = mid;
                p_hi = p;
            }
            iterations += 1;
        }

        let dual = trace.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
        let from_above = self.evaluate(self.fill_slack(p_hi)?)?;
        let truncated = self.truncate_to_budget(p_lo)?;
        let from_below = self.evaluate(self.fill_slack(truncated)?)?;
        let (alloc, primal) = if from_below.1 > from_above.1 {
            from_below
        } else {
            from_above
        };
        Ok(DualSolution {
            alloc,
            u: u_hi,
            primal_value: primal,
            dual_value: dual,
            gap: dual - primal,
            iterations,
            trace,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct TruncationStep {
    carrier: usize,
    grid_index: usize,
    target: f64,
    cost: f64,
}

impl PartialEq for TruncationStep {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for TruncationStep {}

impl PartialOrd for TruncationStep {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TruncationStep {
    // Max-heap: cheapest cost first, then lowest carrier index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.carrier.cmp(&self.carrier))
    }
}

/// Solves the inner problem of a single carrier at multiplier `u`.
pub fn inner_maximize(
    model: &InputModel,
    ch: &SubcarrierChannel,
    u: f64,
    cfg: &SolverConfig,
) -> Result<(f64, f64)> {
    if !(u.is_finite() && u >= 0.0) {
        return Err(Error::invalid(format!("dual variable must be >= 0, got {u}")));
    }
    DualProblem::new(model, std::slice::from_ref(ch), cfg)?.inner_maximize(0, u)
}

/// `g(u)` (bits per carrier) and the per-carrier maximizers.
pub fn dual_value(
    model: &InputModel,
    channels: &[SubcarrierChannel],
    u: f64,
    cfg: &SolverConfig,
) -> Result<(f64, Vec<f64>)> {
    DualProblem::new(model, channels, cfg)?.dual_value(u)
}

/// Runs the full dual algorithm.
pub fn solve_dual(model: &InputModel, channels: &[SubcarrierChannel], cfg: &SolverConfig) -> Result<DualSolution> {
    DualProblem::new(model, channels, cfg)?.solve()
}
