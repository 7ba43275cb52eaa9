use std::f64::consts::LN_2;

use ofdm_secrecy::secrecy::scan_local_maxima;
use ofdm_secrecy::solver::{dual_value, gaussian_power_for_multiplier, inner_maximize, DualProblem, DualSolution};
use ofdm_secrecy::{
    gaussian_optimal_pa, iid_rayleigh, solve_dual, Constellation, InputModel, SolverConfig, SubcarrierChannel,
};
use proptest::prelude::*;

fn qpsk() -> InputModel {
    InputModel::discrete(Constellation::psk(4).unwrap())
}

fn ch(i: usize, h: f64, g: f64) -> SubcarrierChannel {
    SubcarrierChannel::new(i, h, g).unwrap()
}

/// Contract checks shared by every solved instance.
fn assert_solution_invariants(sol: &DualSolution, cfg: &SolverConfig, n: usize) {
    assert!(sol.gap >= -1e-9, "weak duality: D={} R={}", sol.dual_value, sol.primal_value);
    assert!(sol.alloc.is_feasible());
    assert!(sol.alloc.average_power() <= cfg.budget * (1.0 + 1e-9));
    let slack = cfg.budget - sol.alloc.average_power();
    assert!(
        sol.u * slack <= 1e-6 * sol.u * cfg.budget + 1e-9,
        "complementary slackness: u={} slack={slack}",
        sol.u
    );
    if slack > 1e-6 * cfg.budget {
        assert!(sol.u <= cfg.dual_tol, "slack {slack} left with u={}", sol.u);
    }

    let e_p = cfg.resolved_p_max(n) / cfg.inner_grid_points as f64;
    let mut trace = sol.trace.clone();
    trace.sort_by(|a, b| a.u.total_cmp(&b.u));
    for w in trace.windows(2) {
        let sub_lo = cfg.budget - w[0].average_power;
        let sub_hi = cfg.budget - w[1].average_power;
        assert!(sub_hi >= sub_lo - 2.0 * e_p * n as f64, "subgradient decreases between u={} and u={}", w[0].u, w[1].u);
    }
    // g is convex along the sampled multipliers.
    for w in trace.windows(3) {
        let t = (w[1].u - w[0].u) / (w[2].u - w[0].u);
        let chord = (1.0 - t) * w[0].value + t * w[2].value;
        assert!(w[1].value <= chord + 1e-9, "g not convex at u={}", w[1].u);
    }
}

#[test]
fn inner_problem_examples() {
    let m = qpsk();
    let cfg = SolverConfig::new(1.0);
    let c = ch(0, 1.0, 0.25);
    let (p, v) = inner_maximize(&m, &c, c.h_gain, &cfg).unwrap();
    assert_eq!((p, v), (0.0, 0.0));
    let (p, _) = inner_maximize(&m, &c, 5.0, &cfg).unwrap();
    assert_eq!(p, 0.0);
    let (p, v) = inner_maximize(&m, &ch(0, 0.5, 0.8), 0.1, &cfg).unwrap();
    assert_eq!((p, v), (0.0, 0.0));

    // At u = 0 the maximizer is the single peak of the curve.
    let grid = cfg.grid(1);
    let peaks = scan_local_maxima(&m, &c, grid.points()).unwrap();
    assert_eq!(peaks.len(), 1);
    let (p, v) = inner_maximize(&m, &c, 0.0, &cfg).unwrap();
    let k = grid.points().iter().position(|&q| q == peaks[0].0).unwrap();
    assert!(p >= grid.points()[k - 1] && p <= grid.points()[k + 1]);
    assert!(v >= peaks[0].1);
}

#[test]
fn dual_function_examples() {
    let m = qpsk();
    let chans = [ch(0, 2.0, 0.5), ch(1, 1.0, 0.9), ch(2, 0.2, 0.4)];
    let cfg = SolverConfig::new(0.7);
    let (g, p) = dual_value(&m, &chans, 2.5, &cfg).unwrap();
    assert!(p.iter().all(|&v| v == 0.0));
    assert!((g - 2.5 * 0.7 / LN_2).abs() < 1e-15);

    let u = 0.3;
    let (g1, p1) = dual_value(&m, &chans[..1], u, &cfg).unwrap();
    let (pi, vi) = inner_maximize(&m, &chans[0], u, &cfg).unwrap();
    assert_eq!(p1, vec![pi]);
    assert!((g1 - (vi + u * 0.7 / LN_2)).abs() < 1e-15);

    let us: Vec<f64> = (0..40).map(|k| 0.05 * k as f64).collect();
    let problem = DualProblem::new(&m, &chans, &cfg).unwrap();
    let gs: Vec<f64> = us.iter().map(|&u| problem.dual_value(u).unwrap().0).collect();
    for k in 1..us.len() - 1 {
        assert!(gs[k] <= 0.5 * (gs[k - 1] + gs[k + 1]) + 1e-9, "g not convex at u={}", us[k]);
    }
}

#[test]
fn degenerate_channels_give_zero() {
    let chans = [ch(0, 0.5, 0.9), ch(1, 1.0, 1.0)];
    let sol = solve_dual(&qpsk(), &chans, &SolverConfig::new(2.0)).unwrap();
    assert_eq!(sol.u, 0.0);
    assert_eq!(sol.primal_value, 0.0);
    assert!(sol.alloc.powers().iter().all(|&p| p == 0.0));
}

#[test]
fn invariants_on_random_instances() {
    let m = qpsk();
    for seed in 0..6 {
        let chans = iid_rayleigh(16, 1.0, 0.5, seed).unwrap().channels;
        for budget in [0.05, 0.5, 3.0, 40.0] {
            let cfg = SolverConfig::new(budget);
            let sol = solve_dual(&m, &chans, &cfg).unwrap();
            assert_solution_invariants(&sol, &cfg, chans.len());
        }
    }
}

#[test]
fn invariants_with_sixteen_qam_and_two_peaks() {
    for c in [Constellation::square_qam(16).unwrap(), Constellation::pam_two_scale()] {
        let m = InputModel::discrete(c);
        let chans = iid_rayleigh(12, 1.0, 0.5, 21).unwrap().channels;
        for budget in [0.3, 5.0, 200.0] {
            let cfg = SolverConfig::new(budget);
            let sol = solve_dual(&m, &chans, &cfg).unwrap();
            assert_solution_invariants(&sol, &cfg, chans.len());
        }
    }
}

#[test]
fn gaussian_inputs_reproduce_closed_form() {
    for seed in 0..8 {
        let chans = iid_rayleigh(12, 1.0, 0.5, 100 + seed).unwrap().channels;
        let budget = [0.2, 1.0, 10.0, 100.0][seed as usize % 4];
        let cfg = SolverConfig::new(budget);
        let sol = solve_dual(&InputModel::Gaussian, &chans, &cfg).unwrap();
        let closed = gaussian_optimal_pa(&chans, budget).unwrap();
        let closed_rate = InputModel::Gaussian.total_rate(&chans, &closed.alloc).unwrap();
        assert!((sol.primal_value - closed_rate).abs() < 1e-4, "seed {seed}: {} vs {closed_rate}", sol.primal_value);
        let e_p = cfg.resolved_p_max(chans.len()) / cfg.inner_grid_points as f64;
        for (a, b) in sol.alloc.powers().iter().zip(closed.alloc.powers()) {
            assert!((a - b).abs() <= e_p);
        }
        // Saturation: a positive multiplier spends the whole budget.
        assert!(sol.u > 0.0);
        assert!((sol.alloc.average_power() - budget).abs() <= 1e-6 * budget);
        assert_solution_invariants(&sol, &cfg, chans.len());
    }
}

#[test]
fn gaussian_closed_form_is_inner_optimum() {
    // For concave log rates the closed form is the exact per-carrier maximizer.
    let cfg = SolverConfig::new(1.0);
    for (h, g, u) in [(2.0, 1.0, 0.5), (3.0, 0.2, 0.1), (1.0, 0.0, 0.3)] {
        let c = ch(0, h, g);
        let (p, _) = inner_maximize(&InputModel::Gaussian, &c, u, &cfg).unwrap();
        let closed = gaussian_power_for_multiplier(&c, u);
        assert!((p - closed).abs() < 1e-4 * closed.max(1.0), "({h},{g},{u}): {p} vs {closed}");
    }
}

#[test]
fn parallel_solve_matches_single_thread() {
    let m = qpsk();
    let chans = iid_rayleigh(48, 1.0, 0.5, 5).unwrap().channels;
    let cfg = SolverConfig::new(0.8);
    let parallel = solve_dual(&m, &chans, &cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let single = pool.install(|| solve_dual(&m, &chans, &cfg).unwrap());
    assert_eq!(parallel, single);
}

#[test]
fn config_validation() {
    let m = qpsk();
    let chans = [ch(0, 1.0, 0.5)];
    let mut cfg = SolverConfig::new(1.0);
    cfg.inner_grid_points = 50;
    assert!(solve_dual(&m, &chans, &cfg).is_err());
    assert!(solve_dual(&m, &chans, &SolverConfig::new(0.0)).is_err());
    assert!(solve_dual(&m, &[], &SolverConfig::new(1.0)).is_err());
    assert!(dual_value(&m, &chans, -1.0, &SolverConfig::new(1.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(24) })]

    #[test]
    fn solver_invariants_hold(
        gains in prop::collection::vec((0.01f64..4.0, 0.01f64..4.0), 1..8),
        budget in 0.01f64..50.0,
    ) {
        let chans: Vec<_> = gains.iter().enumerate().map(|(i, &(h, g))| ch(i, h, g)).collect();
        let cfg = SolverConfig { inner_grid_points: 200, ..SolverConfig::new(budget) };
        let sol = solve_dual(&qpsk(), &chans, &cfg).unwrap();
        assert_solution_invariants(&sol, &cfg, chans.len());
    }
}
