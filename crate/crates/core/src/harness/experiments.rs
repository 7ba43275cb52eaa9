//! Experiment drivers. Every output is a CSV table with a header row; floats
//! are written in Rust's shortest round-trip form, which always uses `.` as
//! the decimal separator.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::config::{default_budgets, ExperimentConfig, SolverSettings};
use crate::channel::iid_rayleigh;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::mi::MiEvaluator;
use crate::oracle::{cross_check, gap_study, GapStudyResult, OracleCheck};
use crate::secrecy::{gaussian_total_rate, log_grid, InputModel, SubcarrierChannel};
use crate::solver::{equal_pa, gaussian_optimal_pa, solve_dual, DualSolution};

/// Gain ratios `g_gain / h_gain` (with `h_gain = 1`) swept for the two-peak curve.
pub const TWO_PEAK_GAIN_RATIOS: [f64; 4] = [0.02, 0.05, 0.1, 0.2];

/// Log-spaced power grid on which two-peak curves are written and scanned.
pub fn two_peak_grid() -> Vec<f64> {
    log_grid(1e-2, 1e6, 2000)
}

/// Fixed taps shared by every `N` in the gap study.
pub fn gap_study_taps() -> (Vec<Complex64>, Vec<Complex64>) {
    (
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.4, -0.2), Complex64::new(0.15, 0.0)],
        vec![Complex64::new(0.5, 0.0), Complex64::new(-0.3, 0.25), Complex64::new(0.1, 0.0)],
    )
}

pub const GAP_STUDY_CARRIERS: [usize; 4] = [8, 32, 128, 512];
pub const GAP_STUDY_BUDGET: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Values of column `name` parsed as floats.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| *h == name)?;
        self.rows.iter().map(|r| r[k].parse().ok()).collect()
    }
}

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// `gamma,mi_bits,mmse`
pub fn mi_sweep(ev: &MiEvaluator, gammas: &[f64]) -> Result<Table> {
    let mut t = Table::new(vec!["gamma", "mi_bits", "mmse"]);
    for &g in gammas {
        t.push(vec![num(g), num(ev.mutual_info(g)?), num(ev.mmse(g)?)]);
    }
    Ok(t)
}

/// `p,i_legit,i_eave,secrecy_rate`; `p` is linear transmit power.
pub fn rate_sweep(model: &InputModel, ch: &SubcarrierChannel, powers: &[f64]) -> Result<Table> {
    let mut t = Table::new(vec!["p", "i_legit", "i_eave", "secrecy_rate"]);
    for &p in powers {
        let il = model.mutual_info(ch.h_gain * p)?;
        let ie = model.mutual_info(ch.g_gain * p)?;
        t.push(vec![num(p), num(il), num(ie), num(model.subcarrier_rate(ch, p)?)]);
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Strategy {
    OptimalDiscrete,
    GaussianPaAppliedToDiscrete,
    EqualPa,
    GaussianInputOptimal,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::OptimalDiscrete,
        Strategy::GaussianPaAppliedToDiscrete,
        Strategy::EqualPa,
        Strategy::GaussianInputOptimal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::OptimalDiscrete => "optimal-discrete",
            Strategy::GaussianPaAppliedToDiscrete => "gaussian-pa-applied-to-discrete",
            Strategy::EqualPa => "equal-pa",
            Strategy::GaussianInputOptimal => "gaussian-input-optimal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub budget: f64,
    pub strategy: Strategy,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub label: String,
    pub rows: Vec<CompareRow>,
}

impl Comparison {
    /// `(budget, rate)` pairs of one strategy in sweep order.
    pub fn series(&self, strategy: Strategy) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.strategy == strategy)
            .map(|r| (r.budget, r.rate))
            .collect()
    }

    /// `budget,strategy,rate`
    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["budget", "strategy", "rate"]);
        for r in &self.rows {
            t.push(vec![num(r.budget), r.strategy.as_str().into(), num(r.rate)]);
        }
        t
    }
}

/// Secrecy rate of the four strategies at every budget of the sweep.
/// Discrete-input strategies are evaluated with the configured constellation.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<Comparison> {
    cfg.validate()?;
    let constellation = cfg.constellation.build()?;
    let channels = cfg.channel.realize()?.channels;
    compare_on(&constellation, &channels, &cfg.budgets, &cfg.solver)
}

pub fn compare_on(
    constellation: &Constellation,
    channels: &[SubcarrierChannel],
    budgets: &[f64],
    solver: &SolverSettings,
) -> Result<Comparison> {
    let model = InputModel::discrete(constellation.clone());
    let mut budgets = budgets.to_vec();
    budgets.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(4 * budgets.len());
    for &budget in &budgets {
        let optimal = solve_dual(&model, channels, &solver.for_budget(budget))?;
        let gauss = gaussian_optimal_pa(channels, budget)?;
        let equal = equal_pa(channels, budget)?;
        let rates = [
            optimal.primal_value,
            model.total_rate(channels, &gauss.alloc)?,
            model.total_rate(channels, &equal)?,
            gaussian_total_rate(channels, &gauss.alloc)?,
        ];
        for (strategy, rate) in Strategy::ALL.into_iter().zip(rates) {
            rows.push(CompareRow { budget, strategy, rate });
        }
    }
    Ok(Comparison {
        label: constellation.label().to_string(),
        rows,
    })
}

pub const MAX_BAR_CARRIERS: usize = 16;

/// `budget,input,carrier,power` for the discrete optimum and the Gaussian
/// closed form.
pub fn run_allocation_bars(cfg: &ExperimentConfig) -> Result<Table> {
    cfg.validate()?;
    let constellation = cfg.constellation.build()?;
    let channels = cfg.channel.realize()?.channels;
    allocation_bars_on(&constellation, &channels, &cfg.budgets, &cfg.solver)
}

pub fn allocation_bars_on(
    constellation: &Constellation,
    channels: &[SubcarrierChannel],
    budgets: &[f64],
    solver: &SolverSettings,
) -> Result<Table> {
    if channels.len() > MAX_BAR_CARRIERS {
        return Err(Error::config(
            "channel.n_carriers",
            format!("allocation bars need at most {MAX_BAR_CARRIERS} carriers, got {}", channels.len()),
        ));
    }
    let model = InputModel::discrete(constellation.clone());
    let mut budgets = budgets.to_vec();
    budgets.sort_by(f64::total_cmp);
    let mut t = Table::new(vec!["budget", "input", "carrier", "power"]);
    for &budget in &budgets {
        let discrete = solve_dual(&model, channels, &solver.for_budget(budget))?;
        let gauss = gaussian_optimal_pa(channels, budget)?;
        for (input, alloc) in [(constellation.label(), &discrete.alloc), ("gaussian", &gauss.alloc)] {
            for (ch, &p) in channels.iter().zip(alloc.powers()) {
                t.push(vec![num(budget), input.to_string(), ch.index.to_string(), num(p)]);
            }
        }
    }
    Ok(t)
}

/// `n,dual_value,primal_value,gap`
pub fn gap_table(result: &GapStudyResult) -> Table {
    let mut t = Table::new(vec!["n", "dual_value", "primal_value", "gap"]);
    for r in &result.rows {
        t.push(vec![r.n.to_string(), num(r.dual_value), num(r.primal_value), num(r.gap)]);
    }
    t
}

pub fn run_gap_study(constellation: &Constellation, budget: f64, n_list: &[usize], solver: &SolverSettings) -> Result<GapStudyResult> {
    let (th, tg) = gap_study_taps();
    gap_study(
        &InputModel::discrete(constellation.clone()),
        &th,
        &tg,
        n_list,
        &solver.for_budget(budget),
    )
}

/// One brute-force cross-check case.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCase {
    pub label: String,
    pub channels: Vec<SubcarrierChannel>,
    pub budget: f64,
    pub grid_per_carrier: usize,
}

pub const ORACLE_BUDGETS: [f64; 3] = [0.5, 2.0, 10.0];
pub const ORACLE_GRID: usize = 200;

/// Ten seeded Rayleigh instances alternating `N = 2, 3`, each at every
/// budget in [`ORACLE_BUDGETS`], plus a fixed two-carrier instance.
pub fn oracle_cases() -> Result<Vec<OracleCase>> {
    let mut cases = vec![OracleCase {
        label: "fixed-n2".into(),
        channels: vec![SubcarrierChannel::new(0, 2.0, 0.5)?, SubcarrierChannel::new(1, 1.0, 0.9)?],
        budget: 1.0,
        grid_per_carrier: ORACLE_GRID,
    }];
    for seed in 0..10u64 {
        let n = 2 + (seed % 2) as usize;
        let channels = iid_rayleigh(n, 1.0, 0.5, seed)?.channels;
        for budget in ORACLE_BUDGETS {
            cases.push(OracleCase {
                label: format!("seed{seed}-n{n}-p{budget}"),
                channels: channels.clone(),
                budget,
                grid_per_carrier: ORACLE_GRID,
            });
        }
    }
    Ok(cases)
}

pub fn run_oracle_check(constellation: &Constellation, solver: &SolverSettings) -> Result<Vec<OracleCheck>> {
    let model = InputModel::discrete(constellation.clone());
    oracle_cases()?
        .into_iter()
        .map(|case| cross_check(&model, &case.channels, &solver.for_budget(case.budget), case.grid_per_carrier, case.label))
        .collect()
}

/// `label,n,budget,brute_force_rate,dual_primal_rate,dual_value,passed`
pub fn oracle_table(checks: &[OracleCheck]) -> Table {
    let mut t = Table::new(vec![
        "label",
        "n",
        "budget",
        "brute_force_rate",
        "dual_primal_rate",
        "dual_value",
        "passed",
    ]);
    for c in checks {
        t.push(vec![
            c.label.clone(),
            c.n.to_string(),
            num(c.budget),
            num(c.brute_force_rate),
            num(c.dual_primal_rate),
            num(c.dual_value),
            c.passed.to_string(),
        ]);
    }
    t
}

/// `carrier,power` plus a JSON summary of a solve.
pub fn allocation_table(channels: &[SubcarrierChannel], sol: &DualSolution) -> Table {
    let mut t = Table::new(vec!["carrier", "h_gain", "g_gain", "power"]);
    for (ch, &p) in channels.iter().zip(sol.alloc.powers()) {
        t.push(vec![ch.index.to_string(), num(ch.h_gain), num(ch.g_gain), num(p)]);
    }
    t
}

pub fn solution_json(sol: &DualSolution) -> serde_json::Value {
    serde_json::json!({
        "u": sol.u,
        "primal_value": sol.primal_value,
        "dual_value": sol.dual_value,
        "gap": sol.gap,
        "iterations": sol.iterations,
        "budget": sol.alloc.budget(),
        "average_power": sol.alloc.average_power(),
        "powers": sol.alloc.powers(),
    })
}

/// Knobs for [`reproduce_all`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceOptions {
    pub seed: u64,
    pub budgets: Vec<f64>,
    pub solver: SolverSettings,
    pub compare_carriers: usize,
    pub bar_carriers: usize,
    pub gap_carriers: Vec<usize>,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            budgets: default_budgets(),
            solver: SolverSettings::default(),
            compare_carriers: 128,
            bar_carriers: 4,
            gap_carriers: GAP_STUDY_CARRIERS.to_vec(),
        }
    }
}

impl ReproduceOptions {
    /// Takes the seed, budget sweep and solver settings from `cfg`.
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        let seed = match cfg.channel {
            super::config::ChannelSpec::IidRayleigh { seed, .. } => seed,
            _ => 1,
        };
        Self {
            seed,
            budgets: cfg.budgets.clone(),
            solver: cfg.solver.clone(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Default)]
pub struct ReproduceReport {
    pub written: Vec<PathBuf>,
    /// `(experiment, error message)` for every experiment that failed.
    pub failures: Vec<(String, String)>,
}

/// Writes every table of the qualitative reproduction into `output_dir`.
/// A failing experiment is recorded and the rest still run.
pub fn reproduce_all(output_dir: &Path, opts: &ReproduceOptions) -> Result<ReproduceReport> {
    fs::create_dir_all(output_dir)?;
    let mut report = ReproduceReport::default();
    let mut run = |name: &str, f: &dyn Fn() -> Result<Vec<(String, Table)>>| match f() {
        Ok(tables) => {
            for (file, table) in tables {
                let path = output_dir.join(file);
                match table.write(&path) {
                    Ok(()) => report.written.push(path),
                    Err(e) => report.failures.push((name.to_string(), e.to_string())),
                }
            }
        }
        Err(e) => report.failures.push((name.to_string(), e.to_string())),
    };

    let qpsk = Constellation::psk(4)?;
    let qam16 = Constellation::square_qam(16)?;
    let pam = Constellation::pam_two_scale();

    run("mi-curves", &|| {
        let gammas = log_grid(1e-2, 1e3, 200);
        Ok(vec![
            ("mi_qpsk.csv".into(), mi_sweep(&MiEvaluator::new(qpsk.clone()), &gammas)?),
            ("mi_16qam.csv".into(), mi_sweep(&MiEvaluator::new(qam16.clone()), &gammas)?),
            ("mi_pam_two_scale.csv".into(), mi_sweep(&MiEvaluator::new(pam.clone()), &gammas)?),
        ])
    });

    run("rate-curves-qpsk-gaussian", &|| {
        let ch = SubcarrierChannel::new(0, 1.0, 0.25)?;
        let powers = log_grid(1e-2, 1e4, 400);
        Ok(vec![
            ("rate_gaussian.csv".into(), rate_sweep(&InputModel::Gaussian, &ch, &powers)?),
            ("rate_qpsk.csv".into(), rate_sweep(&InputModel::discrete(qpsk.clone()), &ch, &powers)?),
        ])
    });

    run("rate-curves-two-peak", &|| {
        let model = InputModel::discrete(pam.clone());
        let powers = two_peak_grid();
        TWO_PEAK_GAIN_RATIOS
            .iter()
            .map(|&r| {
                let ch = SubcarrierChannel::new(0, 1.0, r)?;
                Ok((format!("rate_two_peak_g{r}.csv"), rate_sweep(&model, &ch, &powers)?))
            })
            .collect()
    });

    run("compare", &|| {
        let channels = iid_rayleigh(opts.compare_carriers, 1.0, 0.5, opts.seed)?.channels;
        let mut out = vec![("compare_channels.csv".to_string(), channel_table(&channels))];
        for (c, file) in [(&qpsk, "compare_qpsk.csv"), (&qam16, "compare_16qam.csv")] {
            out.push((file.into(), compare_on(c, &channels, &opts.budgets, &opts.solver)?.table()));
        }
        Ok(out)
    });

    run("allocation-bars", &|| {
        let channels = iid_rayleigh(opts.bar_carriers, 1.0, 0.5, opts.seed)?.channels;
        Ok(vec![
            ("bars_channels.csv".into(), channel_table(&channels)),
            ("bars_qpsk.csv".into(), allocation_bars_on(&qpsk, &channels, &opts.budgets, &opts.solver)?),
        ])
    });

    run("gap-study", &|| {
        let result = run_gap_study(&qpsk, GAP_STUDY_BUDGET, &opts.gap_carriers, &opts.solver)?;
        Ok(vec![("gap_study_qpsk.csv".into(), gap_table(&result))])
    });

    let mut manifest = String::from("Qualitative reproduction; channel draws are seeded stand-ins.\n");
    writeln!(manifest, "seed = {}", opts.seed).unwrap();
    for p in &report.written {
        writeln!(manifest, "{}", p.file_name().unwrap().to_string_lossy()).unwrap();
    }
    for (name, err) in &report.failures {
        writeln!(manifest, "FAILED {name}: {err}").unwrap();
    }
    let manifest_path = output_dir.join("MANIFEST.txt");
    fs::write(&manifest_path, manifest)?;
    report.written.push(manifest_path);
    Ok(report)
}

/// Same columns as the channel CSV export, so the file loads back as a channel source.
fn channel_table(channels: &[SubcarrierChannel]) -> Table {
    let mut t = Table::new(vec!["index", "h_gain", "g_gain"]);
    for ch in channels {
        t.push(vec![ch.index.to_string(), num(ch.h_gain), num(ch.g_gain)]);
    }
    t
}
