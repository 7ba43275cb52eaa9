use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ofdm_secrecy::harness::experiments::{
    allocation_table, gap_table, mi_sweep, oracle_table, rate_sweep, run_gap_study, run_oracle_check, solution_json,
    GAP_STUDY_BUDGET, GAP_STUDY_CARRIERS,
};
use ofdm_secrecy::harness::{reproduce_all, run_allocation_bars, run_compare, ExperimentConfig, ReproduceOptions, Table};
use ofdm_secrecy::mi::quadrature::DEFAULT_ORDER;
use ofdm_secrecy::secrecy::{linear_grid, log_grid};
use ofdm_secrecy::{solve_dual, Constellation, Error, InputModel, MiEvaluator, Result, SubcarrierChannel};

/// Secrecy rates and power allocation for OFDM wire-tap channels with
/// finite input constellations.
#[derive(Parser)]
#[command(name = "ofdm-secrecy", version)]
struct Cli {
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true, env = "OFDM_SECRECY_OUT_DIR")]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mutual information and MMSE against SNR.
    MiSweep {
        #[arg(long, default_value = "qpsk")]
        constellation: String,
        #[arg(long, default_value_t = 0.01)]
        gamma_min: f64,
        #[arg(long, default_value_t = 1000.0)]
        gamma_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Quadrature nodes per real dimension.
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
    },
    /// Legitimate, eavesdropper and secrecy rate of one carrier against power.
    RateSweep {
        /// A constellation name, or `gaussian`.
        #[arg(long, default_value = "qpsk")]
        constellation: String,
        #[arg(long, default_value_t = 1.0)]
        h_gain: f64,
        #[arg(long, default_value_t = 0.25)]
        g_gain: f64,
        #[arg(long, default_value_t = 0.01)]
        p_min: f64,
        #[arg(long, default_value_t = 1e4)]
        p_max: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
        /// Space powers linearly instead of logarithmically.
        #[arg(long)]
        linear: bool,
    },
    /// Dual power allocation for the first budget of the config.
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's budget sweep with a single budget.
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Secrecy rate of every allocation strategy over the budget sweep.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Per-carrier powers over the budget sweep (at most 16 carriers).
    Bars {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Duality gap on a fixed multipath channel sampled at increasing N.
    GapStudy {
        #[arg(long, default_value = "qpsk")]
        constellation: String,
        #[arg(long, default_value_t = GAP_STUDY_BUDGET)]
        budget: f64,
        #[arg(long, value_delimiter = ',', default_values_t = GAP_STUDY_CARRIERS)]
        n: Vec<usize>,
    },
    /// Cross-checks the dual solver against exhaustive search on tiny instances.
    OracleCheck {
        #[arg(long, default_value = "qpsk")]
        constellation: String,
    },
    /// Writes every reproduction table into the output directory.
    ReproduceAll {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Prints the default configuration as TOML.
    PrintConfig,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::from(1)
        }
    }
}

fn load(config: Option<&Path>) -> Result<ExperimentConfig> {
    match config {
        Some(path) => ExperimentConfig::load(path),
        None => Ok(ExperimentConfig::default()),
    }
}

fn out_dir(cli: Option<&PathBuf>, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli.cloned()
        .or_else(|| cfg.map(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(ofdm_secrecy::harness::config::DEFAULT_OUTPUT_DIR))
}

fn write(table: &Table, dir: &Path, file: &str) -> Result<()> {
    let path = dir.join(file);
    table.write(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let out = cli.out_dir.as_ref();
    match cli.command {
        Command::MiSweep {
            constellation,
            gamma_min,
            gamma_max,
            points,
            order,
        } => {
            let c = Constellation::by_name(&constellation)?;
            let ev = MiEvaluator::with_order(c.clone(), order)?;
            let gammas = checked_grid(gamma_min, gamma_max, points, false)?;
            write(&mi_sweep(&ev, &gammas)?, &out_dir(out, None), &format!("mi_{}.csv", c.label()))?;
        }
        Command::RateSweep {
            constellation,
            h_gain,
            g_gain,
            p_min,
            p_max,
            points,
            linear,
        } => {
            let model = if constellation == "gaussian" {
                InputModel::Gaussian
            } else {
                InputModel::discrete(Constellation::by_name(&constellation)?)
            };
            let ch = SubcarrierChannel::new(0, h_gain, g_gain)?;
            let powers = checked_grid(p_min, p_max, points, linear)?;
            let file = format!("rate_{}.csv", model.label());
            write(&rate_sweep(&model, &ch, &powers)?, &out_dir(out, None), &file)?;
        }
        Command::Solve { config, budget } => {
            let cfg = load(config.as_deref())?;
            let budget = budget.unwrap_or(cfg.budgets[0]);
            let channels = cfg.channel.realize()?.channels;
            let model = InputModel::discrete(cfg.constellation.build()?);
            let solver = cfg.solver.for_budget(budget);
            let sol = solve_dual(&model, &channels, &solver)?;
            let dir = out_dir(out, Some(&cfg));
            write(&allocation_table(&channels, &sol), &dir, "allocation.csv")?;
            println!("{}", serde_json::to_string_pretty(&solution_json(&sol)).expect("json"));
        }
        Command::Compare { config } => {
            let cfg = load(config.as_deref())?;
            let cmp = run_compare(&cfg)?;
            write(&cmp.table(), &out_dir(out, Some(&cfg)), &format!("compare_{}.csv", cmp.label))?;
        }
        Command::Bars { config } => {
            let cfg = load(config.as_deref())?;
            write(&run_allocation_bars(&cfg)?, &out_dir(out, Some(&cfg)), "bars.csv")?;
        }
        Command::GapStudy {
            constellation,
            budget,
            n,
        } => {
            let c = Constellation::by_name(&constellation)?;
            let result = run_gap_study(&c, budget, &n, &ExperimentConfig::default().solver)?;
            write(&gap_table(&result), &out_dir(out, None), &format!("gap_study_{}.csv", c.label()))?;
            match result.slope {
                Some(s) => println!("log-log slope: {s}"),
                None => println!("log-log slope: undefined (fewer than two gaps above the noise floor)"),
            }
        }
        Command::OracleCheck { constellation } => {
            let c = Constellation::by_name(&constellation)?;
            let checks = run_oracle_check(&c, &ExperimentConfig::default().solver)?;
            let mut failed = 0;
            for ch in &checks {
                let verdict = if ch.passed { "PASS" } else { "FAIL" };
                println!(
                    "{verdict} {} brute={:.6} dual_primal={:.6} dual={:.6}",
                    ch.label, ch.brute_force_rate, ch.dual_primal_rate, ch.dual_value
                );
                failed += usize::from(!ch.passed);
            }
            write(&oracle_table(&checks), &out_dir(out, None), "oracle_check.csv")?;
            println!("{} of {} passed", checks.len() - failed, checks.len());
            if failed > 0 {
                return Ok(ExitCode::from(2));
            }
        }
        Command::ReproduceAll { config } => {
            let cfg = load(config.as_deref())?;
            let dir = out_dir(out, Some(&cfg));
            let report = reproduce_all(&dir, &ReproduceOptions::from_config(&cfg))?;
            for path in &report.written {
                println!("wrote {}", path.display());
            }
            for (name, err) in &report.failures {
                let line = serde_json::json!({ "error": "experiment", "experiment": name, "message": err });
                eprintln!("{line}");
            }
            if !report.failures.is_empty() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::PrintConfig => print!("{}", ExperimentConfig::default().to_toml()),
    }
    Ok(ExitCode::SUCCESS)
}

fn checked_grid(lo: f64, hi: f64, points: usize, linear: bool) -> Result<Vec<f64>> {
    let min = if linear { 0.0 } else { f64::MIN_POSITIVE };
    if !(lo.is_finite() && hi.is_finite() && lo >= min && hi > lo) || points < 2 {
        return Err(Error::InvalidArgument(format!(
            "need {} <= min < max and at least 2 points, got [{lo}, {hi}] with {points}",
            if linear { "0" } else { "0 <" }
        )));
    }
    Ok(if linear {
        linear_grid(lo, hi, points)
    } else {
        log_grid(lo, hi, points)
    })
}
