//! TOML experiment configuration.
//!
//! ```toml
//! output_dir = "out"
//! budgets = [0.1, 1.0, 10.0]
//!
//! [constellation]
//! name = "qpsk"                 # or: points = [[re, im], ...], probs = [...]
//!
//! [channel]
//! kind = "iid-rayleigh"         # iid-rayleigh | multipath | file
//! n_carriers = 128
//! mean_h_gain = 1.0
//! mean_g_gain = 0.5
//! seed = 1
//!
//! [solver]
//! inner_grid_points = 512
//! dual_tol = 1e-6
//! refine_iters = 30
//! ```
//!
//! Multipath channels take `n_carriers`, `taps_h` and `taps_g` (lists of
//! `[re, im]`); file channels take `path`, a CSV in the channel export
//! format, resolved against the working directory.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{iid_rayleigh, multipath, read_csv, ChannelKind, ChannelRealization};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::solver::SolverConfig;

pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Average power budgets `P` to sweep.
    #[serde(default = "default_budgets")]
    pub budgets: Vec<f64>,
    #[serde(default)]
    pub constellation: ConstellationSpec,
    #[serde(default)]
    pub channel: ChannelSpec,
    #[serde(default)]
    pub solver: SolverSettings,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from(DEFAULT_OUTPUT_DIR)
}

/// Ten log-spaced budgets from 0.1 to 1000.
pub fn default_budgets() -> Vec<f64> {
    (0..10).map(|k| 10f64.powf(-1.0 + 4.0 * k as f64 / 9.0)).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            output_dir: default_output_dir(),
            budgets: default_budgets(),
            constellation: ConstellationSpec::default(),
            channel: ChannelSpec::default(),
            solver: SolverSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            Error::config(toml_key_path(text, e.span()), message)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.budgets.is_empty() {
            return Err(Error::config("budgets", "sweep must not be empty"));
        }
        for (k, &b) in self.budgets.iter().enumerate() {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::config(format!("budgets[{k}]"), format!("must be finite and > 0, got {b}")));
            }
        }
        self.constellation.build()?;
        self.channel.validate()?;
        self.solver.validate()
    }
}

/// Best-effort dotted key path for a parse error: the `[table]` header in
/// effect at the error location plus the key on that line.
fn toml_key_path(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    let Some(span) = span else {
        return "<root>".into();
    };
    let before = &text[..span.start.min(text.len())];
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let line_end = text[line_start..].find('\n').map_or(text.len(), |i| line_start + i);
    let line = &text[line_start..line_end];
    let table = before[..line_start]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('[') && l.ends_with(']'))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim().to_string());
    let key = line.split('=').next().map(str::trim).filter(|k| !k.is_empty() && !k.starts_with('['));
    match (table, key) {
        (Some(t), Some(k)) => format!("{t}.{k}"),
        (Some(t), None) => t,
        (None, Some(k)) => k.to_string(),
        (None, None) => "<root>".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationSpec {
    /// `bpsk`, `qpsk`, `pskN`, `qamN` or `pam-two-scale`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Custom points as `[re, im]`; rescaled to unit average power.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    /// Probabilities of the custom points; uniform when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
}

impl Default for ConstellationSpec {
    fn default() -> Self {
        Self::named("qpsk")
    }
}

impl ConstellationSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: Some(name.into()),
            points: None,
            probs: None,
        }
    }

    pub fn build(&self) -> Result<Constellation> {
        match (&self.name, &self.points) {
            (Some(_), Some(_)) => Err(Error::config("constellation", "give either `name` or `points`, not both")),
            (None, None) => Err(Error::config("constellation", "one of `name` or `points` is required")),
            (Some(name), None) => {
                if self.probs.is_some() {
                    return Err(Error::config("constellation.probs", "only valid together with `points`"));
                }
                Constellation::by_name(name).map_err(|e| Error::config("constellation.name", e.to_string()))
            }
            (None, Some(points)) => {
                let pts: Vec<Complex64> = points.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                let probs = self
                    .probs
                    .clone()
                    .unwrap_or_else(|| vec![1.0 / pts.len().max(1) as f64; pts.len()]);
                Constellation::custom(pts, probs, "custom")
                    .map_err(|e| Error::config("constellation.points", e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelSpec {
    IidRayleigh {
        n_carriers: usize,
        #[serde(default = "one")]
        mean_h_gain: f64,
        #[serde(default = "half")]
        mean_g_gain: f64,
        #[serde(default)]
        seed: u64,
    },
    Multipath {
        n_carriers: usize,
        taps_h: Vec<[f64; 2]>,
        taps_g: Vec<[f64; 2]>,
    },
    File {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}

impl Default for ChannelSpec {
    fn default() -> Self {
        ChannelSpec::IidRayleigh {
            n_carriers: 128,
            mean_h_gain: 1.0,
            mean_g_gain: 0.5,
            seed: 1,
        }
    }
}

fn taps(raw: &[[f64; 2]]) -> Vec<Complex64> {
    raw.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()
}

impl ChannelSpec {
    pub fn kind(&self) -> ChannelKind {
        match self {
            ChannelSpec::IidRayleigh { .. } => ChannelKind::IidRayleigh,
            ChannelSpec::Multipath { .. } => ChannelKind::Multipath,
            ChannelSpec::File { .. } => ChannelKind::File,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelSpec::IidRayleigh {
                n_carriers,
                mean_h_gain,
                mean_g_gain,
                ..
            } => {
                if *n_carriers == 0 {
                    return Err(Error::config("channel.n_carriers", "must be >= 1"));
                }
                for (name, v) in [("mean_h_gain", mean_h_gain), ("mean_g_gain", mean_g_gain)] {
                    if !(v.is_finite() && *v > 0.0) {
                        return Err(Error::config(format!("channel.{name}"), format!("must be finite and > 0, got {v}")));
                    }
                }
                Ok(())
            }
            ChannelSpec::Multipath { n_carriers, taps_h, taps_g } => {
                if *n_carriers == 0 {
                    return Err(Error::config("channel.n_carriers", "must be >= 1"));
                }
                for (name, t) in [("taps_h", taps_h), ("taps_g", taps_g)] {
                    if t.is_empty() {
                        return Err(Error::config(format!("channel.{name}"), "must not be empty"));
                    }
                    if *n_carriers > 1 && t.len() >= *n_carriers {
                        return Err(Error::config(
                            format!("channel.{name}"),
                            format!("{} taps; needs fewer than n_carriers = {n_carriers}", t.len()),
                        ));
                    }
                }
                Ok(())
            }
            ChannelSpec::File { path } => {
                if !path.is_file() {
                    return Err(Error::config("channel.path", format!("`{}` does not exist", path.display())));
                }
                Ok(())
            }
        }
    }

    pub fn realize(&self) -> Result<ChannelRealization> {
        match self {
            ChannelSpec::IidRayleigh {
                n_carriers,
                mean_h_gain,
                mean_g_gain,
                seed,
            } => iid_rayleigh(*n_carriers, *mean_h_gain, *mean_g_gain, *seed),
            ChannelSpec::Multipath { n_carriers, taps_h, taps_g } => multipath(*n_carriers, &taps(taps_h), &taps(taps_g)),
            ChannelSpec::File { path } => {
                let file = fs::File::open(path).map_err(|e| Error::config("channel.path", format!("{}: {e}", path.display())))?;
                Ok(ChannelRealization {
                    channels: read_csv(std::io::BufReader::new(file))?,
                    seed: None,
                    kind: ChannelKind::File,
                })
            }
        }
    }
}

/// Solver parameters shared by every budget in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    pub inner_grid_points: usize,
    pub dual_tol: f64,
    pub refine_iters: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let base = SolverConfig::new(1.0);
        Self {
            p_max: base.p_max,
            inner_grid_points: base.inner_grid_points,
            dual_tol: base.dual_tol,
            refine_iters: base.refine_iters,
        }
    }
}

impl SolverSettings {
    pub fn for_budget(&self, budget: f64) -> SolverConfig {
        SolverConfig {
            budget,
            p_max: self.p_max,
            inner_grid_points: self.inner_grid_points,
            dual_tol: self.dual_tol,
            refine_iters: self.refine_iters,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.for_budget(1.0).validate().map_err(|e| {
            let msg = e.to_string();
            let field = ["p_max", "inner_grid_points", "dual_tol"]
                .into_iter()
                .find(|f| msg.contains(f))
                .unwrap_or("refine_iters");
            Error::config(format!("solver.{field}"), msg)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.budgets.len(), 10);
        assert!((cfg.budgets[0] - 0.1).abs() < 1e-15);
        assert!((cfg.budgets[9] - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn multipath_and_custom_round_trip() {
        let text = r#"
budgets = [0.5, 2.0]

[constellation]
points = [[-3.0, 0.0], [-1.0, 0.0], [1.0, 0.0], [3.0, 0.0]]
probs = [0.1, 0.4, 0.4, 0.1]

[channel]
kind = "multipath"
n_carriers = 16
taps_h = [[1.0, 0.0], [0.4, -0.2]]
taps_g = [[0.5, 0.0]]
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.channel.kind(), ChannelKind::Multipath);
        assert_eq!(cfg.constellation.build().unwrap().len(), 4);
        assert_eq!(cfg.channel.realize().unwrap().len(), 16);
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    fn config_path(text: &str) -> String {
        match ExperimentConfig::from_toml(text) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(config_path("budgets = []"), "budgets");
        assert_eq!(config_path("budgets = [1.0, -2.0]"), "budgets[1]");
        assert_eq!(config_path("[constellation]\nname = \"psk3x\""), "constellation.name");
        assert_eq!(
            config_path("[channel]\nkind = \"iid-rayleigh\"\nn_carriers = 0"),
            "channel.n_carriers"
        );
        assert_eq!(config_path("[solver]\ninner_grid_points = 10"), "solver.inner_grid_points");
        assert_eq!(config_path("[channel]\nkind = \"file\"\npath = \"/no/such/file.csv\""), "channel.path");
        assert!(config_path("[solver]\nbogus = 1").starts_with("solver"));
    }
}
