//! Seedable channel realizations and CSV import/export.
//!
//! Random draws use `ChaCha8Rng::seed_from_u64`, whose output stream is
//! fixed across platforms. There is no global RNG state.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::secrecy::SubcarrierChannel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    IidRayleigh,
    Multipath,
    File,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub channels: Vec<SubcarrierChannel>,
    pub seed: Option<u64>,
    pub kind: ChannelKind,
}

impl ChannelRealization {
    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }
}

/// Independent Rayleigh fading: `|h_i|²` and `|g_i|²` exponential with the given means.
pub fn iid_rayleigh(n_carriers: usize, mean_h_gain: f64, mean_g_gain: f64, seed: u64) -> Result<ChannelRealization> {
    if n_carriers == 0 {
        return Err(Error::invalid("need at least one carrier"));
    }
    let h = exponential(mean_h_gain, "mean_h_gain")?;
    let g = exponential(mean_g_gain, "mean_g_gain")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let channels = (0..n_carriers)
        .map(|i| {
            let hg = h.sample(&mut rng);
            let gg = g.sample(&mut rng);
            SubcarrierChannel::new(i, hg, gg)
        })
        .collect::<Result<_>>()?;
    Ok(ChannelRealization {
        channels,
        seed: Some(seed),
        kind: ChannelKind::IidRayleigh,
    })
}

fn exponential(mean: f64, name: &str) -> Result<Exp<f64>> {
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::invalid(format!("{name} must be finite and > 0, got {mean}")));
    }
    Exp::new(1.0 / mean).map_err(|e| Error::invalid(format!("{name}: {e}")))
}

/// `N`-point frequency response of a tap vector: `H_i = Σ_t a_t e^{−j2π i t / N}`.
pub fn frequency_response(taps: &[Complex64], n_carriers: usize) -> Vec<Complex64> {
    (0..n_carriers)
        .map(|i| {
            taps.iter()
                .enumerate()
                .map(|(t, a)| a * Complex64::from_polar(1.0, -2.0 * PI * (i * t) as f64 / n_carriers as f64))
                .sum()
        })
        .collect()
}

/// Smooth frequency-selective channels sampled from fixed tap vectors.
///
/// The response magnitude is Lipschitz in the normalized frequency `i/N`
/// with a constant that depends only on the taps, so refining `N` samples
/// the same underlying curve more densely.
pub fn multipath(n_carriers: usize, taps_h: &[Complex64], taps_g: &[Complex64]) -> Result<ChannelRealization> {
    for (name, taps) in [("taps_h", taps_h), ("taps_g", taps_g)] {
        if taps.is_empty() {
            return Err(Error::invalid(format!("{name} must not be empty")));
        }
        if n_carriers > 1 && taps.len() >= n_carriers {
            return Err(Error::invalid(format!(
                "{name} has {} taps; needs fewer than the {n_carriers} carriers",
                taps.len()
            )));
        }
        if taps.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::invalid(format!("{name} contains non-finite taps")));
        }
    }
    if n_carriers == 0 {
        return Err(Error::invalid("need at least one carrier"));
    }
    let h = frequency_response(taps_h, n_carriers);
    let g = frequency_response(taps_g, n_carriers);
    let channels = h
        .iter()
        .zip(&g)
        .enumerate()
        .map(|(i, (h, g))| SubcarrierChannel::new(i, h.norm_sqr(), g.norm_sqr()))
        .collect::<Result<_>>()?;
    Ok(ChannelRealization {
        channels,
        seed: None,
        kind: ChannelKind::Multipath,
    })
}

pub const CSV_HEADER: &str = "index,h_gain,g_gain";

/// Writes `index,h_gain,g_gain` rows. Floats use Rust's shortest round-trip form.
pub fn write_csv<W: Write>(channels: &[SubcarrierChannel], mut out: W) -> Result<()> {
    let mut buf = String::new();
    writeln!(buf, "{CSV_HEADER}").unwrap();
    for ch in channels {
        writeln!(buf, "{},{:?},{:?}", ch.index, ch.h_gain, ch.g_gain).unwrap();
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

/// Reads the format produced by [`write_csv`]. Blank lines are skipped.
pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<SubcarrierChannel>> {
    let mut channels = Vec::new();
    let mut saw_header = false;
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line.replace(' ', "") != CSV_HEADER {
                return Err(Error::Csv {
                    line: n + 1,
                    message: format!("expected header `{CSV_HEADER}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Csv {
                line: n + 1,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let bad = |what: &str| Error::Csv {
            line: n + 1,
            message: format!("cannot parse {what}"),
        };
        let index = fields[0].parse().map_err(|_| bad("index"))?;
        let h: f64 = fields[1].parse().map_err(|_| bad("h_gain"))?;
        let g: f64 = fields[2].parse().map_err(|_| bad("g_gain"))?;
        let ch = SubcarrierChannel::new(index, h, g).map_err(|e| Error::Csv {
            line: n + 1,
            message: e.to_string(),
        })?;
        channels.push(ch);
    }
    if channels.is_empty() {
        return Err(Error::Csv {
            line: 0,
            message: "no channel rows".into(),
        });
    }
    Ok(channels)
}

/// `max_i N·| |H_{i+1}| − |H_i| |` over consecutive carriers.
pub fn empirical_lipschitz(response: &[Complex64]) -> f64 {
    let n = response.len() as f64;
    response
        .windows(2)
        .map(|w| n * (w[1].norm() - w[0].norm()).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rayleigh_is_deterministic() {
        let a = iid_rayleigh(64, 1.0, 0.5, 9).unwrap();
        let b = iid_rayleigh(64, 1.0, 0.5, 9).unwrap();
        assert_eq!(a, b);
        let other = iid_rayleigh(64, 1.0, 0.5, 10).unwrap();
        assert_ne!(a.channels, other.channels);
        assert_eq!(iid_rayleigh(1, 1.0, 0.5, 1).unwrap().len(), 1);
    }

    #[test]
    fn rayleigh_sample_means() {
        let r = iid_rayleigh(100_000, 1.0, 0.5, 3).unwrap();
        let n = r.len() as f64;
        let mh: f64 = r.channels.iter().map(|c| c.h_gain).sum::<f64>() / n;
        let mg: f64 = r.channels.iter().map(|c| c.g_gain).sum::<f64>() / n;
        assert!((mh - 1.0).abs() < 0.02, "{mh}");
        assert!((mg - 0.5).abs() < 0.01, "{mg}");
    }

    #[test]
    fn rayleigh_rejects_bad_means() {
        assert!(iid_rayleigh(4, 0.0, 1.0, 1).is_err());
        assert!(iid_rayleigh(4, 1.0, -1.0, 1).is_err());
        assert!(iid_rayleigh(0, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn flat_channel_from_single_tap() {
        let r = multipath(8, &[c(1.0)], &[c(0.5)]).unwrap();
        for ch in &r.channels {
            assert!((ch.h_gain - 1.0).abs() < 1e-15);
            assert!((ch.g_gain - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn two_tap_response() {
        let r = multipath(4, &[c(1.0), c(0.5)], &[c(1.0)]).unwrap();
        let expected = [2.25, 1.25, 0.25, 1.25];
        for (ch, e) in r.channels.iter().zip(expected) {
            assert!((ch.h_gain - e).abs() < 1e-14, "{} vs {e}", ch.h_gain);
        }
    }

    #[test]
    fn multipath_errors() {
        assert!(multipath(8, &[], &[c(1.0)]).is_err());
        assert!(multipath(4, &[c(1.0); 4], &[c(1.0)]).is_err());
    }

    #[test]
    fn lipschitz_constant_stable_under_refinement() {
        let taps = [c(1.0), Complex64::new(0.4, -0.2), c(0.15)];
        let ratios: Vec<f64> = [64, 256, 1024]
            .iter()
            .map(|&n| empirical_lipschitz(&frequency_response(&taps, n)))
            .collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
        assert!((hi - lo) / hi < 0.10, "{ratios:?}");
        let l64 = ratios[0];
        let l1024 = ratios[2];
        assert!(l1024 <= 2.0 * l64);
    }

    #[test]
    fn csv_round_trip() {
        let r = iid_rayleigh(5, 1.0, 0.5, 2).unwrap();
        let mut buf = Vec::new();
        write_csv(&r.channels, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, r.channels);
    }

    #[test]
    fn csv_errors() {
        assert!(read_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
        assert!(read_csv("index,h_gain,g_gain\n1,2\n".as_bytes()).is_err());
        assert!(read_csv("index,h_gain,g_gain\n1,x,3\n".as_bytes()).is_err());
        assert!(read_csv("index,h_gain,g_gain\n1,-2,3\n".as_bytes()).is_err());
        assert!(read_csv("index,h_gain,g_gain\n".as_bytes()).is_err());
    }
}
