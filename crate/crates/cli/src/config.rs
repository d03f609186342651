//! Run configuration: JSON file values, overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use defect_cert::{PronyConfig, DEFAULT_PRIME};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
    Modular,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub d: Option<usize>,
    #[serde(rename = "W")]
    pub w: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub mode: Option<Mode>,
    pub prime: Option<u64>,
    pub noise_eps: Option<f64>,
    pub eps0: Option<f64>,
    pub seed: Option<u64>,
    pub thresholds: BTreeMap<String, f64>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Default thresholds with the `thresholds` overrides applied.
    pub fn prony(&self) -> Result<PronyConfig> {
        let mut cfg = PronyConfig::default();
        for (name, &value) in &self.thresholds {
            let slot = match name.as_str() {
                "hankel_pivot" => &mut cfg.hankel_pivot,
                "node_separation" => &mut cfg.node_separation,
                "zero_node" => &mut cfg.zero_node,
                "zero_amplitude" => &mut cfg.zero_amplitude,
                "imaginary" => &mut cfg.imaginary,
                other => bail!("unknown threshold {other:?}"),
            };
            if !(value.is_finite() && value >= 0.0) {
                bail!("threshold {name} must be a nonnegative number");
            }
            *slot = value;
        }
        Ok(cfg)
    }
}

/// Global settings after merging flags over the config file.
#[derive(Debug)]
pub struct Settings {
    pub mode: Option<Mode>,
    pub prime: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub config: RunConfig,
}

impl Settings {
    pub fn resolve(
        mode: Option<Mode>,
        prime: Option<u64>,
        seed: Option<u64>,
        out: Option<PathBuf>,
        config: Option<&Path>,
    ) -> Result<Self> {
        let config = match config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let prime = prime.or(config.prime).unwrap_or(DEFAULT_PRIME);
        if !defect_cert::is_prime(prime) {
            bail!("modulus {prime} is not prime");
        }
        Ok(Settings {
            mode: mode.or(config.mode),
            prime,
            seed: seed.or(config.seed).unwrap_or(0),
            out: out.or_else(|| config.output.clone()),
            config,
        })
    }

    pub fn mode_or(&self, default: Mode) -> Mode {
        self.mode.unwrap_or(default)
    }

    pub fn d(&self, flag: Option<usize>) -> Result<usize> {
        flag.or(self.config.d).context("the model order d is required (--d or config)")
    }

    pub fn w(&self, flag: Option<usize>) -> Option<usize> {
        flag.or(self.config.w)
    }

    pub fn k(&self, flag: Option<usize>) -> Option<usize> {
        flag.or(self.config.k)
    }

    pub fn input(&self, flag: Option<PathBuf>) -> Result<PathBuf> {
        flag.or_else(|| self.config.input.clone())
            .context("an input file is required (positional argument or config)")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_and_rejects_unknown_keys() {
        let c: RunConfig = serde_json::from_str(r#"{"d": 3, "W": 8, "mode": "modular", "thresholds": {"zero_node": 1e-9}}"#).unwrap();
        assert_eq!((c.d, c.w, c.mode), (Some(3), Some(8), Some(Mode::Modular)));
        assert_eq!(c.prony().unwrap().zero_node, 1e-9);
        assert!(serde_json::from_str::<RunConfig>(r#"{"dd": 3}"#).is_err());
        let bad: RunConfig = serde_json::from_str(r#"{"thresholds": {"nope": 1.0}}"#).unwrap();
        assert!(bad.prony().is_err());
    }
}
