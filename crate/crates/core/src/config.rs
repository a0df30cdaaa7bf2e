//! Line-oriented `key = value` configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are
//! case-sensitive; a repeated key is an error. See `configs/reference.conf`
//! at the repository root for the full schema.

use std::collections::BTreeMap;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::dynamics::MarketState;
use crate::error::{Error, Result};
use crate::params::{Interval, ParamBox};
use crate::robust::SelectorMode;
use crate::strategy::StrategySpec;

/// Raw key/value pairs in sorted order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::InvalidConfig(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "line {}: duplicate key `{k}`",
                    lineno + 1
                )));
            }
        }
        Ok(KvConfig { entries })
    }

    /// Applies a `key=value` override; overrides always win over file values.
    pub fn set_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("override `{assignment}` is not of the form key=value")))?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.get(key).ok_or_else(|| Error::MissingKey(key.to_string()))?;
        parse_value(key, raw)
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            Some(raw) => parse_value(key, raw),
            None => Ok(default),
        }
    }

    /// Comma-separated list.
    pub fn get_list_or<T: FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            Some(raw) => raw.split(',').map(|item| parse_value(key, item.trim())).collect(),
            None => Ok(default),
        }
    }

    /// Canonical text: sorted `key=value` lines.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Short hex digest of the canonical text.
    pub fn fingerprint(&self) -> String {
        digest_hex(self.canonical().as_bytes())
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| Error::Parse {
        key: key.to_string(),
        value: raw.to_string(),
        reason: e.to_string(),
    })
}

/// First 16 hex digits of the SHA-256 of `bytes`.
pub fn digest_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl ParamBox {
    /// Reads every box key; all are required.
    pub fn from_kv(kv: &KvConfig) -> Result<ParamBox> {
        let iv = |name: &str| -> Result<Interval> {
            Ok(Interval::new(
                kv.require(&format!("{name}_min"))?,
                kv.require(&format!("{name}_max"))?,
            ))
        };
        Ok(ParamBox {
            theta_mu: iv("theta_mu")?,
            eta_mu: iv("eta_mu")?,
            theta_sigma: iv("theta_sigma")?,
            eta_sigma: iv("eta_sigma")?,
            sigma_mu: kv.require("sigma_mu")?,
            xi: kv.require("xi")?,
            r: kv.require("r")?,
            bound_m: kv.require("bound_m")?,
        })
    }
}

/// Simulation grid, sample size and initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub horizon: f64,
    pub n_rebalance: usize,
    pub steps_per_interval: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub initial: MarketState,
    pub mode: SelectorMode,
    /// Strategy driving the wealth component of simulated paths.
    pub strategy: StrategySpec,
}

impl SimConfig {
    pub fn from_kv(kv: &KvConfig) -> Result<SimConfig> {
        let cfg = SimConfig {
            horizon: kv.require("horizon")?,
            n_rebalance: kv.require("n_rebalance")?,
            steps_per_interval: kv.require("steps_per_interval")?,
            n_paths: kv.require("n_paths")?,
            seed: kv.require("seed")?,
            initial: MarketState {
                t: 0.0,
                s: kv.require("s0")?,
                mu: kv.require("mu0")?,
                nu: kv.require("nu0")?,
                x: kv.require("x0")?,
            },
            mode: kv.get_or("mode", SelectorMode::Paper)?,
            strategy: kv.get_or("strategy", StrategySpec::Merton)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            problems.push("horizon must be > 0".to_string());
        }
        for (name, v) in [
            ("n_rebalance", self.n_rebalance),
            ("steps_per_interval", self.steps_per_interval),
            ("n_paths", self.n_paths),
        ] {
            if v == 0 {
                problems.push(format!("{name} must be >= 1"));
            }
        }
        for (name, v) in [("s0", self.initial.s), ("nu0", self.initial.nu), ("x0", self.initial.x)] {
            if !(v > 0.0 && v.is_finite()) {
                problems.push(format!("{name} must be > 0"));
            }
        }
        if !self.initial.mu.is_finite() {
            problems.push("mu0 must be finite".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems.join("; ")))
        }
    }

    pub fn total_steps(&self) -> usize {
        self.n_rebalance * self.steps_per_interval
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.total_steps() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
# box
theta_mu_min = 0.5
theta_mu_max = 2
eta_mu_min = 0.01
eta_mu_max = 0.10
theta_sigma_min = 0.5
theta_sigma_max = 2
eta_sigma_min = 0.01
eta_sigma_max = 0.09
sigma_mu = 0.2
xi = 0.5
r = 0.02
bound_m = 10

horizon = 1
n_rebalance = 8
steps_per_interval = 32
n_paths = 100
seed = 7
s0 = 1
mu0 = 0.05
nu0 = 0.04
x0 = 1
";

    #[test]
    fn parses_box_and_sim() {
        let kv = KvConfig::parse(SAMPLE).unwrap();
        let bx = ParamBox::from_kv(&kv).unwrap();
        assert_eq!(bx.theta_mu, Interval::new(0.5, 2.0));
        assert_eq!(bx.r, 0.02);
        let sim = SimConfig::from_kv(&kv).unwrap();
        assert_eq!(sim.dt(), 1.0 / 256.0);
        assert_eq!(sim.mode, SelectorMode::Paper);
        assert_eq!(sim.strategy, StrategySpec::Merton);
    }

    #[test]
    fn missing_key_is_named() {
        let text = SAMPLE.replace("xi = 0.5\n", "");
        let kv = KvConfig::parse(&text).unwrap();
        assert_eq!(ParamBox::from_kv(&kv).unwrap_err(), Error::MissingKey("xi".into()));
    }

    #[test]
    fn zero_paths_rejected() {
        let mut kv = KvConfig::parse(SAMPLE).unwrap();
        kv.set_override("n_paths=0").unwrap();
        let err = SimConfig::from_kv(&kv).unwrap_err();
        assert!(err.to_string().contains("n_paths"));
    }

    #[test]
    fn overrides_win_and_change_fingerprint() {
        let mut kv = KvConfig::parse(SAMPLE).unwrap();
        let before = kv.fingerprint();
        kv.set_override("seed = 8").unwrap();
        assert_eq!(kv.require::<u64>("seed").unwrap(), 8);
        assert_ne!(before, kv.fingerprint());
        assert_eq!(kv.fingerprint().len(), 16);
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(KvConfig::parse("just words").is_err());
        assert!(KvConfig::parse("a = 1\na = 2").is_err());
        let kv = KvConfig::parse("seed = abc").unwrap();
        assert!(matches!(kv.require::<u64>("seed"), Err(Error::Parse { .. })));
    }
}
