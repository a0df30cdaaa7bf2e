//! Log-optimal fraction and admissibility diagnostics.

use std::str::FromStr;

use serde::Serialize;

use crate::dynamics::{MarketState, PathBundle};
use crate::error::{domain, Result};
use crate::stats::SampleStats;

/// The log-optimal fraction of wealth in the stock, `(mu - r) / nu`.
pub fn merton_fraction(mu: f64, nu: f64, r: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(domain(format!("nu must be > 0, got {nu}")));
    }
    Ok((mu - r) / nu)
}

/// Expected log-growth rate of a fraction `pi`, `pi (mu - r) + r - pi^2 nu / 2`.
pub fn growth_rate(pi: f64, mu: f64, nu: f64, r: f64) -> f64 {
    pi * (mu - r) + r - 0.5 * pi * pi * nu
}

/// Markov feedback rule for the fraction invested, evaluated on the current state.
pub trait FractionPolicy: Sync {
    fn fraction(&self, state: &MarketState, r: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StrategySpec {
    /// `(mu_t - r) / nu_t` at every step.
    Merton,
    Constant(f64),
}

impl FractionPolicy for StrategySpec {
    fn fraction(&self, state: &MarketState, r: f64) -> f64 {
        match *self {
            StrategySpec::Merton => (state.mu - r) / state.nu,
            StrategySpec::Constant(p) => p,
        }
    }
}

impl FromStr for StrategySpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "merton" => Ok(StrategySpec::Merton),
            other => match other.strip_prefix("constant:") {
                Some(v) => v
                    .trim()
                    .parse::<f64>()
                    .map(StrategySpec::Constant)
                    .map_err(|e| format!("bad constant fraction: {e}")),
                None => Err(format!("expected `merton` or `constant:<fraction>`, got `{other}`")),
            },
        }
    }
}

impl std::fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StrategySpec::Merton => f.write_str("merton"),
            StrategySpec::Constant(p) => write!(f, "constant:{p}"),
        }
    }
}

/// Fraction held over each step of a path grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionProcess {
    values: Vec<f64>,
}

impl FractionProcess {
    pub fn new(values: Vec<f64>) -> Self {
        FractionProcess { values }
    }

    pub fn constant(pi: f64, n_steps: usize) -> Self {
        FractionProcess {
            values: vec![pi; n_steps],
        }
    }

    /// Evaluates `policy` on the state at the left end of every step.
    pub fn from_policy(path: &PathBundle, policy: &dyn FractionPolicy, r: f64) -> Self {
        let n = path.n_steps();
        FractionProcess {
            values: path.states[..n].iter().map(|s| policy.fraction(s, r)).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    /// Monte Carlo estimate of `E[int |X pi|^4 dt]`.
    pub l4_estimate: SampleStats,
    pub threshold: f64,
    pub wealth_positive: bool,
    /// `(path_index, step)` of the first non-finite fraction, if any.
    pub non_finite_at: Option<(u64, usize)>,
    pub admissible: bool,
}

/// Checks the fourth-moment condition on the cash value `X pi` and wealth
/// positivity under the closed-form wealth map. `fractions[i]` belongs to
/// `paths[i]`.
pub fn check_admissible(
    paths: &[PathBundle],
    fractions: &[FractionProcess],
    r: f64,
    threshold: f64,
) -> Result<AdmissibilityReport> {
    if paths.len() != fractions.len() {
        return Err(domain("one fraction process per path is required"));
    }
    let mut samples = Vec::with_capacity(paths.len());
    let mut wealth_positive = true;
    let mut non_finite_at = None;
    for (path, pi) in paths.iter().zip(fractions) {
        if pi.len() != path.n_steps() {
            return Err(domain("fraction process does not match the path grid"));
        }
        if let Some(step) = pi.first_non_finite() {
            non_finite_at.get_or_insert((path.path_index, step));
            continue;
        }
        let dt = path.dt;
        let mut log_x = path.states[0].x.ln();
        let mut integral = 0.0;
        for (k, (s, &p)) in path.states.iter().zip(pi.values()).enumerate() {
            let cash = log_x.exp() * p;
            integral += cash.powi(4) * dt;
            log_x += (p * s.mu + r * (1.0 - p) - 0.5 * p * p * s.nu) * dt + p * s.nu.sqrt() * path.increments.dw_s[k];
        }
        let x_t = log_x.exp();
        if !(x_t > 0.0 && x_t.is_finite()) {
            wealth_positive = false;
        }
        samples.push(integral);
    }
    let l4_estimate = SampleStats::from_samples(&samples);
    let admissible =
        non_finite_at.is_none() && wealth_positive && l4_estimate.mean.is_finite() && l4_estimate.mean < threshold;
    Ok(AdmissibilityReport {
        l4_estimate,
        threshold,
        wealth_positive,
        non_finite_at,
        admissible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merton_examples() {
        assert_eq!(merton_fraction(0.03, 0.04, 0.03).unwrap(), 0.0);
        assert!((merton_fraction(0.07, 0.04, 0.03).unwrap() - 1.0).abs() < 1e-12);
        assert!((merton_fraction(0.01, 0.01, 0.03).unwrap() + 2.0).abs() < 1e-12);
        assert!(merton_fraction(0.05, 0.0, 0.03).is_err());
        assert!(merton_fraction(0.05, -1.0, 0.03).is_err());
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("merton".parse::<StrategySpec>().unwrap(), StrategySpec::Merton);
        assert_eq!(
            "constant:0.5".parse::<StrategySpec>().unwrap(),
            StrategySpec::Constant(0.5)
        );
        assert!("kelly".parse::<StrategySpec>().is_err());
        assert_eq!(StrategySpec::Constant(1.5).to_string(), "constant:1.5");
    }

    proptest::proptest! {
        #[test]
        fn merton_fraction_is_the_pointwise_argmax(
            mu in -1.0f64..1.0,
            nu in 1e-3f64..1.0,
            r in 0.0f64..0.2,
            other in -50.0f64..50.0,
        ) {
            let best = merton_fraction(mu, nu, r).unwrap();
            proptest::prop_assume!((other - best).abs() > 1e-6);
            proptest::prop_assert!(growth_rate(best, mu, nu, r) > growth_rate(other, mu, nu, r));
        }
    }
}
