use rand::Rng;
use serde::Serialize;

use crate::config::SimConfig;
use crate::error::{domain, Result};
use crate::params::{ParamBox, ParamQuadruple};
use crate::rng::PathRng;
use crate::robust::{select_corner, CornerDecision, SelectorMode};
use crate::stats::combined_se;
use crate::valuation::{corner_value_samples, ValueEstimate, ValuePoint};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceReport {
    /// Value under the log-optimal fraction for each corner, in corner order.
    pub estimates: Vec<ValueEstimate>,
    pub argmin: usize,
    pub corner: ParamQuadruple,
    /// Another corner lies within one combined standard error of the minimum.
    pub non_unique: bool,
}

/// Evaluates all 16 corners held constant on `[t, T]` and returns the one
/// with the lowest value.
pub fn brute_force_worst_corner(point: &ValuePoint, bx: &ParamBox, cfg: &SimConfig) -> Result<BruteForceReport> {
    let estimates: Vec<ValueEstimate> = corner_value_samples(point, bx, cfg)?
        .iter()
        .map(|s| s.estimate())
        .collect();
    let mut argmin = 0;
    for (i, e) in estimates.iter().enumerate() {
        if e.mean < estimates[argmin].mean {
            argmin = i;
        }
    }
    let best = &estimates[argmin];
    let non_unique = estimates.iter().enumerate().any(|(i, e)| {
        i != argmin
            && bx.corner(i) != bx.corner(argmin)
            && e.mean - best.mean <= combined_se(e.std_error, best.std_error)
    });
    Ok(BruteForceReport {
        argmin,
        corner: bx.corner(argmin),
        estimates,
        non_unique,
    })
}

/// How states are drawn for a selector-versus-brute-force comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateSampling {
    /// Remaining horizon `T - t` at every sampled state.
    pub horizon: f64,
    /// States with drift and variance strictly inside their bands.
    pub n_interior: usize,
    /// States with at least one variable outside its band.
    pub n_outside: usize,
    pub seed: u64,
}

/// Draws `(mu, nu)` pairs: interior ones uniformly inside the bands,
/// outside ones uniformly on a widened rectangle, rejecting interior draws.
pub fn sample_states(bx: &ParamBox, s: &StateSampling) -> Vec<(f64, f64)> {
    let mut rng = PathRng::new(s.seed, u64::MAX);
    let rng = rng.rng();
    let (m, v) = (bx.eta_mu, bx.eta_sigma);
    let mut out = Vec::with_capacity(s.n_interior + s.n_outside);
    while out.len() < s.n_interior {
        let mu = m.min + (m.max - m.min) * rng.random::<f64>();
        let nu = v.min + (v.max - v.min) * rng.random::<f64>();
        if mu > m.min && mu < m.max && nu > v.min && nu < v.max {
            out.push((mu, nu));
        }
    }
    let (mw, vw) = ((m.max - m.min).max(0.02), (v.max - v.min).max(0.02));
    let mut outside = 0;
    while outside < s.n_outside {
        let mu = (m.min - mw) + 3.0 * mw * rng.random::<f64>();
        let nu = (v.min * 0.25) + (v.max + vw - v.min * 0.25) * rng.random::<f64>();
        if !(m.contains(mu) && v.contains(nu)) {
            out.push((mu, nu));
            outside += 1;
        }
    }
    out
}

/// One row of a selector-versus-brute-force comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerCheck {
    pub t: f64,
    pub mu: f64,
    pub nu: f64,
    pub decision: CornerDecision,
    pub brute_argmin: usize,
    pub selected_value: f64,
    pub min_value: f64,
    pub combined_se: f64,
    /// Same corner, or the selected corner's value within 3 combined SEs of the minimum.
    pub agrees: bool,
}

impl CornerCheck {
    /// Strictly inside both bands (endpoints excluded).
    pub fn interior(&self, bx: &ParamBox) -> bool {
        self.mu > bx.eta_mu.min && self.mu < bx.eta_mu.max && self.nu > bx.eta_sigma.min && self.nu < bx.eta_sigma.max
    }
}

/// Compares the selector against brute force at each sampled state.
pub fn corner_agreement(
    bx: &ParamBox,
    mode: SelectorMode,
    cfg: &SimConfig,
    sampling: &StateSampling,
) -> Result<Vec<CornerCheck>> {
    if !(sampling.horizon > 0.0 && sampling.horizon <= cfg.horizon) {
        return Err(domain("sampling horizon must lie in (0, T]"));
    }
    let t = cfg.horizon - sampling.horizon;
    sample_states(bx, sampling)
        .into_iter()
        .map(|(mu, nu)| {
            let point = ValuePoint { t, mu, nu, x: 1.0 };
            let decision = select_corner(mu, nu, bx, mode)?;
            let brute = brute_force_worst_corner(&point, bx, cfg)?;
            let sel = &brute.estimates[decision.corner_index];
            let best = &brute.estimates[brute.argmin];
            let se = combined_se(sel.std_error, best.std_error);
            let agrees = decision.corner == brute.corner || sel.mean - best.mean <= 3.0 * se;
            Ok(CornerCheck {
                t,
                mu,
                nu,
                decision,
                brute_argmin: brute.argmin,
                selected_value: sel.mean,
                min_value: best.mean,
                combined_se: se,
                agrees,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Interval;

    #[test]
    fn sampled_states_respect_their_class() {
        let bx = ParamBox {
            theta_mu: Interval::new(0.5, 2.0),
            eta_mu: Interval::new(0.01, 0.10),
            theta_sigma: Interval::new(0.5, 2.0),
            eta_sigma: Interval::new(0.01, 0.09),
            sigma_mu: 0.2,
            xi: 0.5,
            r: 0.02,
            bound_m: 10.0,
        };
        let s = StateSampling {
            horizon: 0.1,
            n_interior: 30,
            n_outside: 30,
            seed: 5,
        };
        let states = sample_states(&bx, &s);
        assert_eq!(states.len(), 60);
        for (i, (mu, nu)) in states.iter().enumerate() {
            let inside = bx.eta_mu.contains(*mu) && bx.eta_sigma.contains(*nu);
            assert_eq!(inside, i < 30);
            assert!(*nu > 0.0);
        }
        assert_eq!(states, sample_states(&bx, &s));
    }
}
