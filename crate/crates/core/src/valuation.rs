//! Monte Carlo evaluation of the log-utility value function.
//!
//! Under the log-optimal fraction, expected terminal log-wealth separates as
//! `log x + E[int_t^T r + (mu_s - r)^2 / (2 nu_s) ds]`. The integral is taken
//! with the trapezoid rule on a uniform grid along simulated `(mu, nu)` paths.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{digest_hex, SimConfig};
use crate::dynamics::MarketConstants;
use crate::ensemble::Ensemble;
use crate::error::{domain, Error, Result};
use crate::params::{ParamBox, ParamQuadruple};
use crate::rng::PathRng;
use crate::robust::{select_corner, CornerDecision, SelectorMode};
use crate::stats::SampleStats;

/// Instantaneous log-growth under the optimal fraction, `r + (mu - r)^2 / (2 nu)`.
pub fn running_integrand(mu: f64, nu: f64, r: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(domain(format!("nu must be > 0, got {nu}")));
    }
    Ok(integrand(mu, nu, r))
}

#[inline]
pub(crate) fn integrand(mu: f64, nu: f64, r: f64) -> f64 {
    let d = mu - r;
    r + d * d / (2.0 * nu)
}

/// Starting point `(t, mu, nu, x)` of a valuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValuePoint {
    pub t: f64,
    pub mu: f64,
    pub nu: f64,
    pub x: f64,
}

impl ValuePoint {
    pub fn validate(&self, horizon: f64) -> Result<()> {
        if !(self.nu > 0.0) || !(self.x > 0.0) || !self.mu.is_finite() || !self.nu.is_finite() || !self.x.is_finite() {
            return Err(domain("valuation needs finite mu and nu, x > 0"));
        }
        if !(self.t >= 0.0 && self.t <= horizon) {
            return Err(domain(format!("t = {} outside [0, {horizon}]", self.t)));
        }
        Ok(())
    }
}

/// Uniform grid on `[t, T]` whose step does not exceed the configured `dt`.
pub fn remaining_grid(t: f64, cfg: &SimConfig) -> (usize, f64) {
    let span = cfg.horizon - t;
    if span <= 0.0 {
        return (0, 0.0);
    }
    let raw = span / cfg.dt();
    let n = if (raw - raw.round()).abs() < 1e-9 {
        raw.round()
    } else {
        raw.ceil()
    };
    let n = (n as usize).max(1);
    (n, span / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub excluded_paths: usize,
    pub fingerprint: String,
}

/// Per-path integrals behind a [`ValueEstimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSamples {
    pub log_x: f64,
    /// Running-integral value per retained path, in path order.
    pub integrals: Vec<f64>,
    pub excluded_paths: usize,
    pub fingerprint: String,
}

impl ValueSamples {
    pub fn estimate(&self) -> ValueEstimate {
        let s = SampleStats::from_samples(&self.integrals);
        ValueEstimate {
            mean: self.log_x + s.mean,
            std_error: s.std_error,
            n_paths: self.integrals.len(),
            excluded_paths: self.excluded_paths,
            fingerprint: self.fingerprint.clone(),
        }
    }

    /// Per-path values `log x + integral`.
    pub fn values(&self) -> Vec<f64> {
        self.integrals.iter().map(|i| self.log_x + i).collect()
    }
}

fn fingerprint(kind: &str, point: &ValuePoint, extra: &str, cfg: &SimConfig, n: usize, dt: f64) -> String {
    digest_hex(
        format!(
            "{kind}|seed={}|dt={dt}|n={}|steps={n}|t={}|mu={}|nu={}|{extra}",
            cfg.seed, cfg.n_paths, point.t, point.mu, point.nu
        )
        .as_bytes(),
    )
}

/// Per-path trapezoid integrals of the running integrand for every ensemble
/// cell. `None` marks an excluded path.
pub(crate) fn ensemble_integrals(ens: &Ensemble, point: &ValuePoint, r: f64, cfg: &SimConfig) -> Vec<Option<Vec<f64>>> {
    let (n_steps, dt) = remaining_grid(point.t, cfg);
    let n_cells = ens.n_cells();
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            if n_steps == 0 {
                return Some(vec![0.0; n_cells]);
            }
            let mut rng = PathRng::new(cfg.seed, i);
            let mut acc = vec![0.0; n_cells];
            let mut prev = vec![0.0; n_cells];
            let ok = ens.run(&mut rng, point.mu, point.nu, dt, n_steps, |k, snap| {
                for (c, &(m, v)) in ens.cells().iter().enumerate() {
                    let f = integrand(snap.mu[m], snap.nu[v], r);
                    if k > 0 {
                        acc[c] += 0.5 * (prev[c] + f) * dt;
                    }
                    prev[c] = f;
                }
            });
            match ok {
                Ok(()) if acc.iter().all(|a| a.is_finite()) => Some(acc),
                _ => None,
            }
        })
        .collect()
}

pub(crate) fn split_cells(raw: Vec<Option<Vec<f64>>>, n_cells: usize) -> (Vec<Vec<f64>>, usize) {
    let mut cols = vec![Vec::with_capacity(raw.len()); n_cells];
    let mut excluded = 0;
    for row in raw {
        match row {
            Some(vals) => {
                for (c, v) in vals.into_iter().enumerate() {
                    cols[c].push(v);
                }
            }
            None => excluded += 1,
        }
    }
    (cols, excluded)
}

/// Per-path samples of the classical value with parameters fixed at `gamma`.
pub fn value_samples_classical(
    point: &ValuePoint,
    gamma: &ParamQuadruple,
    consts: &MarketConstants,
    cfg: &SimConfig,
) -> Result<ValueSamples> {
    cfg.validate()?;
    point.validate(cfg.horizon)?;
    let (n_steps, dt) = remaining_grid(point.t, cfg);
    let ens = Ensemble::single(gamma, consts, dt);
    let (mut cols, excluded) = split_cells(ensemble_integrals(&ens, point, consts.r, cfg), 1);
    let integrals = cols.pop().unwrap();
    if integrals.is_empty() {
        return Err(Error::NoValidPaths { excluded });
    }
    Ok(ValueSamples {
        log_x: point.x.ln(),
        integrals,
        excluded_paths: excluded,
        fingerprint: fingerprint("classical", point, &format!("{gamma:?}|{consts:?}"), cfg, n_steps, dt),
    })
}

/// Classical (known-parameter) value at `point` with parameters fixed at `gamma` on `[t, T]`.
pub fn value_classical(
    point: &ValuePoint,
    gamma: &ParamQuadruple,
    consts: &MarketConstants,
    cfg: &SimConfig,
) -> Result<ValueEstimate> {
    value_samples_classical(point, gamma, consts, cfg).map(|s| s.estimate())
}

/// Robust value: the classical value under the selected worst-case corner.
pub fn value_robust(
    point: &ValuePoint,
    bx: &ParamBox,
    mode: SelectorMode,
    cfg: &SimConfig,
) -> Result<(ValueEstimate, CornerDecision)> {
    let decision = select_corner(point.mu, point.nu, bx, mode)?;
    let mut est = value_classical(point, &decision.corner, &MarketConstants::from(bx), cfg)?;
    let (n_steps, dt) = remaining_grid(point.t, cfg);
    est.fingerprint = fingerprint(
        "robust",
        point,
        &format!("box={}|mode={mode}", bx.fingerprint()),
        cfg,
        n_steps,
        dt,
    );
    Ok((est, decision))
}

/// Classical values for all 16 corners on common random numbers.
pub fn corner_value_samples(point: &ValuePoint, bx: &ParamBox, cfg: &SimConfig) -> Result<Vec<ValueSamples>> {
    cfg.validate()?;
    point.validate(cfg.horizon)?;
    let (n_steps, dt) = remaining_grid(point.t, cfg);
    let ens = Ensemble::corners(bx, dt);
    let (cols, excluded) = split_cells(ensemble_integrals(&ens, point, bx.r, cfg), ens.n_cells());
    if cols[0].is_empty() {
        return Err(Error::NoValidPaths { excluded });
    }
    let consts = MarketConstants::from(bx);
    Ok(cols
        .into_iter()
        .enumerate()
        .map(|(c, integrals)| ValueSamples {
            log_x: point.x.ln(),
            integrals,
            excluded_paths: excluded,
            fingerprint: fingerprint(
                "classical",
                point,
                &format!("{:?}|{consts:?}", bx.corner(c)),
                cfg,
                n_steps,
                dt,
            ),
        })
        .collect())
}

/// Lower bound every value estimate must respect up to sampling error.
pub fn riskless_floor(point: &ValuePoint, r: f64, horizon: f64) -> f64 {
    point.x.ln() + r * (horizon - point.t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MarketState;
    use crate::params::Interval;
    use crate::strategy::StrategySpec;

    fn cfg(n_paths: usize) -> SimConfig {
        SimConfig {
            horizon: 1.0,
            n_rebalance: 8,
            steps_per_interval: 32,
            n_paths,
            seed: 11,
            initial: MarketState {
                t: 0.0,
                s: 1.0,
                mu: 0.05,
                nu: 0.04,
                x: 1.0,
            },
            mode: SelectorMode::Paper,
            strategy: StrategySpec::Merton,
        }
    }

    fn bx() -> ParamBox {
        ParamBox {
            theta_mu: Interval::new(0.5, 2.0),
            eta_mu: Interval::new(0.01, 0.10),
            theta_sigma: Interval::new(0.5, 2.0),
            eta_sigma: Interval::new(0.01, 0.09),
            sigma_mu: 0.2,
            xi: 0.5,
            r: 0.02,
            bound_m: 10.0,
        }
    }

    #[test]
    fn integrand_examples() {
        assert_eq!(running_integrand(0.03, 0.04, 0.03).unwrap(), 0.03);
        assert!((running_integrand(0.06, 0.04, 0.02).unwrap() - 0.04).abs() < 1e-15);
        let d = 0.037;
        let up = running_integrand(0.02 + d, 0.05, 0.02).unwrap();
        let down = running_integrand(0.02 - d, 0.05, 0.02).unwrap();
        assert!((up - down).abs() < 1e-15);
        // dyadic values make the symmetry exact
        assert_eq!(
            running_integrand(0.75, 0.5, 0.5).unwrap(),
            running_integrand(0.25, 0.5, 0.5).unwrap()
        );
        assert!(running_integrand(0.02, 0.0, 0.02).is_err());
    }

    #[test]
    fn zero_excess_without_noise_is_riskless() {
        let consts = MarketConstants {
            sigma_mu: 0.0,
            xi: 0.0,
            r: 0.03,
        };
        let g = ParamQuadruple::new(1.0, 0.03, 1.0, 0.04);
        let p = ValuePoint {
            t: 0.25,
            mu: 0.03,
            nu: 0.04,
            x: 2.0,
        };
        let est = value_classical(&p, &g, &consts, &cfg(50)).unwrap();
        assert!((est.mean - (2.0f64.ln() + 0.03 * 0.75)).abs() < 1e-14);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn empty_horizon_is_log_wealth() {
        let b = bx();
        let p = ValuePoint {
            t: 1.0,
            mu: 0.05,
            nu: 0.04,
            x: 3.0,
        };
        let est = value_classical(&p, &b.corner(5), &MarketConstants::from(&b), &cfg(10)).unwrap();
        assert_eq!(est.mean, 3.0f64.ln());
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn wealth_scaling_is_additive() {
        let b = bx();
        let c = cfg(200);
        let p = ValuePoint {
            t: 0.5,
            mu: 0.04,
            nu: 0.03,
            x: 1.3,
        };
        let (a, da) = value_robust(&p, &b, SelectorMode::Paper, &c).unwrap();
        let (b2, db) = value_robust(&ValuePoint { x: 2.6, ..p }, &b, SelectorMode::Paper, &c).unwrap();
        assert_eq!(da, db);
        assert!((b2.mean - a.mean - 2.0f64.ln()).abs() < 1e-14);
        assert_eq!(a.std_error, b2.std_error);
    }

    #[test]
    fn degenerate_box_matches_classical() {
        let q = ParamQuadruple::new(1.2, 0.05, 0.8, 0.04);
        let b = ParamBox::degenerate(q, 0.2, 0.5, 0.02, 10.0);
        let c = cfg(100);
        let p = ValuePoint {
            t: 0.0,
            mu: 0.06,
            nu: 0.05,
            x: 1.0,
        };
        let (r, d) = value_robust(&p, &b, SelectorMode::SignLogic, &c).unwrap();
        let cl = value_classical(&p, &q, &MarketConstants::from(&b), &c).unwrap();
        assert_eq!(d.corner, q);
        assert_eq!(r.mean, cl.mean);
        assert_eq!(r.std_error, cl.std_error);
    }

    #[test]
    fn corner_matrix_cells_equal_single_corner_runs() {
        let b = bx();
        let c = cfg(64);
        let p = ValuePoint {
            t: 0.9,
            mu: 0.03,
            nu: 0.05,
            x: 1.0,
        };
        let all = corner_value_samples(&p, &b, &c).unwrap();
        for idx in [0, 6, 15] {
            let one = value_samples_classical(&p, &b.corner(idx), &MarketConstants::from(&b), &c).unwrap();
            assert_eq!(one.integrals, all[idx].integrals);
        }
    }

    #[test]
    fn value_respects_riskless_floor() {
        let b = bx();
        let c = cfg(500);
        let p = ValuePoint {
            t: 0.0,
            mu: 0.05,
            nu: 0.04,
            x: 1.0,
        };
        for est in corner_value_samples(&p, &b, &c).unwrap().iter().map(|s| s.estimate()) {
            assert!(est.mean >= riskless_floor(&p, b.r, 1.0) - 3.0 * est.std_error);
            assert_eq!(est.excluded_paths, 0);
        }
    }

    #[test]
    fn grid_for_offgrid_start() {
        let c = cfg(1);
        assert_eq!(remaining_grid(0.0, &c), (256, 1.0 / 256.0));
        let (n, dt) = remaining_grid(0.9, &c);
        assert_eq!(n, 26);
        assert!((dt * 26.0 - 0.1).abs() < 1e-15);
        assert_eq!(remaining_grid(1.0, &c).0, 0);
    }
}
