use rayon::prelude::*;
use serde::Serialize;

use crate::config::SimConfig;
use crate::dynamics::{
    euler_wealth, simulate_with_increments, wealth_log_terminal, Grid, Increments, MarketConstants, ParamSource,
};
use crate::error::{domain, Error, Result};
use crate::rng::PathRng;
use crate::stats::{self, ols_slope};
use crate::strategy::FractionProcess;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    /// RMS of `log X_T(closed form) - log X_T(Euler)` per step size.
    pub rms: Vec<f64>,
    /// Slope of `log rms` against `log dt`.
    pub order: f64,
    pub n_used: usize,
    pub excluded_paths: usize,
}

fn integer_ratio(a: f64, b: f64) -> Option<usize> {
    let q = a / b;
    let r = q.round();
    ((q - r).abs() < 1e-9 && r >= 1.0).then_some(r as usize)
}

/// Strong error of the Euler wealth recursion against the closed-form wealth
/// map, on nested grids built from the same Brownian path. With `zero_noise`
/// every increment is zero and the comparison is deterministic.
pub fn convergence_order(
    cfg: &SimConfig,
    consts: &MarketConstants,
    source: &dyn ParamSource,
    dt_list: &[f64],
    zero_noise: bool,
) -> Result<ConvergenceReport> {
    if dt_list.len() < 4 {
        return Err(domain("at least four step sizes are required"));
    }
    cfg.validate()?;
    if dt_list.iter().any(|d| !(*d > 0.0)) {
        return Err(domain("step sizes must be positive"));
    }
    let interval = cfg.horizon / cfg.n_rebalance as f64;
    let dt_min = dt_list.iter().copied().fold(f64::INFINITY, f64::min);
    let mut levels = Vec::with_capacity(dt_list.len());
    for &dt in dt_list {
        let per_interval = integer_ratio(interval, dt)
            .ok_or_else(|| domain(format!("dt = {dt} does not divide the rebalance interval")))?;
        let factor =
            integer_ratio(dt, dt_min).ok_or_else(|| domain(format!("dt = {dt} is not a multiple of {dt_min}")))?;
        levels.push((
            Grid {
                t0: 0.0,
                dt,
                n_steps: per_interval * cfg.n_rebalance,
                steps_per_interval: per_interval,
            },
            factor,
        ));
    }
    let n_fine = levels.iter().map(|(g, f)| g.n_steps * f).max().unwrap();

    let per_path: Vec<Option<Vec<f64>>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let fine = if zero_noise {
                Increments::zeros(n_fine)
            } else {
                Increments::draw(&mut PathRng::new(cfg.seed, i), n_fine, dt_min)
            };
            let mut errs = Vec::with_capacity(levels.len());
            for (grid, factor) in &levels {
                let inc = fine.coarsen(*factor);
                let path =
                    simulate_with_increments(grid, consts, source, &cfg.strategy, &cfg.initial, inc, cfg.seed, i)
                        .ok()?;
                let pi = FractionProcess::from_policy(&path, &cfg.strategy, consts.r);
                let closed = wealth_log_terminal(&path, &pi, consts.r).ok()?;
                let euler = euler_wealth(&path, &pi, consts.r).ok()?;
                errs.push(closed - euler.ln());
            }
            Some(errs)
        })
        .collect();

    let excluded = per_path.iter().filter(|p| p.is_none()).count();
    let kept: Vec<Vec<f64>> = per_path.into_iter().flatten().collect();
    if kept.is_empty() {
        return Err(Error::NoValidPaths { excluded });
    }
    let rms: Vec<f64> = (0..levels.len())
        .map(|l| {
            let sq: Vec<f64> = kept.iter().map(|e| e[l] * e[l]).collect();
            stats::mean(&sq).sqrt()
        })
        .collect();
    if rms.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::DegenerateRegression);
    }
    let xs: Vec<f64> = dt_list.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = rms.iter().map(|e| e.ln()).collect();
    let order = ols_slope(&xs, &ys).ok_or(Error::DegenerateRegression)?;
    Ok(ConvergenceReport {
        dts: dt_list.to_vec(),
        rms,
        order,
        n_used: kept.len(),
        excluded_paths: excluded,
    })
}
