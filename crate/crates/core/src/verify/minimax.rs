use rayon::prelude::*;
use serde::Serialize;

use crate::config::SimConfig;
use crate::ensemble::Ensemble;
use crate::error::{domain, Error, Result};
use crate::params::{ParamBox, CORNER_COUNT};
use crate::rng::PathRng;
use crate::stats::{combined_se, SampleStats};
use crate::valuation::{remaining_grid, ValuePoint};

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaxReport {
    pub pi_grid: Vec<f64>,
    /// `values[i][c]`: expected terminal log-wealth of constant fraction
    /// `pi_grid[i]` under corner `c`.
    pub values: Vec<Vec<SampleStats>>,
    pub sup_inf: f64,
    pub inf_sup: f64,
    pub gap: f64,
    /// Combined standard error of the two cells that realize the gap.
    pub gap_se: f64,
    pub argmax_pi: usize,
    pub argmin_corner: usize,
    pub excluded_paths: usize,
}

/// Per-path sufficient statistics of constant-fraction log-wealth:
/// `log X_T = log x + r (T - t) + pi A - pi^2 B / 2 + pi C` with
/// `A = sum (mu - r) dt`, `B = sum nu dt`, `C = sum sqrt(nu) dW`.
struct PathStats {
    a: [f64; 4],
    b: [f64; 4],
    c: [f64; 4],
}

/// Expected log-wealth of every constant fraction in `pi_grid` under every
/// corner of `bx`, on common random numbers, with the finite-matrix
/// `sup inf` and `inf sup`.
pub fn minimax_gap(point: &ValuePoint, bx: &ParamBox, pi_grid: &[f64], cfg: &SimConfig) -> Result<MinimaxReport> {
    if pi_grid.is_empty() {
        return Err(domain("fraction grid is empty"));
    }
    cfg.validate()?;
    point.validate(cfg.horizon)?;
    let (n_steps, dt) = remaining_grid(point.t, cfg);
    let ens = Ensemble::corners(bx, dt);
    let r = bx.r;
    let raw: Vec<Option<PathStats>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = PathRng::new(cfg.seed, i);
            let mut st = PathStats {
                a: [0.0; 4],
                b: [0.0; 4],
                c: [0.0; 4],
            };
            let ok = ens.run(&mut rng, point.mu, point.nu, dt, n_steps, |k, snap| {
                if k == n_steps {
                    return;
                }
                for (a, m) in st.a.iter_mut().zip(snap.mu) {
                    *a += (m - r) * dt;
                }
                for ((b, c), v) in st.b.iter_mut().zip(st.c.iter_mut()).zip(snap.nu) {
                    *b += v * dt;
                    *c += v.sqrt() * snap.dw_s;
                }
            });
            ok.ok().map(|_| st)
        })
        .collect();
    let excluded = raw.iter().filter(|s| s.is_none()).count();
    let kept: Vec<PathStats> = raw.into_iter().flatten().collect();
    if kept.is_empty() {
        return Err(Error::NoValidPaths { excluded });
    }
    let base = point.x.ln() + r * (cfg.horizon - point.t);
    let values: Vec<Vec<SampleStats>> = pi_grid
        .iter()
        .map(|&pi| {
            (0..CORNER_COUNT)
                .map(|corner| {
                    let (m, v) = (corner & 3, corner >> 2);
                    let per_path: Vec<f64> = kept
                        .iter()
                        .map(|s| pi * s.a[m] - 0.5 * pi * pi * s.b[v] + pi * s.c[v])
                        .collect();
                    let mut st = SampleStats::from_samples(&per_path);
                    st.mean += base;
                    st
                })
                .collect()
        })
        .collect();

    // sup over fractions of the row minimum
    let row_min = |i: usize| -> (usize, f64) { argmin(values[i].iter().map(|s| s.mean)) };
    let (argmax_pi, sup_inf) = argmax((0..pi_grid.len()).map(|i| row_min(i).1));
    let sup_inf_corner = row_min(argmax_pi).0;
    // inf over corners of the column maximum
    let col_max = |c: usize| -> (usize, f64) { argmax(values.iter().map(|row| row[c].mean)) };
    let (argmin_corner, inf_sup) = argmin((0..CORNER_COUNT).map(|c| col_max(c).1));
    let inf_sup_pi = col_max(argmin_corner).0;
    let gap_se = combined_se(
        values[argmax_pi][sup_inf_corner].std_error,
        values[inf_sup_pi][argmin_corner].std_error,
    );
    Ok(MinimaxReport {
        pi_grid: pi_grid.to_vec(),
        values,
        sup_inf,
        inf_sup,
        gap: inf_sup - sup_inf,
        gap_se,
        argmax_pi,
        argmin_corner,
        excluded_paths: excluded,
    })
}

/// First index of the smallest value.
fn argmin(it: impl Iterator<Item = f64>) -> (usize, f64) {
    it.enumerate().fold(
        (0, f64::INFINITY),
        |best, (i, v)| if v < best.1 { (i, v) } else { best },
    )
}

/// First index of the largest value.
fn argmax(it: impl Iterator<Item = f64>) -> (usize, f64) {
    it.enumerate().fold(
        (0, f64::NEG_INFINITY),
        |best, (i, v)| if v > best.1 { (i, v) } else { best },
    )
}
