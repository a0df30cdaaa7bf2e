use rayon::prelude::*;
use serde::Serialize;

use crate::config::SimConfig;
use crate::ensemble::Ensemble;
use crate::error::{domain, Result};
use crate::params::ParamBox;
use crate::rng::PathRng;
use crate::stats::SampleStats;

pub const MAX_EXPONENT: u32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentProbe {
    pub n: u32,
    pub sample_sizes: Vec<usize>,
    /// Estimates of `E[int_0^T max_corners nu_t^n dt]`, one per sample size.
    pub nu: Vec<SampleStats>,
    /// Estimates of `E[int_0^T max_corners |mu_t|^n dt]`.
    pub mu: Vec<SampleStats>,
    /// Relative change between consecutive sample sizes.
    pub nu_rel_change: Vec<f64>,
    pub mu_rel_change: Vec<f64>,
    /// Paths dropped within the largest sample, per reason.
    pub overflow_excluded: usize,
}

impl MomentProbe {
    pub fn max_rel_change(&self) -> f64 {
        self.nu_rel_change
            .iter()
            .chain(&self.mu_rel_change)
            .fold(0.0, |m, v| m.max(*v))
    }
}

fn rel_changes(stats: &[SampleStats]) -> Vec<f64> {
    stats
        .windows(2)
        .map(|w| (w[1].mean - w[0].mean).abs() / w[0].mean.abs().max(f64::MIN_POSITIVE))
        .collect()
}

/// Moment probes for several exponents from one simulation. The maximum over
/// the uncertainty set is taken over the corner trajectories driven by
/// shared noise; smaller sample sizes are prefixes of the largest one.
pub fn moment_probes(ns: &[u32], bx: &ParamBox, cfg: &SimConfig, sample_sizes: &[usize]) -> Result<Vec<MomentProbe>> {
    if ns.is_empty() || ns.iter().any(|&n| n == 0 || n > MAX_EXPONENT) {
        return Err(domain(format!("exponents must lie in 1..={MAX_EXPONENT}")));
    }
    if sample_sizes.is_empty() || sample_sizes[0] == 0 || sample_sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("sample sizes must be positive and strictly increasing"));
    }
    cfg.validate()?;
    let n_max = *sample_sizes.last().unwrap();
    let dt = cfg.dt();
    let n_steps = cfg.total_steps();
    let ens = Ensemble::corners(bx, dt);
    let k = MAX_EXPONENT as usize;
    let (mu0, nu0) = (cfg.initial.mu, cfg.initial.nu);

    // per path: trapezoid integrals of max nu^p and max |mu|^p for p = 1..=4
    let raw: Vec<Option<[f64; 2 * MAX_EXPONENT as usize]>> = (0..n_max as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = PathRng::new(cfg.seed, i);
            let mut acc = [0.0; 2 * MAX_EXPONENT as usize];
            let mut prev = [0.0; 2 * MAX_EXPONENT as usize];
            let ok = ens.run(&mut rng, mu0, nu0, dt, n_steps, |step, snap| {
                let nu_max = snap.nu.iter().fold(0.0f64, |m, v| m.max(*v));
                let mu_max = snap.mu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let (mut pn, mut pm) = (1.0, 1.0);
                for p in 0..k {
                    pn *= nu_max;
                    pm *= mu_max;
                    if step > 0 {
                        acc[p] += 0.5 * (prev[p] + pn) * dt;
                        acc[k + p] += 0.5 * (prev[k + p] + pm) * dt;
                    }
                    prev[p] = pn;
                    prev[k + p] = pm;
                }
            });
            ok.ok().map(|_| acc)
        })
        .collect();

    Ok(ns
        .iter()
        .map(|&n| {
            let p = n as usize - 1;
            let mut nu_stats = Vec::new();
            let mut mu_stats = Vec::new();
            let mut excluded = 0;
            for &size in sample_sizes {
                let mut nu_vals = Vec::with_capacity(size);
                let mut mu_vals = Vec::with_capacity(size);
                excluded = 0;
                for row in &raw[..size] {
                    match row {
                        Some(a) if a[p].is_finite() && a[k + p].is_finite() => {
                            nu_vals.push(a[p]);
                            mu_vals.push(a[k + p]);
                        }
                        _ => excluded += 1,
                    }
                }
                nu_stats.push(SampleStats::from_samples(&nu_vals));
                mu_stats.push(SampleStats::from_samples(&mu_vals));
            }
            MomentProbe {
                n,
                sample_sizes: sample_sizes.to_vec(),
                nu_rel_change: rel_changes(&nu_stats),
                mu_rel_change: rel_changes(&mu_stats),
                nu: nu_stats,
                mu: mu_stats,
                overflow_excluded: excluded,
            }
        })
        .collect())
}

/// Moment probe for a single exponent `n`.
pub fn moment_bound_probe(n: u32, bx: &ParamBox, cfg: &SimConfig, sample_sizes: &[usize]) -> Result<MomentProbe> {
    Ok(moment_probes(&[n], bx, cfg, sample_sizes)?.remove(0))
}
