//! Deterministic reductions.
//!
//! Every aggregate in the crate goes through [`sum`], which applies a fixed
//! pairwise tree with Neumaier-compensated leaves. Per-path values are always
//! collected in path-index order before reduction, so results do not depend
//! on how the work was scheduled across threads.

use serde::Serialize;

const LEAF: usize = 64;

#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(mut self, other: Compensated) -> Compensated {
        self.add(other.sum);
        self.comp += other.comp;
        self
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

fn tree(values: &[f64]) -> Compensated {
    if values.len() <= LEAF {
        let mut acc = Compensated::default();
        for &v in values {
            acc.add(v);
        }
        acc
    } else {
        let mid = values.len() / 2;
        tree(&values[..mid]).merge(tree(&values[mid..]))
    }
}

/// Compensated pairwise sum.
pub fn sum(values: &[f64]) -> f64 {
    tree(values).value()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    sum(values) / values.len() as f64
}

/// Sample mean with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleStats {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl SampleStats {
    pub fn from_samples(values: &[f64]) -> SampleStats {
        let n = values.len();
        let m = mean(values);
        let std_error = if n < 2 {
            0.0
        } else {
            let dev: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
            (sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
        };
        SampleStats { mean: m, std_error, n }
    }
}

/// Standard error of a difference of two independent-looking estimates.
pub fn combined_se(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

/// Ordinary least-squares slope of `ys` against `xs`. `None` when the
/// abscissae carry no spread.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: Vec<f64> = xs.iter().map(|x| (x - mx) * (x - mx)).collect();
    let sxy: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let sxx = sum(&sxx);
    if !(sxx > 1e-300) {
        return None;
    }
    Some(sum(&sxy) / sxx)
}
