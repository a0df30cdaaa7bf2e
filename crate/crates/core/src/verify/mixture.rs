use crate::error::{domain, Result};
use crate::stats;
use crate::valuation::ValueSamples;

/// Relative discrepancy between the weighted mean of per-model estimates and
/// the estimate of the per-path weighted mixture, both computed on the same
/// samples. Mixture expectations are linear in the weights, so this is zero
/// up to floating-point rounding.
pub fn mixture_linearity_check(samples: &[ValueSamples], weights: &[f64]) -> Result<f64> {
    if samples.is_empty() || samples.len() != weights.len() {
        return Err(domain("one weight per estimate is required"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(domain("weights must be finite and nonnegative"));
    }
    let total: f64 = stats::sum(weights);
    if (total - 1.0).abs() > 1e-12 {
        return Err(domain(format!("weights sum to {total}, not 1")));
    }
    let n = samples[0].integrals.len();
    if samples.iter().any(|s| s.integrals.len() != n) || n == 0 {
        return Err(domain("estimates must share the same nonempty set of paths"));
    }
    let per_model: Vec<Vec<f64>> = samples.iter().map(|s| s.values()).collect();

    let weighted_of_means: Vec<f64> = per_model.iter().zip(weights).map(|(v, w)| w * stats::mean(v)).collect();
    let lhs = stats::sum(&weighted_of_means);

    let mixed: Vec<f64> = (0..n)
        .map(|p| {
            let terms: Vec<f64> = per_model.iter().zip(weights).map(|(v, w)| w * v[p]).collect();
            stats::sum(&terms)
        })
        .collect();
    let rhs = stats::mean(&mixed);

    let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    Ok((lhs - rhs).abs() / scale)
}
