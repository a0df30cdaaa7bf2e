//! The uncertainty set, its parameter points and piecewise-constant schedules.

use serde::Serialize;

use crate::error::{Error, Result};

/// Mean-reversion parameters of the drift (`mu`) and variance (`nu`) processes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamQuadruple {
    pub theta_mu: f64,
    pub eta_mu: f64,
    pub theta_sigma: f64,
    pub eta_sigma: f64,
}

impl ParamQuadruple {
    pub fn new(theta_mu: f64, eta_mu: f64, theta_sigma: f64, eta_sigma: f64) -> Self {
        ParamQuadruple {
            theta_mu,
            eta_mu,
            theta_sigma,
            eta_sigma,
        }
    }

    pub fn components(&self) -> [f64; 4] {
        [self.theta_mu, self.eta_mu, self.theta_sigma, self.eta_sigma]
    }

    /// Largest absolute component.
    pub fn norm_max(&self) -> f64 {
        self.components().iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Closed interval `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub fn new(min: f64, max: f64) -> Self {
        Interval { min, max }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.min <= x && x <= self.max
    }

    pub fn endpoint(&self, upper: bool) -> f64 {
        if upper {
            self.max
        } else {
            self.min
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }
}

/// The uncertainty set: four closed intervals for the uncertain
/// mean-reversion parameters plus the fixed market constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamBox {
    pub theta_mu: Interval,
    pub eta_mu: Interval,
    pub theta_sigma: Interval,
    pub eta_sigma: Interval,
    /// Volatility of the drift process.
    pub sigma_mu: f64,
    /// Volatility-of-variance coefficient.
    pub xi: f64,
    /// Riskless rate.
    pub r: f64,
    /// Uniform bound on every parameter component.
    pub bound_m: f64,
}

/// A single failed invariant of a [`ParamBox`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

pub const CORNER_COUNT: usize = 16;

impl ParamBox {
    /// A box with every interval collapsed onto `q`.
    pub fn degenerate(q: ParamQuadruple, sigma_mu: f64, xi: f64, r: f64, bound_m: f64) -> Self {
        ParamBox {
            theta_mu: Interval::new(q.theta_mu, q.theta_mu),
            eta_mu: Interval::new(q.eta_mu, q.eta_mu),
            theta_sigma: Interval::new(q.theta_sigma, q.theta_sigma),
            eta_sigma: Interval::new(q.eta_sigma, q.eta_sigma),
            sigma_mu,
            xi,
            r,
            bound_m,
        }
    }

    fn intervals(&self) -> [(&'static str, Interval); 4] {
        [
            ("theta_mu", self.theta_mu),
            ("eta_mu", self.eta_mu),
            ("theta_sigma", self.theta_sigma),
            ("eta_sigma", self.eta_sigma),
        ]
    }

    /// Corner `index`; bit 0 selects `theta_mu`, bit 1 `eta_mu`, bit 2
    /// `theta_sigma`, bit 3 `eta_sigma` (0 = min, 1 = max).
    pub fn corner(&self, index: usize) -> ParamQuadruple {
        assert!(index < CORNER_COUNT, "corner index {index} out of range");
        ParamQuadruple {
            theta_mu: self.theta_mu.endpoint(index & 1 != 0),
            eta_mu: self.eta_mu.endpoint(index & 2 != 0),
            theta_sigma: self.theta_sigma.endpoint(index & 4 != 0),
            eta_sigma: self.eta_sigma.endpoint(index & 8 != 0),
        }
    }

    /// Index of the corner with the given endpoint choices (`true` = max).
    pub fn corner_index(theta_mu_max: bool, eta_mu_max: bool, theta_sigma_max: bool, eta_sigma_max: bool) -> usize {
        theta_mu_max as usize
            | (eta_mu_max as usize) << 1
            | (theta_sigma_max as usize) << 2
            | (eta_sigma_max as usize) << 3
    }

    pub fn center(&self) -> ParamQuadruple {
        ParamQuadruple {
            theta_mu: self.theta_mu.midpoint(),
            eta_mu: self.eta_mu.midpoint(),
            theta_sigma: self.theta_sigma.midpoint(),
            eta_sigma: self.eta_sigma.midpoint(),
        }
    }

    pub fn contains(&self, q: &ParamQuadruple) -> bool {
        self.theta_mu.contains(q.theta_mu)
            && self.eta_mu.contains(q.eta_mu)
            && self.theta_sigma.contains(q.theta_sigma)
            && self.eta_sigma.contains(q.eta_sigma)
    }

    /// Order-independent digest of the box, used in output fingerprints.
    pub fn fingerprint(&self) -> String {
        let text = format!(
            "{:?}|{:?}|{:?}|{:?}|{}|{}|{}|{}",
            self.theta_mu, self.eta_mu, self.theta_sigma, self.eta_sigma, self.sigma_mu, self.xi, self.r, self.bound_m
        );
        crate::config::digest_hex(text.as_bytes())
    }

    /// Returns `Err` carrying every violation message if the box is invalid.
    pub fn validated(self) -> Result<Self> {
        let v = validate_box(&self);
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidBox(v.into_iter().map(|v| v.message).collect()))
        }
    }
}

/// The 16 extreme points of the box in bit-pattern order (see [`ParamBox::corner`]).
pub fn corner_set(bx: &ParamBox) -> Vec<ParamQuadruple> {
    (0..CORNER_COUNT).map(|i| bx.corner(i)).collect()
}

/// Lists every invariant the box breaks. An empty list means the box is valid.
pub fn validate_box(bx: &ParamBox) -> Vec<Violation> {
    let mut out = Vec::new();
    let bound_ok = bx.bound_m.is_finite() && bx.bound_m > 0.0;
    if !bound_ok {
        out.push(Violation {
            field: "bound_m",
            message: "bound_m must be a finite number > 0".into(),
        });
    }
    for (name, iv) in bx.intervals() {
        let (min_field, max_field) = field_names(name);
        if !(iv.min > 0.0) || !iv.min.is_finite() {
            out.push(Violation {
                field: min_field,
                message: format!("{min_field} must be > 0"),
            });
        }
        if !iv.max.is_finite() {
            out.push(Violation {
                field: max_field,
                message: format!("{max_field} must be finite"),
            });
        }
        if iv.min > iv.max {
            out.push(Violation {
                field: name,
                message: format!("{name} interval is empty: min {} > max {}", iv.min, iv.max),
            });
        }
        if bound_ok && iv.max > bx.bound_m {
            out.push(Violation {
                field: max_field,
                message: format!("{max_field} must be <= bound_m ({})", bx.bound_m),
            });
        }
    }
    for (field, value) in [("sigma_mu", bx.sigma_mu), ("xi", bx.xi), ("r", bx.r)] {
        if !(value > 0.0) || !value.is_finite() {
            out.push(Violation {
                field,
                message: format!("{field} must be > 0"),
            });
        }
    }
    out
}

fn field_names(name: &'static str) -> (&'static str, &'static str) {
    match name {
        "theta_mu" => ("theta_mu_min", "theta_mu_max"),
        "eta_mu" => ("eta_mu_min", "eta_mu_max"),
        "theta_sigma" => ("theta_sigma_min", "theta_sigma_max"),
        _ => ("eta_sigma_min", "eta_sigma_max"),
    }
}

/// Parameters held constant on each rebalance interval `[t_i, t_{i+1})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSchedule {
    rebalance_times: Vec<f64>,
    corners: Vec<ParamQuadruple>,
}

impl GammaSchedule {
    pub fn new(rebalance_times: Vec<f64>, corners: Vec<ParamQuadruple>) -> Result<Self> {
        if rebalance_times.len() < 2 {
            return Err(Error::InvalidConfig("schedule needs at least one interval".into()));
        }
        // Schedules may start after 0 (valuation from t > 0), never before.
        if !(rebalance_times[0] >= 0.0) {
            return Err(Error::InvalidConfig("schedule starts before 0".into()));
        }
        if rebalance_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig(
                "rebalance times must be strictly increasing".into(),
            ));
        }
        if corners.len() != rebalance_times.len() - 1 {
            return Err(Error::InvalidConfig(format!(
                "schedule has {} intervals but {} parameter sets",
                rebalance_times.len() - 1,
                corners.len()
            )));
        }
        Ok(GammaSchedule {
            rebalance_times,
            corners,
        })
    }

    /// Uniform grid `0 = t_0 < ... < t_N = horizon`.
    pub fn uniform_times(horizon: f64, n: usize) -> Vec<f64> {
        (0..=n)
            .map(|i| if i == n { horizon } else { horizon * i as f64 / n as f64 })
            .collect()
    }

    pub fn constant(horizon: f64, n: usize, q: ParamQuadruple) -> Result<Self> {
        GammaSchedule::new(GammaSchedule::uniform_times(horizon, n), vec![q; n])
    }

    pub fn rebalance_times(&self) -> &[f64] {
        &self.rebalance_times
    }

    pub fn corners(&self) -> &[ParamQuadruple] {
        &self.corners
    }

    pub fn n_intervals(&self) -> usize {
        self.corners.len()
    }

    pub fn horizon(&self) -> f64 {
        *self.rebalance_times.last().unwrap()
    }

    /// Interval index containing `t`; `t = T` maps to the last interval.
    pub fn interval_of(&self, t: f64) -> usize {
        let idx = self.rebalance_times.partition_point(|&ti| ti <= t);
        idx.saturating_sub(1).min(self.corners.len() - 1)
    }

    pub fn at(&self, t: f64) -> ParamQuadruple {
        self.corners[self.interval_of(t)]
    }

    /// Number of interval boundaries at which the parameter set changes.
    pub fn switch_count(&self) -> usize {
        self.corners.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn max_component(&self) -> f64 {
        self.corners.iter().fold(0.0, |m, q| m.max(q.norm_max()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn generic_box() -> ParamBox {
        ParamBox {
            theta_mu: Interval::new(0.5, 2.0),
            eta_mu: Interval::new(0.01, 0.10),
            theta_sigma: Interval::new(0.4, 1.5),
            eta_sigma: Interval::new(0.01, 0.09),
            sigma_mu: 0.2,
            xi: 0.5,
            r: 0.02,
            bound_m: 10.0,
        }
    }

    #[test]
    fn degenerate_box_has_sixteen_identical_corners() {
        let q = ParamQuadruple::new(1.0, 0.05, 1.5, 0.04);
        let bx = ParamBox::degenerate(q, 0.2, 0.5, 0.02, 10.0);
        let cs = corner_set(&bx);
        assert_eq!(cs.len(), 16);
        assert!(cs.iter().all(|c| *c == q));
    }

    #[test]
    fn one_free_dimension_gives_two_distinct_corners() {
        let mut bx = ParamBox::degenerate(ParamQuadruple::new(1.0, 0.05, 1.5, 0.04), 0.2, 0.5, 0.02, 10.0);
        bx.theta_mu = Interval::new(1.0, 2.0);
        let mut distinct: Vec<ParamQuadruple> = Vec::new();
        for c in corner_set(&bx) {
            if !distinct.contains(&c) {
                distinct.push(c);
            }
        }
        assert_eq!(distinct.len(), 2);
    }

    #[test]
    fn index_zero_is_all_minima_and_fifteen_all_maxima() {
        let bx = generic_box();
        let cs = corner_set(&bx);
        assert_eq!(cs[0], ParamQuadruple::new(0.5, 0.01, 0.4, 0.01));
        assert_eq!(cs[15], ParamQuadruple::new(2.0, 0.10, 1.5, 0.09));
        assert_eq!(
            cs[ParamBox::corner_index(true, false, false, true)],
            ParamQuadruple::new(2.0, 0.01, 0.4, 0.09)
        );
        assert!(cs.iter().all(|c| bx.contains(c)));
    }

    #[test]
    fn zero_theta_mu_min_is_reported() {
        let mut bx = generic_box();
        bx.theta_mu.min = 0.0;
        let v = validate_box(&bx);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "theta_mu_min");
        assert_eq!(v[0].message, "theta_mu_min must be > 0");
    }

    #[test]
    fn inverted_interval_is_reported() {
        let mut bx = generic_box();
        bx.eta_sigma = Interval::new(0.09, 0.01);
        let v = validate_box(&bx);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "eta_sigma");
        assert!(v[0].message.contains("eta_sigma"));
    }

    #[test]
    fn every_violation_is_listed() {
        let mut bx = generic_box();
        bx.theta_mu.min = -1.0;
        bx.eta_mu.max = 50.0;
        bx.xi = 0.0;
        bx.r = -0.01;
        let fields: Vec<_> = validate_box(&bx).into_iter().map(|v| v.field).collect();
        assert_eq!(fields, vec!["theta_mu_min", "eta_mu_max", "xi", "r"]);
        assert!(bx.validated().is_err());
    }

    #[test]
    fn valid_box_is_ok() {
        assert!(validate_box(&generic_box()).is_empty());
        assert!(generic_box().validated().is_ok());
    }

    #[test]
    fn schedule_lookup_and_switches() {
        let bx = generic_box();
        let s = GammaSchedule::new(
            vec![0.0, 0.25, 0.5, 1.0],
            vec![bx.corner(0), bx.corner(0), bx.corner(3)],
        )
        .unwrap();
        assert_eq!(s.interval_of(0.0), 0);
        assert_eq!(s.interval_of(0.25), 1);
        assert_eq!(s.interval_of(0.7), 2);
        assert_eq!(s.interval_of(1.0), 2);
        assert_eq!(s.switch_count(), 1);
        assert!(GammaSchedule::new(vec![0.0, 0.5, 0.5], vec![bx.corner(0); 2]).is_err());
        assert!(GammaSchedule::new(vec![0.0, 1.0], vec![bx.corner(0); 2]).is_err());
    }
}
