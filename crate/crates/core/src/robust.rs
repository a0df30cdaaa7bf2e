//! Worst-case parameter selection.
//!
//! Two selectors are provided. [`SelectorMode::Paper`] is the published
//! corner table, case by case. [`SelectorMode::SignLogic`] minimizes the
//! first-order drift terms of the HJB generator over the 16 corners, taking
//! `V_mu` to have the sign of `mu - r` and `V_nu < 0`. Both agree whenever
//! the drift and the squared volatility sit inside their bands; outside the
//! bands the published table and the sign argument can differ.
//!
//! Ties: `mu = r` is treated as `mu > r`, and a state exactly on a band
//! endpoint counts as inside the band.

use std::str::FromStr;

use serde::Serialize;

use crate::dynamics::{MarketState, ParamSource};
use crate::error::{domain, Result};
use crate::params::{corner_set, GammaSchedule, Interval, ParamBox, ParamQuadruple, CORNER_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SelectorMode {
    Paper,
    SignLogic,
}

impl FromStr for SelectorMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper" => Ok(SelectorMode::Paper),
            "sign-logic" | "sign_logic" => Ok(SelectorMode::SignLogic),
            other => Err(format!(
                "unknown selector mode `{other}` (expected paper or sign-logic)"
            )),
        }
    }
}

impl std::fmt::Display for SelectorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SelectorMode::Paper => "paper",
            SelectorMode::SignLogic => "sign-logic",
        })
    }
}

/// Position of a state variable relative to its closed band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Band {
    Below,
    In,
    Above,
}

impl Band {
    pub fn classify(x: f64, band: &Interval) -> Band {
        if x < band.min {
            Band::Below
        } else if x > band.max {
            Band::Above
        } else {
            Band::In
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Band::Below => "below_band",
            Band::In => "in_band",
            Band::Above => "above_band",
        }
    }
}

/// Position of the drift relative to the riskless rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RateSide {
    BelowRate,
    AtRate,
    AboveRate,
}

impl RateSide {
    pub fn classify(mu: f64, r: f64) -> RateSide {
        if mu < r {
            RateSide::BelowRate
        } else if mu > r {
            RateSide::AboveRate
        } else {
            RateSide::AtRate
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RateSide::BelowRate => "mu<r",
            RateSide::AtRate => "mu=r",
            RateSide::AboveRate => "mu>r",
        }
    }

    /// Sign of `V_mu` used by both selectors (`mu = r` follows `mu > r`).
    fn value_slope_sign(&self) -> f64 {
        match self {
            RateSide::BelowRate => -1.0,
            RateSide::AtRate | RateSide::AboveRate => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerDecision {
    pub corner: ParamQuadruple,
    /// Position in [`corner_set`] order.
    pub corner_index: usize,
    pub mu_band: Band,
    pub mu_side: RateSide,
    pub nu_band: Band,
    pub mode: SelectorMode,
}

impl CornerDecision {
    /// True when both state variables lie inside their bands.
    pub fn in_band(&self) -> bool {
        self.mu_band == Band::In && self.nu_band == Band::In
    }

    pub fn region(&self) -> (Band, RateSide, Band) {
        (self.mu_band, self.mu_side, self.nu_band)
    }
}

/// Picks the worst-case corner for the state `(mu, nu)`.
pub fn select_corner(mu: f64, nu: f64, bx: &ParamBox, mode: SelectorMode) -> Result<CornerDecision> {
    if !(nu > 0.0) {
        return Err(domain(format!("nu must be > 0, got {nu}")));
    }
    if !mu.is_finite() {
        return Err(domain(format!("mu must be finite, got {mu}")));
    }
    let mu_band = Band::classify(mu, &bx.eta_mu);
    let mu_side = RateSide::classify(mu, bx.r);
    let nu_band = Band::classify(nu, &bx.eta_sigma);
    let corner_index = match mode {
        SelectorMode::Paper => paper_corner(mu_band, mu_side, nu_band),
        SelectorMode::SignLogic => sign_logic_corner(mu, nu, mu_side, bx),
    };
    Ok(CornerDecision {
        corner: bx.corner(corner_index),
        corner_index,
        mu_band,
        mu_side,
        nu_band,
        mode,
    })
}

/// The published table, returned as a corner index.
fn paper_corner(mu_band: Band, mu_side: RateSide, nu_band: Band) -> usize {
    // (theta_mu_max, eta_mu_max)
    let (theta_mu_max, eta_mu_max) = match (mu_side, mu_band) {
        (RateSide::BelowRate, Band::In) => (true, true),
        (RateSide::BelowRate, Band::Below) => (true, true),
        (RateSide::BelowRate, Band::Above) => (true, false),
        (_, Band::In) => (true, false),
        (_, Band::Below) => (false, false),
        (_, Band::Above) => (true, false),
    };
    // (theta_sigma_max, eta_sigma_max)
    let (theta_sigma_max, eta_sigma_max) = match nu_band {
        Band::In => (true, true),
        Band::Above => (false, false),
        Band::Below => (true, false),
    };
    ParamBox::corner_index(theta_mu_max, eta_mu_max, theta_sigma_max, eta_sigma_max)
}

/// The drift part of the HJB generator with value-gradient signs substituted.
pub fn sign_logic_score(q: &ParamQuadruple, mu: f64, nu: f64, r: f64) -> f64 {
    let s_mu = RateSide::classify(mu, r).value_slope_sign();
    let s_nu = -1.0;
    s_mu * q.theta_mu * (q.eta_mu - mu) + s_nu * q.theta_sigma * (q.eta_sigma - nu)
}

fn sign_logic_corner(mu: f64, nu: f64, _side: RateSide, bx: &ParamBox) -> usize {
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for (i, q) in corner_set(bx).iter().enumerate() {
        let score = sign_logic_score(q, mu, nu, bx.r);
        // strict comparison keeps the first corner on ties
        if score < best_score {
            best = i;
            best_score = score;
        }
    }
    debug_assert!(best < CORNER_COUNT);
    best
}

/// Worst-case schedule from the states observed at the rebalance dates.
/// `states[i]` is the state at `t_i`; the schedule ends at `horizon`.
pub fn worst_case_schedule(
    states: &[MarketState],
    horizon: f64,
    bx: &ParamBox,
    mode: SelectorMode,
) -> Result<GammaSchedule> {
    if states.is_empty() {
        return Err(domain("at least one rebalance state is required"));
    }
    let mut times: Vec<f64> = states.iter().map(|s| s.t).collect();
    times.push(horizon);
    let corners = states
        .iter()
        .map(|s| select_corner(s.mu, s.nu, bx, mode).map(|d| d.corner))
        .collect::<Result<Vec<_>>>()?;
    GammaSchedule::new(times, corners)
}

/// Re-selects the worst-case corner at every rebalance date from the
/// current state, for use as a [`ParamSource`] during simulation.
#[derive(Debug, Clone, Copy)]
pub struct WorstCase<'a> {
    pub bx: &'a ParamBox,
    pub mode: SelectorMode,
}

impl ParamSource for WorstCase<'_> {
    fn params_for(&self, _interval: usize, state: &MarketState) -> Result<ParamQuadruple> {
        select_corner(state.mu, state.nu, self.bx, self.mode).map(|d| d.corner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx() -> ParamBox {
        ParamBox {
            theta_mu: Interval::new(0.5, 2.0),
            eta_mu: Interval::new(0.01, 0.05),
            theta_sigma: Interval::new(0.7, 1.8),
            eta_sigma: Interval::new(0.02, 0.06),
            sigma_mu: 0.2,
            xi: 0.5,
            r: 0.03,
            bound_m: 10.0,
        }
    }

    #[test]
    fn below_rate_in_band_picks_upper_eta_and_theta() {
        let b = bx();
        let d = select_corner(0.02, 0.04, &b, SelectorMode::Paper).unwrap();
        assert_eq!(d.corner.eta_mu, 0.05);
        assert_eq!(d.corner.theta_mu, 2.0);
        assert_eq!(d.corner.eta_sigma, 0.06);
        assert_eq!(d.corner.theta_sigma, 1.8);
        assert_eq!(d.region(), (Band::In, RateSide::BelowRate, Band::In));
        let s = select_corner(0.02, 0.04, &b, SelectorMode::SignLogic).unwrap();
        assert_eq!(s.corner, d.corner);
    }

    #[test]
    fn paper_table_rows() {
        let b = bx();
        let p = |mu, nu| select_corner(mu, nu, &b, SelectorMode::Paper).unwrap().corner;
        // mu < r
        assert_eq!((p(0.005, 0.04).eta_mu, p(0.005, 0.04).theta_mu), (0.05, 2.0));
        let mut b2 = b;
        b2.r = 0.09;
        let c = select_corner(0.07, 0.04, &b2, SelectorMode::Paper).unwrap().corner;
        assert_eq!((c.eta_mu, c.theta_mu), (0.01, 2.0));
        // mu > r
        assert_eq!((p(0.04, 0.04).eta_mu, p(0.04, 0.04).theta_mu), (0.01, 2.0));
        assert_eq!((p(0.08, 0.04).eta_mu, p(0.08, 0.04).theta_mu), (0.01, 2.0));
        let mut b3 = b;
        b3.r = 0.001;
        let c = select_corner(0.005, 0.04, &b3, SelectorMode::Paper).unwrap().corner;
        assert_eq!((c.eta_mu, c.theta_mu), (0.01, 0.5));
        // nu
        assert_eq!((p(0.04, 0.10).eta_sigma, p(0.04, 0.10).theta_sigma), (0.02, 0.7));
        assert_eq!((p(0.04, 0.01).eta_sigma, p(0.04, 0.01).theta_sigma), (0.02, 1.8));
    }

    #[test]
    fn sign_logic_out_of_band_differs_where_expected() {
        let b = bx();
        let s = |mu, nu| select_corner(mu, nu, &b, SelectorMode::SignLogic).unwrap().corner;
        let c = s(0.04, 0.10);
        assert_eq!((c.eta_sigma, c.theta_sigma), (0.06, 0.7));
        let c = s(0.04, 0.01);
        assert_eq!((c.eta_sigma, c.theta_sigma), (0.06, 1.8));
        let mut b2 = b;
        b2.r = 0.09;
        let c = select_corner(0.07, 0.04, &b2, SelectorMode::SignLogic).unwrap().corner;
        assert_eq!((c.eta_mu, c.theta_mu), (0.05, 0.5));
    }

    #[test]
    fn rate_tie_uses_upper_branch() {
        let b = bx();
        let d = select_corner(0.03, 0.04, &b, SelectorMode::Paper).unwrap();
        assert_eq!(d.mu_side, RateSide::AtRate);
        assert_eq!((d.corner.eta_mu, d.corner.theta_mu), (0.01, 2.0));
        let s = select_corner(0.03, 0.04, &b, SelectorMode::SignLogic).unwrap();
        assert_eq!(s.corner, d.corner);
    }

    #[test]
    fn band_endpoints_are_in_band() {
        let b = bx();
        assert_eq!(Band::classify(0.01, &b.eta_mu), Band::In);
        assert_eq!(Band::classify(0.05, &b.eta_mu), Band::In);
        assert_eq!(Band::classify(0.0499999, &b.eta_mu), Band::In);
        assert_eq!(Band::classify(0.0500001, &b.eta_mu), Band::Above);
    }

    #[test]
    fn rejects_nonpositive_variance() {
        assert!(select_corner(0.02, 0.0, &bx(), SelectorMode::Paper).is_err());
    }

    fn state(t: f64, mu: f64, nu: f64) -> MarketState {
        MarketState {
            t,
            s: 1.0,
            mu,
            nu,
            x: 1.0,
        }
    }

    #[test]
    fn same_region_gives_constant_schedule() {
        let b = bx();
        let states = vec![
            state(0.0, 0.04, 0.04),
            state(0.25, 0.045, 0.03),
            state(0.5, 0.035, 0.05),
        ];
        let s = worst_case_schedule(&states, 1.0, &b, SelectorMode::Paper).unwrap();
        assert_eq!(s.switch_count(), 0);
        assert_eq!(s.rebalance_times(), &[0.0, 0.25, 0.5, 1.0]);
    }

    #[test]
    fn crossing_the_rate_switches_at_the_next_date() {
        let b = bx();
        let states = vec![state(0.0, 0.04, 0.04), state(0.25, 0.04, 0.04), state(0.5, 0.02, 0.04)];
        let s = worst_case_schedule(&states, 1.0, &b, SelectorMode::Paper).unwrap();
        assert_eq!(s.switch_count(), 1);
        assert_eq!(s.corners()[1], s.corners()[0]);
        assert_ne!(s.corners()[2], s.corners()[1]);
        assert_eq!(s.at(0.5), s.corners()[2]);
    }

    proptest::proptest! {
        #[test]
        fn modes_agree_strictly_inside_bands(fm in 0.0001f64..0.9999, fv in 0.0001f64..0.9999, r in 0.0f64..0.1) {
            let mut b = bx();
            b.r = r;
            let mu = b.eta_mu.min + fm * (b.eta_mu.max - b.eta_mu.min);
            let nu = b.eta_sigma.min + fv * (b.eta_sigma.max - b.eta_sigma.min);
            let p = select_corner(mu, nu, &b, SelectorMode::Paper).unwrap();
            let s = select_corner(mu, nu, &b, SelectorMode::SignLogic).unwrap();
            proptest::prop_assert_eq!(p.corner_index, s.corner_index);
        }

        #[test]
        fn selection_is_a_pure_corner(mu in -0.5f64..0.5, nu in 1e-4f64..1.0, sign in proptest::bool::ANY) {
            let b = bx();
            let mode = if sign { SelectorMode::SignLogic } else { SelectorMode::Paper };
            let d = select_corner(mu, nu, &b, mode).unwrap();
            proptest::prop_assert!(corner_set(&b).contains(&d.corner));
            proptest::prop_assert_eq!(d.corner, b.corner(d.corner_index));
            proptest::prop_assert_eq!(d, select_corner(mu, nu, &b, mode).unwrap());
        }
    }
}
