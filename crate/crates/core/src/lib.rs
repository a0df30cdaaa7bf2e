//! Robust log-utility portfolio choice when the stock drift is an
//! Ornstein–Uhlenbeck process, the squared volatility a GARCH-type diffusion,
//! and the mean-reversion parameters are only known to lie in a box.
//!
//! The crate simulates the market, selects worst-case parameters, values
//! the log-optimal strategy by Monte Carlo and checks the minimax and
//! structural properties of the robust problem numerically. All Monte Carlo
//! output is a pure function of the seed: each path owns a generator keyed
//! by its index and all reductions run in path order.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod export;
pub mod params;
pub mod rng;
pub mod robust;
pub mod stats;
pub mod strategy;
pub mod valuation;
pub mod verify;

pub use config::{KvConfig, SimConfig};
pub use dynamics::{
    euler_wealth, ou_exact_step, simulate_path, simulate_paths, variance_step, wealth_log_terminal, MarketConstants,
    MarketState, ParamSource, PathBundle, Simulation,
};
pub use error::{Error, Result};
pub use params::{corner_set, validate_box, GammaSchedule, Interval, ParamBox, ParamQuadruple};
pub use robust::{select_corner, worst_case_schedule, CornerDecision, SelectorMode, WorstCase};
pub use strategy::{check_admissible, merton_fraction, FractionProcess, StrategySpec};
pub use valuation::{running_integrand, value_classical, value_robust, ValueEstimate, ValuePoint};
