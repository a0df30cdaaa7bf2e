//! Numerical checks of the structural claims behind the robust strategy:
//! the minimax equality, linearity of mixture expectations, optimality of the
//! selected corner, finiteness of moments and convergence of the wealth scheme.

mod convergence;
mod corners;
mod minimax;
mod mixture;
mod moments;

pub use convergence::{convergence_order, ConvergenceReport};
pub use corners::{
    brute_force_worst_corner, corner_agreement, sample_states, BruteForceReport, CornerCheck, StateSampling,
};
pub use minimax::{linspace, minimax_gap, MinimaxReport};
pub use mixture::mixture_linearity_check;
pub use moments::{moment_bound_probe, moment_probes, MomentProbe};
