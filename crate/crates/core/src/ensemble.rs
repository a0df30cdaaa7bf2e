//! Joint stepping of several parameter sets on shared noise.
//!
//! The drift process depends only on `(theta_mu, eta_mu)` and the squared
//! volatility only on `(theta_sigma, eta_sigma)`, so the 16 corners of a box
//! need 4 drift and 4 variance trajectories. Every trajectory of a path is
//! driven by the same normals, drawn in the same order as
//! [`crate::dynamics::simulate_path`], which makes corner comparisons use
//! common random numbers and makes a single-corner ensemble reproduce the
//! full simulator bit for bit.

use crate::dynamics::{MarketConstants, OuStepper, VarianceStepper};
use crate::params::{ParamBox, ParamQuadruple, CORNER_COUNT};
use crate::rng::PathRng;

#[derive(Debug, Clone)]
pub struct Ensemble {
    mu: Vec<OuStepper>,
    nu: Vec<VarianceStepper>,
    /// `(drift index, variance index)` for each cell.
    cells: Vec<(usize, usize)>,
}

/// Current values of all trajectories at one grid point.
pub struct Snapshot<'a> {
    pub mu: &'a [f64],
    pub nu: &'a [f64],
    /// Stock increment over the step that starts here (zero at the last point).
    pub dw_s: f64,
}

impl Ensemble {
    pub fn single(q: &ParamQuadruple, consts: &MarketConstants, dt: f64) -> Ensemble {
        Ensemble {
            mu: vec![OuStepper::new(q.theta_mu, q.eta_mu, consts.sigma_mu, dt)],
            nu: vec![VarianceStepper::new(q.theta_sigma, q.eta_sigma, consts.xi, dt)],
            cells: vec![(0, 0)],
        }
    }

    /// All 16 corners; cell `c` is corner `c` of [`ParamBox::corner`].
    pub fn corners(bx: &ParamBox, dt: f64) -> Ensemble {
        let mu = (0..4)
            .map(|m| {
                OuStepper::new(
                    bx.theta_mu.endpoint(m & 1 != 0),
                    bx.eta_mu.endpoint(m & 2 != 0),
                    bx.sigma_mu,
                    dt,
                )
            })
            .collect();
        let nu = (0..4)
            .map(|v| {
                VarianceStepper::new(
                    bx.theta_sigma.endpoint(v & 1 != 0),
                    bx.eta_sigma.endpoint(v & 2 != 0),
                    bx.xi,
                    dt,
                )
            })
            .collect();
        let cells = (0..CORNER_COUNT).map(|c| (c & 3, c >> 2)).collect();
        Ensemble { mu, nu, cells }
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    pub fn n_mu(&self) -> usize {
        self.mu.len()
    }

    pub fn n_nu(&self) -> usize {
        self.nu.len()
    }

    /// Steps all trajectories over `n_steps` of size `dt` from `(mu0, nu0)`,
    /// calling `visit(k, snapshot)` at every grid point `k = 0..=n_steps`.
    /// Returns the first step at which some trajectory left its domain.
    pub fn run(
        &self,
        rng: &mut PathRng,
        mu0: f64,
        nu0: f64,
        dt: f64,
        n_steps: usize,
        mut visit: impl FnMut(usize, &Snapshot<'_>),
    ) -> Result<(), usize> {
        let sq = dt.sqrt();
        let mut mu = vec![mu0; self.mu.len()];
        let mut nu = vec![nu0; self.nu.len()];
        for k in 0..n_steps {
            let [zs, zm, zv] = rng.triplet();
            let dw_s = zs * sq;
            visit(k, &Snapshot { mu: &mu, nu: &nu, dw_s });
            // round-trip through the increment, as the path simulator does
            let zm = (zm * sq) / sq;
            let zv = (zv * sq) / sq;
            for (m, st) in mu.iter_mut().zip(&self.mu) {
                *m = st.step(*m, zm);
                if !m.is_finite() {
                    return Err(k + 1);
                }
            }
            for (v, st) in nu.iter_mut().zip(&self.nu) {
                *v = st.step(*v, zv);
                if !(v.is_finite() && *v > 0.0) {
                    return Err(k + 1);
                }
            }
        }
        visit(
            n_steps,
            &Snapshot {
                mu: &mu,
                nu: &nu,
                dw_s: 0.0,
            },
        );
        Ok(())
    }
}
