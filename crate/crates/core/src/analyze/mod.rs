//! Numerical checks of the qualitative structure of the canonical system,
//! the Newton potential, and the map back to physical variables.
//!
//! Every check returns a [`CheckReport`] whose `worst_violation` is the most
//! negative signed margin found (positive when the property holds with room
//! to spare) and which passes when that margin is at least `-tolerance`.

mod checks;
mod physical;
mod potential;
mod suite;

use serde::Serialize;

use crate::error::Result;
use crate::integrate::{uniform_grid, Trajectory};
use crate::model::OdeState;

pub use checks::{
    barrier_check, phi2_check, phi_check, v_ordering_check, v_sandwich_check, wronskian_bound_check, wronskian_check,
    z_dynamics_check, z_limit_check,
};
pub use physical::{
    pde_residual, round_trip_check, to_canonical, to_physical, CanonicalSamples, PhysicalProfile, PhysicalScaling,
};
pub use potential::{newton_potential, potential_consistency, PowerDensity, RadialFn, RadialFunction, SampledProfile};
pub use suite::{run_suite, SuiteEntry, SuiteOptions, SuiteOutcome, SuiteStatus};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub worst_violation: f64,
    /// Radius of the worst margin, if the check is radial.
    pub location: Option<f64>,
    pub tolerance: f64,
    pub details: String,
}

impl CheckReport {
    pub fn new(name: &str, worst_violation: f64, location: Option<f64>, tolerance: f64, details: String) -> Self {
        Self {
            name: name.to_string(),
            passed: worst_violation >= -tolerance,
            worst_violation,
            location,
            tolerance,
            details,
        }
    }
}

/// Tolerances used by the checks, gathered so they can be tightened together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckTolerances {
    /// Relative slack on monotonicity of `ω r^(N-1)`.
    pub wronskian: f64,
    /// Bound on `|ω r^(N-1)|` for two heights close to the ground state.
    pub wronskian_bound: f64,
    pub phi: f64,
    /// Relative to `u0`.
    pub phi2: f64,
    pub z_residual: f64,
    /// Relative gap between `z(∞)^2` and `V_inf - 1`.
    pub z_limit: f64,
    pub sandwich: f64,
    pub barrier: f64,
    pub ordering: f64,
    /// Relative to `max |W|`.
    pub potential: f64,
    pub pde: f64,
    /// Relative gap between `k^2` and `V_inf - 1`.
    pub decay: f64,
    pub round_trip: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        Self {
            wronskian: 1e-9,
            wronskian_bound: 1e-6,
            phi: 1e-9,
            phi2: 1e-9,
            z_residual: 1e-4,
            z_limit: 0.02,
            sandwich: 1e-12,
            barrier: 1e-9,
            ordering: 1e-12,
            potential: 1e-6,
            pde: 1e-6,
            decay: 0.02,
            round_trip: 1e-10,
        }
    }
}

/// Uniform samples on `[a, b]` merged with the step endpoints inside it.
pub(crate) fn samples(traj: &Trajectory, a: f64, b: f64, n: usize) -> Result<Vec<OdeState>> {
    let mut r: Vec<f64> = uniform_grid(a, b, n);
    r.extend(traj.nodes().map(|s| s.r).filter(|&x| x > a && x < b));
    r.sort_by(f64::total_cmp);
    r.dedup();
    r.into_iter().map(|x| traj.eval(x)).collect()
}

/// End of the initial stretch on which `u > 0` and `u' < 0`.
pub(crate) fn decreasing_range_end(traj: &Trajectory) -> f64 {
    let mut last = traj.r_start();
    for s in traj.nodes().skip(1) {
        if s.u <= 0.0 || s.up >= 0.0 {
            return last;
        }
        last = s.r;
    }
    last
}

/// End of the initial stretch on which `u > 0`.
pub(crate) fn positive_range_end(traj: &Trajectory) -> f64 {
    let mut last = traj.r_start();
    for s in traj.nodes().skip(1) {
        if s.u <= 0.0 {
            return last;
        }
        last = s.r;
    }
    last
}

/// Index and value of the smallest entry.
pub(crate) fn argmin(values: impl IntoIterator<Item = f64>) -> Option<(usize, f64)> {
    values.into_iter().enumerate().fold(None, |best, (i, v)| match best {
        Some((_, b)) if b <= v => best,
        _ => Some((i, v)),
    })
}
