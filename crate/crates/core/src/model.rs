//! The canonical radial system
//!
//! ```text
//! u'' + (N-1)/r u' = (V - 1) u
//! V'' + (N-1)/r V' = |u|^p
//! ```
//!
//! with `u(0) = u0 > 0` and `u'(0) = V(0) = V'(0) = 0`. The `(N-1)/r` terms
//! are singular at the origin, so integration starts from a short Taylor
//! expansion at a small positive radius (see [`series_start`]).

use serde::Serialize;

use crate::error::{Error, Result};

/// Default radius at which the Taylor start hands over to the integrator.
pub const DEFAULT_R_START: f64 = 1e-6;

/// Dimension `N` and exponent `p` of the canonical system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    dim: u32,
    p: f64,
}

impl SystemParams {
    pub fn new(dim: u32, p: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParams(format!("dimension must be at least 2, got {dim}")));
        }
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::InvalidParams(format!("exponent p must lie in [1, 2], got {p}")));
        }
        Ok(Self { dim, p })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `N - 1`, the coefficient of the first-order radial terms.
    pub fn damping(&self) -> f64 {
        f64::from(self.dim) - 1.0
    }
}

/// A point `(r, u, u', V, V')` of the radial flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeState {
    pub r: f64,
    pub u: f64,
    pub up: f64,
    pub v: f64,
    pub vp: f64,
}

impl OdeState {
    pub fn from_vector(r: f64, y: [f64; 4]) -> Self {
        Self { r, u: y[0], up: y[1], v: y[2], vp: y[3] }
    }

    pub fn vector(&self) -> [f64; 4] {
        [self.u, self.up, self.v, self.vp]
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.vector().iter().all(|x| x.is_finite())
    }
}

/// Right-hand side of the first-order system, component by component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub du: f64,
    pub dup: f64,
    pub dv: f64,
    pub dvp: f64,
}

impl Derivative {
    pub fn vector(&self) -> [f64; 4] {
        [self.du, self.dup, self.dv, self.dvp]
    }
}

/// Evaluates the canonical vector field at `state`.
///
/// The source term uses `|u|^p`, so the field stays defined for the short
/// stretch after a zero crossing that an event locator may step across.
pub fn rhs(state: &OdeState, params: &SystemParams) -> Result<Derivative> {
    if state.r.is_nan() || state.r <= 0.0 {
        return Err(Error::Domain(format!("rhs is singular at r = {}; start from series_start instead", state.r)));
    }
    Ok(rhs_unchecked(state.r, &state.vector(), params))
}

#[inline]
pub(crate) fn rhs_vector(r: f64, y: &[f64; 4], params: &SystemParams) -> [f64; 4] {
    let k = params.damping() / r;
    [y[1], (y[2] - 1.0) * y[0] - k * y[1], y[3], y[0].abs().powf(params.p) - k * y[3]]
}

#[inline]
fn rhs_unchecked(r: f64, y: &[f64; 4], params: &SystemParams) -> Derivative {
    let [du, dup, dv, dvp] = rhs_vector(r, y, params);
    Derivative { du, dup, dv, dvp }
}

/// Second-order Taylor state at `r_start`, using `u''(0) = -u0/N` and
/// `V''(0) = u0^p/N`.
pub fn series_start(u0: f64, params: &SystemParams, r_start: f64) -> Result<OdeState> {
    if u0.is_nan() || u0 <= 0.0 {
        return Err(Error::Domain(format!("initial height must be positive, got {u0}")));
    }
    if r_start.is_nan() || r_start <= 0.0 {
        return Err(Error::Domain(format!("r_start must be positive, got {r_start}")));
    }
    Ok(series_state(u0, params, r_start))
}

/// Same expansion without argument checks; also valid at `r = 0`.
pub(crate) fn series_state(u0: f64, params: &SystemParams, r: f64) -> OdeState {
    let n = f64::from(params.dim());
    let upp = -u0 / n;
    let vpp = u0.powf(params.p()) / n;
    OdeState { r, u: u0 + 0.5 * upp * r * r, up: upp * r, v: 0.5 * vpp * r * r, vp: vpp * r }
}
