//! Newton potential `W = Φ_N * f` of a radial density.
//!
//! For radial `f`, Newton's theorem reduces the convolution to two radial
//! integrals split at the evaluation radius:
//!
//! ```text
//! N >= 3:  W(r) = [ r^(2-N) ∫_0^r f s^(N-1) ds + ∫_r^∞ f s ds ] / (N - 2)
//! N  = 2:  W(r) = -∫_0^∞ ln(max(r, s)) f(s) s ds
//! ```
//!
//! so that `-ΔW = f`. The canonical `V` solves `ΔV = |u|^p` instead, which
//! makes `V - V(0)` equal to `-(W - W(0))`.

use crate::error::{Error, Result};
use crate::integrate::{uniform_grid, Trajectory};
use crate::quadrature;

use super::{positive_range_end, CheckReport, CheckTolerances};

/// Absolute tolerance per integration segment.
pub const QUAD_TOL: f64 = 1e-12;

/// Largest allowed `f(R) / max f` for a density that is not compactly
/// supported on `[0, R]`.
pub const TAIL_RATIO: f64 = 1e-4;

/// A radial function known on `[0, outer_radius()]`.
pub trait RadialFunction: Sync {
    fn value(&self, r: f64) -> f64;

    fn outer_radius(&self) -> f64;

    /// Radii where the function is not smooth; quadrature splits there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Whether the function is exactly zero beyond `outer_radius()`. If not,
    /// it is treated as a truncated decaying tail.
    fn is_compact(&self) -> bool {
        false
    }
}

/// The amplitude `u(r)` of a trajectory.
impl RadialFunction for Trajectory {
    fn value(&self, r: f64) -> f64 {
        self.eval(r).or_else(|_| self.eval(r.clamp(self.r_start(), self.r_end()))).map_or(f64::NAN, |s| s.u)
    }

    fn outer_radius(&self) -> f64 {
        self.r_end()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.nodes().map(|s| s.r).collect()
    }
}

/// `|g|^p` for a radial function `g`.
pub struct PowerDensity<'a, G: RadialFunction + ?Sized> {
    pub base: &'a G,
    pub p: f64,
}

impl<G: RadialFunction + ?Sized> RadialFunction for PowerDensity<'_, G> {
    fn value(&self, r: f64) -> f64 {
        self.base.value(r).abs().powf(self.p)
    }

    fn outer_radius(&self) -> f64 {
        self.base.outer_radius()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.base.breakpoints()
    }

    fn is_compact(&self) -> bool {
        self.base.is_compact()
    }
}

/// A closure on `[0, outer]` that vanishes beyond `outer`.
pub struct RadialFn<F> {
    pub f: F,
    pub outer: f64,
    pub breakpoints: Vec<f64>,
}

impl<F: Fn(f64) -> f64 + Sync> RadialFunction for RadialFn<F> {
    fn value(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    fn outer_radius(&self) -> f64 {
        self.outer
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }

    fn is_compact(&self) -> bool {
        true
    }
}

/// Values on an increasing radial grid, interpolated by local degree-5
/// Lagrange polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    r: Vec<f64>,
    values: Vec<f64>,
}

const STENCIL: usize = 6;

impl SampledProfile {
    pub fn new(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if r.len() != values.len() || r.len() < STENCIL {
            return Err(Error::InvalidParams(format!(
                "profile needs at least {STENCIL} matching samples, got {} radii and {} values",
                r.len(),
                values.len()
            )));
        }
        if r[0] < 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams("profile radii must be nonnegative and strictly increasing".into()));
        }
        Ok(Self { r, values })
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl RadialFunction for SampledProfile {
    fn value(&self, x: f64) -> f64 {
        let n = self.r.len();
        let i = self.r.partition_point(|&t| t <= x);
        let first = i.saturating_sub(STENCIL / 2).min(n - STENCIL);
        let nodes = &self.r[first..first + STENCIL];
        let vals = &self.values[first..first + STENCIL];
        let mut sum = 0.0;
        for (j, (&xj, &yj)) in nodes.iter().zip(vals).enumerate() {
            if x == xj {
                return yj;
            }
            let w: f64 =
                nodes.iter().enumerate().filter(|&(m, _)| m != j).map(|(_, &xm)| (x - xm) / (xj - xm)).product();
            sum += w * yj;
        }
        sum
    }

    fn outer_radius(&self) -> f64 {
        *self.r.last().unwrap()
    }
}

/// Evaluates `Φ_N * f` at each radius in `r_eval`.
///
/// Beyond `outer_radius()` the density is taken as zero; for a density that
/// is not compact this is only allowed once it has fallen below
/// [`TAIL_RATIO`] of its peak.
pub fn newton_potential<F: RadialFunction + ?Sized>(density: &F, dim: u32, r_eval: &[f64]) -> Result<Vec<f64>> {
    if dim < 2 {
        return Err(Error::InvalidParams(format!("dimension must be at least 2, got {dim}")));
    }
    if let Some(&bad) = r_eval.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
        return Err(Error::Domain(format!("evaluation radius must be finite and nonnegative, got {bad}")));
    }
    let outer = density.outer_radius();
    let f = |s: f64| density.value(s);

    let mut knots: Vec<f64> = vec![0.0, outer];
    knots.extend(density.breakpoints().into_iter().filter(|&b| b > 0.0 && b < outer));
    knots.extend(r_eval.iter().map(|&r| r.min(outer)));
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    if !density.is_compact() {
        let probe = uniform_grid(0.0, outer, 2001);
        let peak = knots.iter().chain(&probe).fold(0.0f64, |m, &s| m.max(f(s).abs()));
        let tail = f(outer).abs();
        if peak > 0.0 && tail > TAIL_RATIO * peak {
            return Err(Error::NonConvergentTail { ratio: tail / peak });
        }
    }

    let n = f64::from(dim);
    let (inner, outer_w): (Box<dyn Fn(f64) -> f64 + Sync>, Box<dyn Fn(f64) -> f64 + Sync>) = if dim == 2 {
        (Box::new(move |s: f64| f(s) * s), Box::new(move |s: f64| if s > 0.0 { f(s) * s * s.ln() } else { 0.0 }))
    } else {
        (Box::new(move |s: f64| f(s) * s.powf(n - 1.0)), Box::new(move |s: f64| f(s) * s))
    };
    let inner_parts = quadrature::piecewise(&inner, &knots, QUAD_TOL)?;
    let outer_parts = quadrature::piecewise(&outer_w, &knots, QUAD_TOL)?;

    // Running integrals from the origin and to the outer radius, per knot.
    let mut from_origin = vec![0.0; knots.len()];
    for (i, v) in inner_parts.iter().enumerate() {
        from_origin[i + 1] = from_origin[i] + v;
    }
    let mut to_outer = vec![0.0; knots.len()];
    for i in (0..outer_parts.len()).rev() {
        to_outer[i] = to_outer[i + 1] + outer_parts[i];
    }

    Ok(r_eval
        .iter()
        .map(|&r| {
            let k = knots.partition_point(|&x| x < r.min(outer));
            let (i1, i2) = (from_origin[k], to_outer[k]);
            if dim == 2 {
                let log_term = if r > 0.0 { r.ln() * i1 } else { 0.0 };
                -(log_term + i2)
            } else {
                let near = if r > 0.0 { r.powf(2.0 - n) * i1 } else { 0.0 };
                (near + i2) / (n - 2.0)
            }
        })
        .collect())
}

/// Compares `V(r) - V(0)` along a positive trajectory with
/// `-(W(r) - W(0))` for `W = Φ_N * |u|^p` of the same trajectory.
pub fn potential_consistency(traj: &Trajectory, tol: &CheckTolerances) -> Result<CheckReport> {
    let b = positive_range_end(traj);
    let traj = traj.truncated(b)?;
    let density = PowerDensity { base: &traj, p: traj.params.p() };
    let r = uniform_grid(0.0, b, 400);
    let w = newton_potential(&density, traj.params.dim(), &r)?;
    let v0 = traj.eval(0.0)?.v;
    let wmax = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut worst = 0.0f64;
    let mut at = 0.0;
    for (&ri, &wi) in r.iter().zip(&w) {
        let gap = ((traj.eval(ri)?.v - v0) + (wi - w[0])).abs();
        if gap > worst {
            worst = gap;
            at = ri;
        }
    }
    let rel = if wmax > 0.0 { worst / wmax } else { worst };
    Ok(CheckReport::new(
        "potential_consistency",
        -rel,
        Some(at),
        tol.potential,
        format!("u0 = {} on [0, {b:.4}]: sup |ΔV + ΔW| = {worst:.3e}, max |W| = {wmax:.6}", traj.u0),
    ))
}
