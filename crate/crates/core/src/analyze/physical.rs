//! Back to the physical equation `-Δu + λu = γ (Φ_N * |u|^p) u`.
//!
//! With `u_λ(r) = u(σr)/A` and `V_λ(r) = V(σr)/B + V_λ(0)`, the canonical
//! system is recovered when
//!
//! ```text
//! B = γ/σ²,  A = (B/σ²)^(1/p),  σ² = -λ - γ V_λ(0),
//! ```
//!
//! and `V_λ = -Φ_N * |u_λ|^p` is the (negative) Newton potential. Asking
//! `V_λ` to vanish at infinity fixes `V_λ(0) = -V_inf/B`, which together
//! with the last relation gives `σ² = λ/(V_inf - 1)`. This needs a finite
//! `V_inf`, so only `N >= 3` is supported.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::shoot::GroundState;

use super::potential::{newton_potential, PowerDensity, SampledProfile};
use super::{CheckReport, CheckTolerances};

/// Canonical grid spacing of emitted physical profiles.
pub const CANONICAL_SPACING: f64 = 1e-3;

/// Smallest `V_inf - 1` accepted for the normalization.
pub const MIN_VINF_EXCESS: f64 = 1e-12;

/// Minimum number of grid points in the residual window.
pub const MIN_WINDOW_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalScaling {
    pub lambda: f64,
    pub gamma: f64,
    pub p: f64,
    pub v_inf: f64,
    pub sigma: f64,
    pub a_scale: f64,
    pub b_scale: f64,
    pub v_lambda_0: f64,
}

impl PhysicalScaling {
    pub fn new(v_inf: f64, lambda: f64, gamma: f64, p: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParams(format!("lambda and gamma must be positive, got {lambda}, {gamma}")));
        }
        if !(v_inf.is_finite() && v_inf - 1.0 > MIN_VINF_EXCESS) {
            return Err(Error::Precondition(format!(
                "V_inf = {v_inf} does not exceed 1; the physical potential cannot vanish at infinity"
            )));
        }
        let sigma2 = lambda / (v_inf - 1.0);
        let b_scale = gamma / sigma2;
        let a_scale = (b_scale / sigma2).powf(1.0 / p);
        Ok(Self { lambda, gamma, p, v_inf, sigma: sigma2.sqrt(), a_scale, b_scale, v_lambda_0: -v_inf / b_scale })
    }

    /// `|σ² + λ + γ V_λ(0)| / σ²`, zero up to round-off.
    pub fn identity_residual(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        (s2 + self.lambda + self.gamma * self.v_lambda_0).abs() / s2
    }
}

/// `u_λ` and `V_λ` on a uniform physical grid starting at the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicalProfile {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// Canonical values recovered from a physical profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalSamples {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn to_physical(ground: &GroundState, lambda: f64, gamma: f64) -> Result<(PhysicalScaling, PhysicalProfile)> {
    if ground.params.dim() == 2 {
        return Err(Error::Unsupported(
            "N=2 transform unsupported: the logarithmic potential has no vanishing normalization at infinity".into(),
        ));
    }
    let v_inf = ground.v_inf().ok_or_else(|| {
        Error::Precondition(format!(
            "ground state has no V_inf estimate: {}",
            ground.tail_note.as_deref().unwrap_or("-")
        ))
    })?;
    let scaling = PhysicalScaling::new(v_inf, lambda, gamma, ground.params.p())?;
    let traj = &ground.trajectory;
    let n = (traj.r_end() / CANONICAL_SPACING).floor() as usize + 1;
    let mut profile = PhysicalProfile { r: Vec::with_capacity(n), u: Vec::with_capacity(n), v: Vec::with_capacity(n) };
    for i in 0..n {
        let rho = i as f64 * CANONICAL_SPACING;
        let s = traj.eval(rho)?;
        profile.r.push(rho / scaling.sigma);
        profile.u.push(s.u / scaling.a_scale);
        profile.v.push(s.v / scaling.b_scale + scaling.v_lambda_0);
    }
    Ok((scaling, profile))
}

pub fn to_canonical(profile: &PhysicalProfile, scaling: &PhysicalScaling) -> CanonicalSamples {
    CanonicalSamples {
        rho: profile.r.iter().map(|r| r * scaling.sigma).collect(),
        u: profile.u.iter().map(|u| u * scaling.a_scale).collect(),
        v: profile.v.iter().map(|v| (v - scaling.v_lambda_0) * scaling.b_scale).collect(),
    }
}

/// Relative sup-norm residual of `-Δu + λu - γ (Φ_N * |u|^p) u` on the
/// inner 90% of the grid, normalized by `sup |λu|` there.
///
/// `Δu` uses fourth-order central differences, reflected evenly through the
/// origin; the grid must be uniform and start at `r = 0`.
pub fn pde_residual(profile: &PhysicalProfile, lambda: f64, gamma: f64, params: SystemParams) -> Result<f64> {
    if params.dim() < 3 {
        return Err(Error::Unsupported("PDE residual needs N >= 3".into()));
    }
    let (r, u) = (&profile.r, &profile.u);
    if r.len() != u.len() || r.len() < 5 {
        return Err(Error::GridTooCoarse { points: r.len(), required: MIN_WINDOW_POINTS });
    }
    let h = r[1] - r[0];
    if r[0] != 0.0 || !(h > 0.0) || r.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::Precondition("profile grid must be uniform and start at r = 0".into()));
    }
    let r_cut = 0.9 * r[r.len() - 1];
    let m = r.partition_point(|&x| x <= r_cut).min(r.len() - 2);
    if m < MIN_WINDOW_POINTS {
        return Err(Error::GridTooCoarse { points: m, required: MIN_WINDOW_POINTS });
    }

    let sampled = SampledProfile::new(r.clone(), u.clone())?;
    let density = PowerDensity { base: &sampled, p: params.p() };
    let w = newton_potential(&density, params.dim(), &r[..m])?;

    let lap = radial_laplacian(u, h, f64::from(params.dim()), m);
    let mut sup_res = 0.0f64;
    let mut sup_lu = 0.0f64;
    for i in 0..m {
        let res = -lap[i] + lambda * u[i] - gamma * w[i] * u[i];
        sup_res = sup_res.max(res.abs());
        sup_lu = sup_lu.max((lambda * u[i]).abs());
    }
    Ok(if sup_lu > 0.0 { sup_res / sup_lu } else { sup_res })
}

/// `u'' + (N-1) u'/r` at the first `m` points of a uniform grid from the
/// origin, by fourth-order central differences with `u` reflected evenly.
/// Needs `m + 2 <= u.len()`.
pub(crate) fn radial_laplacian(u: &[f64], h: f64, n: f64, m: usize) -> Vec<f64> {
    let at = |i: isize| u[i.unsigned_abs()];
    (0..m)
        .map(|i| {
            let k = i as isize;
            let d2 = (-at(k - 2) + 16.0 * at(k - 1) - 30.0 * at(k) + 16.0 * at(k + 1) - at(k + 2)) / (12.0 * h * h);
            if i == 0 {
                n * d2
            } else {
                let d1 = (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) / (12.0 * h);
                d2 + (n - 1.0) * d1 / (i as f64 * h)
            }
        })
        .collect()
}

/// Physical profiles for several `(λ, γ)` mapped back to canonical variables
/// agree with the ground-state trajectory, relative to `u0` and `max V`.
pub fn round_trip_check(ground: &GroundState, pairs: &[(f64, f64)], tol: &CheckTolerances) -> Result<CheckReport> {
    let traj = &ground.trajectory;
    let mut worst = 0.0f64;
    let mut at = None;
    for &(lambda, gamma) in pairs {
        let (scaling, profile) = to_physical(ground, lambda, gamma)?;
        let back = to_canonical(&profile, &scaling);
        let vmax = back.v.iter().fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
        for (i, &rho) in back.rho.iter().enumerate() {
            let s = traj.eval((i as f64 * CANONICAL_SPACING).min(traj.r_end()))?;
            let gap = ((back.u[i] - s.u).abs() / ground.u0_star).max((back.v[i] - s.v).abs() / vmax);
            if gap > worst {
                worst = gap;
                at = Some(rho);
            }
        }
    }
    Ok(CheckReport::new(
        "round_trip",
        -worst,
        at,
        tol.round_trip,
        format!("{} (λ, γ) pairs: max relative gap {worst:.3e}", pairs.len()),
    ))
}
