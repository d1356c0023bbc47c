use crate::error::{Error, Result};
use crate::integrate::{uniform_grid, Trajectory};
use crate::model::OdeState;
use crate::shoot::decay_rate;

use super::{argmin, decreasing_range_end, positive_range_end, samples, CheckReport, CheckTolerances};

const SAMPLES: usize = 4000;
const FD_SPACING: f64 = 1e-3;

fn pair_ranges<'a>(t1: &'a Trajectory, t2: &'a Trajectory) -> Result<(&'a Trajectory, &'a Trajectory, f64, f64)> {
    if t1.params != t2.params {
        return Err(Error::RangeMismatch("trajectories use different parameters".into()));
    }
    let (lo, hi) = if t1.u0 <= t2.u0 { (t1, t2) } else { (t2, t1) };
    let a = lo.r_start().max(hi.r_start());
    let b = positive_range_end(lo).min(positive_range_end(hi));
    if !(b > a) {
        return Err(Error::RangeMismatch(format!("no common positive range (start {a}, end {b})")));
    }
    Ok((lo, hi, a, b))
}

fn paired_samples(lo: &Trajectory, hi: &Trajectory, a: f64, b: f64) -> Result<Vec<(OdeState, OdeState)>> {
    let mut r = uniform_grid(a, b, SAMPLES);
    r.extend(lo.nodes().chain(hi.nodes()).map(|s| s.r).filter(|&x| x > a && x < b));
    r.sort_by(f64::total_cmp);
    r.dedup();
    r.into_iter().map(|x| Ok((lo.eval(x)?, hi.eval(x)?))).collect()
}

/// Weighted Wronskian `ω r^(N-1)` with `ω = u_2' u_1 - u_1' u_2`, where
/// `u_2` is the trajectory with the larger height.
fn weighted_wronskian(lo: &OdeState, hi: &OdeState, dim: u32) -> f64 {
    (hi.up * lo.u - lo.up * hi.u) * lo.r.powi(dim as i32 - 1)
}

/// Two trajectories with `u_1(0) < u_2(0)` never cross on their common
/// positive range, and `ω r^(N-1)` is nondecreasing there.
pub fn wronskian_check(t1: &Trajectory, t2: &Trajectory, tol: &CheckTolerances) -> Result<CheckReport> {
    let (lo, hi, a, b) = pair_ranges(t1, t2)?;
    let name = "wronskian";
    if lo.u0 == hi.u0 {
        return Ok(CheckReport::new(name, 0.0, None, tol.wronskian, "identical heights; ordering skipped".into()));
    }
    let dim = lo.params.dim();
    let pairs = paired_samples(lo, hi, a, b)?;
    let w: Vec<f64> = pairs.iter().map(|(l, h)| weighted_wronskian(l, h, dim)).collect();
    let scale = w.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let (im, mono) = argmin(w.windows(2).map(|d| (d[1] - d[0]) / scale)).unwrap_or((0, 0.0));
    let (io, order) = argmin(pairs.iter().map(|(l, h)| (h.u - l.u) / hi.u0)).unwrap();
    let (worst, at) = if mono <= order { (mono, pairs[im + 1].0.r) } else { (order, pairs[io].0.r) };
    Ok(CheckReport::new(
        name,
        worst,
        Some(at),
        tol.wronskian,
        format!(
            "u0 = {} vs {} on [{a:.3e}, {b:.4}]: min step of ω r^(N-1) / max|·| = {mono:.3e}, min (u2 - u1)/u2(0) = {order:.3e}",
            lo.u0, hi.u0
        ),
    ))
}

/// `sup |ω r^(N-1)|` on the common positive range stays below the bound.
/// Pairs straddling the ground state closely keep it small; generic pairs
/// let it grow.
pub fn wronskian_bound_check(t1: &Trajectory, t2: &Trajectory, tol: &CheckTolerances) -> Result<CheckReport> {
    let (lo, hi, a, b) = pair_ranges(t1, t2)?;
    let dim = lo.params.dim();
    let pairs = paired_samples(lo, hi, a, b)?;
    let (i, neg) = argmin(pairs.iter().map(|(l, h)| -weighted_wronskian(l, h, dim).abs())).unwrap();
    let sup = -neg;
    Ok(CheckReport::new(
        "wronskian_bound",
        tol.wronskian_bound - sup,
        Some(pairs[i].0.r),
        0.0,
        format!("sup |ω r^(N-1)| = {sup:.3e} on [{a:.3e}, {b:.4}], bound {:.1e}", tol.wronskian_bound),
    ))
}

/// `V_2 > V_1` and `V_2' > V_1'` on the common positive range, margins taken
/// relative to the larger trajectory's maxima.
pub fn v_ordering_check(t1: &Trajectory, t2: &Trajectory, tol: &CheckTolerances) -> Result<CheckReport> {
    let (lo, hi, a, b) = pair_ranges(t1, t2)?;
    let pairs = paired_samples(lo, hi, a, b)?;
    let vmax = pairs.iter().fold(f64::MIN_POSITIVE, |m, (_, h)| m.max(h.v.abs()));
    let vpmax = pairs.iter().fold(f64::MIN_POSITIVE, |m, (_, h)| m.max(h.vp.abs()));
    let (iv, dv) = argmin(pairs.iter().map(|(l, h)| (h.v - l.v) / vmax)).unwrap();
    let (ip, dp) = argmin(pairs.iter().map(|(l, h)| (h.vp - l.vp) / vpmax)).unwrap();
    let (worst, at) = if dv <= dp { (dv, pairs[iv].0.r) } else { (dp, pairs[ip].0.r) };
    Ok(CheckReport::new(
        "v_ordering",
        worst,
        Some(at),
        tol.ordering,
        format!("u0 = {} vs {}: min (V2 - V1) = {dv:.3e}, min (V2' - V1') = {dp:.3e} (relative)", lo.u0, hi.u0),
    ))
}

/// For `u0 < 1/4`, `2u + V - 1/2` is nonincreasing and `V <= 2 u0` while
/// `u > 0`.
pub fn phi_check(traj: &Trajectory, tol: &CheckTolerances) -> Result<CheckReport> {
    if !(traj.u0 < 0.25) {
        return Err(Error::Precondition(format!("phi check needs u0 < 1/4, got {}", traj.u0)));
    }
    let b = positive_range_end(traj);
    let s = samples(traj, traj.r_start(), b, SAMPLES)?;
    let phi: Vec<f64> = s.iter().map(|x| 2.0 * x.u + x.v - 0.5).collect();
    let (im, mono) = argmin(phi.windows(2).map(|d| d[0] - d[1])).unwrap_or((0, 0.0));
    let (ib, bound) = argmin(s.iter().map(|x| 2.0 * traj.u0 - x.v)).unwrap();
    let (worst, at) = if mono <= bound { (mono, s[im + 1].r) } else { (bound, s[ib].r) };
    Ok(CheckReport::new(
        "phi",
        worst,
        Some(at),
        tol.phi,
        format!("u0 = {} on [0, {b:.4}]: min decrease of φ = {mono:.3e}, min (2u0 - V) = {bound:.3e}", traj.u0),
    ))
}

/// For large `u0`, `u + λ0 V - λ0` with `λ0 = u0^((2-p)/2)` is nondecreasing
/// while `u` decreases, and `u > u0 - λ0 V` there. Margins are relative to
/// `u0`.
pub fn phi2_check(traj: &Trajectory, tol: &CheckTolerances) -> Result<CheckReport> {
    let u0 = traj.u0;
    let p = traj.params.p();
    let n = f64::from(traj.params.dim());
    let lambda0 = u0.powf((2.0 - p) / 2.0);
    let phi0 = u0 - lambda0;
    if !(phi0 > 0.0) {
        return Err(Error::Precondition(format!(
            "phi2(0) = u0 - λ0 = {phi0:e} is not positive (u0 = {u0}, λ0 = {lambda0})"
        )));
    }
    let curv = (-u0 + lambda0 * u0.powf(p)) / n;
    if !(curv > 0.0) {
        return Err(Error::Precondition(format!("phi2''(0) = {curv:e} is not positive (u0 = {u0})")));
    }
    let b = decreasing_range_end(traj);
    let s = samples(traj, traj.r_start(), b, SAMPLES)?;
    let phi2: Vec<f64> = s.iter().map(|x| x.u + lambda0 * x.v - lambda0).collect();
    let (im, mono) = argmin(phi2.windows(2).map(|d| (d[1] - d[0]) / u0)).unwrap_or((0, 0.0));
    let (il, lower) = argmin(s.iter().map(|x| (x.u - (u0 - lambda0 * x.v)) / u0)).unwrap();
    let (worst, at) = if mono <= lower { (mono, s[im + 1].r) } else { (lower, s[il].r) };
    Ok(CheckReport::new(
        "phi2",
        worst,
        Some(at),
        tol.phi2,
        format!("u0 = {u0}, λ0 = {lambda0:.6} on [0, {b:.4}]: min rise of φ2 = {mono:.3e}, min u - (u0 - λ0 V) = {lower:.3e}"),
    ))
}

/// `u^p r^2 / (2N) <= V <= u0^p r^2 / (2N)` while `u` decreases.
pub fn v_sandwich_check(traj: &Trajectory, tol: &CheckTolerances) -> Result<CheckReport> {
    let p = traj.params.p();
    let two_n = 2.0 * f64::from(traj.params.dim());
    let top = traj.u0.powf(p) / two_n;
    let b = decreasing_range_end(traj);
    let s = samples(traj, traj.r_start(), b, SAMPLES)?;
    let (il, lower) = argmin(s.iter().map(|x| x.v - x.u.abs().powf(p) * x.r * x.r / two_n)).unwrap();
    let (iu, upper) = argmin(s.iter().map(|x| top * x.r * x.r - x.v)).unwrap();
    let (worst, at) = if lower <= upper { (lower, s[il].r) } else { (upper, s[iu].r) };
    Ok(CheckReport::new(
        "v_sandwich",
        worst,
        Some(at),
        tol.sandwich,
        format!("u0 = {} on [0, {b:.4}]: lower margin {lower:.3e}, upper margin {upper:.3e}", traj.u0),
    ))
}

/// `u(r) > u0 (1 - r^2 / r0^2)` with `r0 = sqrt(2N / u0^(p/2))`, up to the
/// smaller of `r0` and the end of the decreasing range.
pub fn barrier_check(traj: &Trajectory, tol: &CheckTolerances) -> Result<CheckReport> {
    let u0 = traj.u0;
    let n = f64::from(traj.params.dim());
    let r0 = (2.0 * n / u0.powf(traj.params.p() / 2.0)).sqrt();
    let b = decreasing_range_end(traj).min(r0);
    let s = samples(traj, traj.r_start(), b, SAMPLES)?;
    let (i, worst) = argmin(s.iter().map(|x| x.u - u0 * (1.0 - x.r * x.r / (r0 * r0)))).unwrap();
    Ok(CheckReport::new(
        "barrier",
        worst,
        Some(s[i].r),
        tol.barrier,
        format!("u0 = {u0}, r0 = {r0:.6} on [0, {b:.6}]: min u - u0(1 - r²/r0²) = {worst:.3e}"),
    ))
}

/// Residual of `z' = z^2 - (N-1) z / r + 1 - V` for `z = -u'/u`, with `z'`
/// from fourth-order central differences of the sampled `z`.
///
/// Radii where `u` is below `10 atol` are excluded.
pub fn z_dynamics_check(traj: &Trajectory, tol: &CheckTolerances) -> Result<CheckReport> {
    let floor = 10.0 * traj.controls.atol;
    let damping = traj.params.damping();
    let mut b = traj.r_start();
    for s in traj.nodes() {
        if s.u <= floor {
            break;
        }
        b = s.r;
    }
    let a = traj.r_start();
    let n = ((b - a) / FD_SPACING).floor() as usize + 1;
    if n < 5 {
        return Err(Error::InsufficientTail(format!("range [{a}, {b}] too short for the z residual")));
    }
    let h = (b - a) / (n - 1) as f64;
    let s: Vec<OdeState> = uniform_grid(a, b, n).into_iter().map(|r| traj.eval(r)).collect::<Result<_>>()?;
    let z: Vec<f64> = s.iter().map(|x| -x.up / x.u).collect();
    let (i, neg) = argmin((2..n - 2).map(|i| {
        let dz = (z[i - 2] - 8.0 * z[i - 1] + 8.0 * z[i + 1] - z[i + 2]) / (12.0 * h);
        let x = &s[i];
        let rhs = z[i] * z[i] - damping * z[i] / x.r + 1.0 - x.v;
        -(dz - rhs).abs()
    }))
    .unwrap();
    Ok(CheckReport::new(
        "z_dynamics",
        neg,
        Some(s[i + 2].r),
        tol.z_residual,
        format!("u0 = {} on [{a:.3e}, {b:.4}], h = {h:.2e}: sup residual {:.3e}", traj.u0, -neg),
    ))
}

/// Extrapolated `z(∞)^2` against `V_inf - 1`, relative.
pub fn z_limit_check(traj: &Trajectory, v_inf: f64, tol: &CheckTolerances) -> Result<CheckReport> {
    if !(v_inf.is_finite() && v_inf > 1.0) {
        return Err(Error::Precondition(format!("z limit needs a finite V_inf > 1, got {v_inf}")));
    }
    let fit = decay_rate(traj)?;
    let target = v_inf - 1.0;
    let gap = (fit.z_limit * fit.z_limit - target).abs() / target;
    Ok(CheckReport::new(
        "z_limit",
        -gap,
        Some(fit.r_window.1),
        tol.z_limit,
        format!(
            "z(∞) = {:.6} from [{:.3}, {:.3}] (z(R) = {:.6}); V_inf - 1 = {target:.6}; relative gap {gap:.3e}",
            fit.z_limit, fit.r_window.0, fit.r_window.1, fit.z_final
        ),
    ))
}
