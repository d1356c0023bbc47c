//! Shooting for the ground-state height.
//!
//! Heights below the ground state fall through zero (`InN`), heights above
//! it turn upward while still positive (`InP`), and the boundary between the
//! two open sets is a single point. Bisection on the verdict closes in on it.
//! Once the bracket is tight, the `InN`-side trajectory follows the ground
//! state far enough out to read off the limit of `V` and the exponential
//! decay rate of `u`.

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{classify, Classification, RMaxPolicy, Verdict};
use crate::error::{Error, Result};
use crate::integrate::{uniform_grid, StepControls, Trajectory};
use crate::linalg::least_squares;
use crate::model::SystemParams;

/// `u(R) / u0` must be below this before tail quantities are estimated.
pub const TAIL_DECAY_RATIO: f64 = 1e-4;

/// Relative gap between the two bracket trajectories beyond which the
/// `InN` side is no longer taken as a proxy for the ground state.
pub const DEFAULT_TRACKING_TOL: f64 = 1e-3;

const MIN_TAIL_SAMPLES: usize = 50;
const TAIL_SAMPLES: usize = 400;

/// Two heights with opposite verdicts.
#[derive(Debug, Clone)]
pub struct Bracket {
    pub lo: Classification,
    pub hi: Classification,
}

impl Bracket {
    pub fn new(lo: Classification, hi: Classification) -> Result<Self> {
        if lo.tag != Verdict::InN {
            return Err(Error::InvalidBracket(format!("lower end u0 = {} is {}, not InN", lo.u0, lo.tag)));
        }
        if hi.tag != Verdict::InP {
            return Err(Error::InvalidBracket(format!("upper end u0 = {} is {}, not InP", hi.u0, hi.tag)));
        }
        if !(0.0 < lo.u0 && lo.u0 < hi.u0) {
            return Err(Error::InvalidBracket(format!("need 0 < lo < hi, got lo = {}, hi = {}", lo.u0, hi.u0)));
        }
        if lo.trajectory.params != hi.trajectory.params {
            return Err(Error::InvalidBracket("ends were classified with different parameters".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo.u0
    }

    pub fn hi(&self) -> f64 {
        self.hi.u0
    }

    pub fn width(&self) -> f64 {
        self.hi.u0 - self.lo.u0
    }
}

/// Where [`find_bracket_with`] starts looking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketSearch {
    pub lo: f64,
    pub hi_start: f64,
    pub hi_cap: f64,
}

impl Default for BracketSearch {
    fn default() -> Self {
        Self { lo: 0.2, hi_start: 1.0, hi_cap: 1e6 }
    }
}

pub fn find_bracket(params: SystemParams, controls: StepControls) -> Result<Bracket> {
    find_bracket_with(params, controls, RMaxPolicy::default(), BracketSearch::default())
}

/// Checks `search.lo` is `InN`, then doubles from `search.hi_start` until an
/// `InP` verdict appears.
pub fn find_bracket_with(
    params: SystemParams,
    controls: StepControls,
    policy: RMaxPolicy,
    search: BracketSearch,
) -> Result<Bracket> {
    let lo = classify(search.lo, params, controls, policy)?;
    if lo.tag != Verdict::InN {
        return Err(Error::InvalidBracket(format!("lower end u0 = {} is {}, not InN", search.lo, lo.tag)));
    }
    let mut u0 = search.hi_start.max(search.lo * 2.0);
    while u0 <= search.hi_cap {
        let c = classify(u0, params, controls, policy)?;
        match c.tag {
            Verdict::InP => return Bracket::new(lo, c),
            Verdict::InN => u0 *= 2.0,
            Verdict::Undetermined => {
                return Err(Error::Undetermined { u0, r_max: c.r_explored, note: c.note.unwrap_or_default() })
            }
        }
    }
    Err(Error::BracketNotFound { cap: search.hi_cap })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BisectOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub policy: RMaxPolicy,
    pub tracking_tol: f64,
}

impl Default for BisectOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200, policy: RMaxPolicy::default(), tracking_tol: DEFAULT_TRACKING_TOL }
    }
}

/// Limit of `V` along a ground-state trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FarField {
    /// `N >= 3`: `V(r) -> v_inf` with `V' r^(N-1) -> mass`.
    Finite { v_inf: f64, mass: f64 },
    /// `N = 2`: `V(r) ~ v_ref + mass ln(r / r_ref)` grows without bound.
    Logarithmic { mass: f64, r_ref: f64, v_ref: f64 },
}

impl FarField {
    pub fn v_inf(&self) -> f64 {
        match self {
            FarField::Finite { v_inf, .. } => *v_inf,
            FarField::Logarithmic { .. } => f64::INFINITY,
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            FarField::Finite { mass, .. } | FarField::Logarithmic { mass, .. } => *mass,
        }
    }
}

/// Exponential decay of the tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Coefficient of `r` in the least-squares model of `-ln u`.
    pub k: f64,
    /// `-u'/u` at the last sample of the window.
    pub z_final: f64,
    /// Limit of `-u'/u` extrapolated in `1/r` over the window.
    pub z_limit: f64,
    pub r_window: (f64, f64),
    pub samples: usize,
}

fn check_tail(traj: &Trajectory) -> Result<()> {
    let end = traj.end();
    let ratio = end.u / traj.u0;
    if !(end.u > 0.0 && ratio < TAIL_DECAY_RATIO) {
        return Err(Error::TailNotDecayed { ratio, radius: end.r });
    }
    Ok(())
}

/// Far-field limit of `V` from the end of a decayed trajectory.
///
/// Once `u` is negligible, `V' r^(N-1)` is a constant `M`, so for `N >= 3`
/// the remaining rise is `M R^(2-N) / (N-2)`. For `N = 2` it is `M ln(r/R)`.
pub fn estimate_vinf(traj: &Trajectory, params: SystemParams) -> Result<FarField> {
    check_tail(traj)?;
    let end = traj.end();
    let n = f64::from(params.dim());
    let mass = end.vp * end.r.powf(n - 1.0);
    if params.dim() == 2 {
        return Ok(FarField::Logarithmic { mass, r_ref: end.r, v_ref: end.v });
    }
    Ok(FarField::Finite { v_inf: end.v + mass * end.r.powf(2.0 - n) / (n - 2.0), mass })
}

/// Fits the decay rate of `u` over the outer half of the explored range.
///
/// `-ln u` is regressed on `r`, `ln r`, `1/r` and a constant; the extra terms
/// soak up the algebraic prefactor and the slow approach of `V` to its
/// limit, which a bare slope would fold into the rate. The window has to
/// cover at least a decade of decay in `u`.
pub fn decay_rate(traj: &Trajectory) -> Result<DecayFit> {
    check_tail(traj)?;
    let r_end = traj.r_end();
    let floor = 10.0 * traj.controls.atol;
    let samples: Vec<_> =
        traj.sample(0.5 * r_end, r_end, TAIL_SAMPLES)?.into_iter().filter(|s| s.u > floor && s.r > 0.0).collect();
    if samples.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientTail(format!(
            "{} samples above the noise floor, need {MIN_TAIL_SAMPLES}",
            samples.len()
        )));
    }
    let first = samples.first().unwrap();
    let last = samples.last().unwrap();
    if !(first.u >= 10.0 * last.u) {
        return Err(Error::InsufficientTail(format!(
            "u only falls from {:e} to {:e} across [{}, {}], less than a decade",
            first.u, last.u, first.r, last.r
        )));
    }

    let scale = last.r;
    let t: Vec<f64> = samples.iter().map(|s| s.r / scale).collect();
    let y: Vec<f64> = samples.iter().map(|s| -s.u.ln()).collect();
    let cols =
        vec![t.clone(), t.iter().map(|t| t.ln()).collect(), t.iter().map(|t| 1.0 / t).collect(), vec![1.0; t.len()]];
    let coef = least_squares(&cols, &y).ok_or_else(|| Error::InsufficientTail("degenerate decay fit".into()))?;
    let k = coef[0] / scale;

    let z: Vec<f64> = samples.iter().map(|s| -s.up / s.u).collect();
    let zcols =
        vec![vec![1.0; t.len()], t.iter().map(|t| 1.0 / t).collect(), t.iter().map(|t| 1.0 / (t * t)).collect()];
    let zc = least_squares(&zcols, &z).ok_or_else(|| Error::InsufficientTail("degenerate z fit".into()))?;

    Ok(DecayFit { k, z_final: *z.last().unwrap(), z_limit: zc[0], r_window: (first.r, last.r), samples: samples.len() })
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub params: SystemParams,
    pub u0_star: f64,
    pub bracket_width: f64,
    /// Final bracket ends with their verdicts.
    pub lo: Classification,
    pub hi: Classification,
    pub iterations: usize,
    /// `InN`-side trajectory cut where it stops tracking the `InP` side.
    pub trajectory: Trajectory,
    pub tracking_radius: f64,
    pub far_field: Option<FarField>,
    pub decay: Option<DecayFit>,
    /// Why the tail quantities are missing, if they are.
    pub tail_note: Option<String>,
}

impl GroundState {
    pub fn v_inf(&self) -> Option<f64> {
        self.far_field.map(|f| f.v_inf())
    }

    pub fn decay_k(&self) -> Option<f64> {
        self.decay.map(|d| d.k)
    }

    pub fn summary(&self) -> GroundStateSummary {
        GroundStateSummary {
            dim: self.params.dim(),
            p: self.params.p(),
            u0_star: self.u0_star,
            bracket_lo: self.lo.u0,
            bracket_hi: self.hi.u0,
            bracket_width: self.bracket_width,
            iterations: self.iterations,
            lo_event_radius: self.lo.r_event,
            tracking_radius: self.tracking_radius,
            v_inf: self.v_inf().filter(|v| v.is_finite()),
            far_field: self.far_field,
            decay_k: self.decay_k(),
            decay: self.decay,
            tail_note: self.tail_note.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundStateSummary {
    pub dim: u32,
    pub p: f64,
    pub u0_star: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub bracket_width: f64,
    pub iterations: usize,
    pub lo_event_radius: Option<f64>,
    pub tracking_radius: f64,
    /// `None` when the limit is infinite (`N = 2`) or was not estimated.
    pub v_inf: Option<f64>,
    pub far_field: Option<FarField>,
    pub decay_k: Option<f64>,
    pub decay: Option<DecayFit>,
    pub tail_note: Option<String>,
}

pub fn bisect(bracket: Bracket, params: SystemParams, controls: StepControls, tol: f64) -> Result<GroundState> {
    bisect_with(bracket, params, controls, BisectOptions { tol, ..Default::default() })
}

pub fn bisect_with(
    bracket: Bracket,
    params: SystemParams,
    controls: StepControls,
    opts: BisectOptions,
) -> Result<GroundState> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParams(format!("bisection tolerance must be positive, got {}", opts.tol)));
    }
    if bracket.lo.trajectory.params != params {
        return Err(Error::InvalidBracket("bracket was built for different parameters".into()));
    }
    let Bracket { mut lo, mut hi } = bracket;
    let mut iterations = 0;
    while hi.u0 - lo.u0 > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::BisectionCap { iterations, width: hi.u0 - lo.u0 });
        }
        let mid = 0.5 * (lo.u0 + hi.u0);
        if mid <= lo.u0 || mid >= hi.u0 {
            break;
        }
        let c = classify(mid, params, controls, opts.policy)?;
        iterations += 1;
        match c.tag {
            Verdict::InN => lo = c,
            Verdict::InP => hi = c,
            Verdict::Undetermined => {
                return Err(Error::Undetermined { u0: mid, r_max: c.r_explored, note: c.note.unwrap_or_default() });
            }
        }
    }

    let tracking_radius = tracking_radius(&lo.trajectory, &hi.trajectory, opts.tracking_tol)?;
    let trajectory = lo.trajectory.truncated(tracking_radius)?;
    let (far_field, decay, tail_note) = match (estimate_vinf(&trajectory, params), decay_rate(&trajectory)) {
        (Ok(f), Ok(d)) => (Some(f), Some(d), None),
        (Ok(f), Err(e)) => (Some(f), None, Some(e.to_string())),
        (Err(e), _) => (None, None, Some(e.to_string())),
    };
    Ok(GroundState {
        params,
        u0_star: 0.5 * (lo.u0 + hi.u0),
        bracket_width: hi.u0 - lo.u0,
        lo,
        hi,
        iterations,
        trajectory,
        tracking_radius,
        far_field,
        decay,
        tail_note,
    })
}

/// Largest radius up to which the two sides of the bracket agree to
/// `rel_tol` and the lower side is still positive and decreasing. Capped at
/// 99% of the lower side's event radius.
pub fn tracking_radius(lo: &Trajectory, hi: &Trajectory, rel_tol: f64) -> Result<f64> {
    let r0 = lo.r_start().max(hi.r_start());
    let r1 = lo.r_end().min(hi.r_end());
    let cap = r0 + 0.99 * (lo.r_end() - r0);
    let n = (((r1 - r0) / 1e-3).ceil() as usize).clamp(2, 200_000);
    let mut last_good = r0;
    for r in uniform_grid(r0, r1.min(cap), n) {
        let a = lo.eval(r)?;
        let b = hi.eval(r)?;
        if a.u <= 0.0 || a.up >= 0.0 || (b.u - a.u).abs() > rel_tol * a.u {
            break;
        }
        last_good = r;
    }
    Ok(last_good)
}

pub fn sweep(u0_values: &[f64], params: SystemParams, controls: StepControls) -> Vec<Result<Classification>> {
    sweep_with(u0_values, params, controls, RMaxPolicy::default())
}

/// Classifies every height independently, in parallel, keeping input order.
pub fn sweep_with(
    u0_values: &[f64],
    params: SystemParams,
    controls: StepControls,
    policy: RMaxPolicy,
) -> Vec<Result<Classification>> {
    u0_values.par_iter().map(|&u0| classify(u0, params, controls, policy)).collect()
}
