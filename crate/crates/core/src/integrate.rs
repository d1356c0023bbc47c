//! Adaptive Dormand–Prince 5(4) integration with dense output and event
//! location.
//!
//! Every accepted step keeps the coefficients of the method's free
//! fourth-order continuous extension, so a [`Trajectory`] can be evaluated at
//! any radius it covers. Events are located by bisection on that interpolant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{self, OdeState, SystemParams};

/// Default tolerance on the event function value at a located root.
pub const DEFAULT_EVENT_TOL: f64 = 1e-12;

const MAX_NONFINITE_RETRIES: usize = 60;

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepControls {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepControls {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: 1e-4, h_max: 0.1, max_steps: 1_000_000 }
    }
}

impl StepControls {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.atol > 0.0
            && self.h_init > 0.0
            && self.h_init <= self.h_max
            && self.h_max.is_finite()
            && self.max_steps >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("invalid step controls: {self:?}")))
        }
    }

    /// Both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self { rtol: self.rtol / factor, atol: self.atol / factor, ..*self }
    }
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub r_from: f64,
    pub r_to: f64,
    pub state_from: OdeState,
    pub state_to: OdeState,
    /// Power-basis coefficients in `theta = (r - r_from) / (r_to - r_from)`.
    coeffs: [[f64; 4]; 5],
}

impl StepRecord {
    pub fn width(&self) -> f64 {
        self.r_to - self.r_from
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_from && r <= self.r_to
    }

    fn eval_unchecked(&self, r: f64) -> OdeState {
        if r == self.r_from {
            return self.state_from;
        }
        if r == self.r_to {
            return self.state_to;
        }
        let theta = (r - self.r_from) / self.width();
        let c = &self.coeffs;
        let mut y = [0.0; 4];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = c[0][i] + theta * (c[1][i] + theta * (c[2][i] + theta * (c[3][i] + theta * c[4][i])));
        }
        OdeState::from_vector(r, y)
    }

    /// The same step cut off at `r`, with the interpolant re-expressed on the
    /// shorter interval.
    fn truncated(&self, r: f64) -> StepRecord {
        let s = (r - self.r_from) / self.width();
        let mut coeffs = self.coeffs;
        let mut scale = 1.0;
        for row in coeffs.iter_mut() {
            for x in row.iter_mut() {
                *x *= scale;
            }
            scale *= s;
        }
        StepRecord {
            r_from: self.r_from,
            r_to: r,
            state_from: self.state_from,
            state_to: self.eval_unchecked(r),
            coeffs,
        }
    }
}

/// Evaluates the step's interpolant at `r`.
pub fn dense_eval(step: &StepRecord, r: f64) -> Result<OdeState> {
    if !step.contains(r) {
        return Err(Error::Domain(format!("r = {r} lies outside the step [{}, {}]", step.r_from, step.r_to)));
    }
    Ok(step.eval_unchecked(r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Negative to non-negative.
    Rising,
    /// Positive to non-positive.
    Falling,
    Either,
}

/// A scalar function of the state whose sign change terminates integration.
#[derive(Debug, Clone, Copy)]
pub struct EventSpec {
    pub name: &'static str,
    pub function: fn(&OdeState) -> f64,
    pub direction: Direction,
    /// Optional condition that must hold at the located root.
    pub guard: Option<fn(&OdeState) -> bool>,
    pub tol: f64,
}

impl EventSpec {
    pub fn new(name: &'static str, function: fn(&OdeState) -> f64, direction: Direction) -> Self {
        Self { name, function, direction, guard: None, tol: DEFAULT_EVENT_TOL }
    }

    pub fn with_guard(mut self, guard: fn(&OdeState) -> bool) -> Self {
        self.guard = Some(guard);
        self
    }

    fn crosses(&self, g0: f64, g1: f64) -> bool {
        match self.direction {
            Direction::Falling => g0 > 0.0 && g1 <= 0.0,
            Direction::Rising => g0 < 0.0 && g1 >= 0.0,
            Direction::Either => (g0 > 0.0 && g1 <= 0.0) || (g0 < 0.0 && g1 >= 0.0),
        }
    }
}

/// Finds where `event` crosses zero inside `step`, or `None` if its sign does
/// not change across the step in the requested direction.
pub fn locate_event(step: &StepRecord, event: &EventSpec) -> Option<f64> {
    let g = event.function;
    let g0 = g(&step.state_from);
    let g1 = g(&step.state_to);
    if !event.crosses(g0, g1) {
        return None;
    }
    if g1.abs() <= event.tol && g1 == 0.0 {
        return Some(step.r_to);
    }
    let before = g0 > 0.0;
    let (mut lo, mut hi) = (step.r_from, step.r_to);
    let (mut best_r, mut best_g) = if g0.abs() < g1.abs() { (lo, g0.abs()) } else { (hi, g1.abs()) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(&step.eval_unchecked(mid));
        if gm.abs() < best_g {
            best_r = mid;
            best_g = gm.abs();
        }
        if gm.abs() <= event.tol {
            return Some(mid);
        }
        if (gm > 0.0) == before {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(best_r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    Event {
        index: usize,
        name: String,
        r: f64,
    },
    RMaxReached,
    BudgetExhausted,
    NonFinite {
        r: f64,
    },
    /// Cut short after the fact by [`Trajectory::truncated`].
    Truncated {
        r: f64,
    },
}

/// A solution curve of the canonical system with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: SystemParams,
    pub u0: f64,
    pub controls: StepControls,
    pub steps: Vec<StepRecord>,
    pub stop: StopReason,
    start: OdeState,
    from_origin: bool,
}

impl Trajectory {
    pub fn start(&self) -> &OdeState {
        &self.start
    }

    pub fn r_start(&self) -> f64 {
        self.start.r
    }

    pub fn end(&self) -> &OdeState {
        self.steps.last().map_or(&self.start, |s| &s.state_to)
    }

    pub fn r_end(&self) -> f64 {
        self.end().r
    }

    /// State at `r`. Radii below the start radius are served by the Taylor
    /// expansion when the trajectory was launched from the origin.
    pub fn eval(&self, r: f64) -> Result<OdeState> {
        if r < self.start.r {
            if self.from_origin && r >= 0.0 {
                return Ok(model::series_state(self.u0, &self.params, r));
            }
            return Err(Error::Domain(format!("r = {r} precedes the trajectory start {}", self.start.r)));
        }
        if r > self.r_end() {
            return Err(Error::Domain(format!("r = {r} exceeds the explored radius {}", self.r_end())));
        }
        if self.steps.is_empty() {
            return Ok(self.start);
        }
        let i = self.steps.partition_point(|s| s.r_to < r).min(self.steps.len() - 1);
        Ok(self.steps[i].eval_unchecked(r))
    }

    /// `n` states at uniformly spaced radii on `[a, b]`.
    pub fn sample(&self, a: f64, b: f64, n: usize) -> Result<Vec<OdeState>> {
        uniform_grid(a, b, n).into_iter().map(|r| self.eval(r)).collect()
    }

    /// Step endpoints, starting with the initial state.
    pub fn nodes(&self) -> impl Iterator<Item = &OdeState> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.state_to))
    }

    /// Copy of this trajectory ending at `r`.
    pub fn truncated(&self, r: f64) -> Result<Trajectory> {
        if r < self.start.r || r > self.r_end() {
            return Err(Error::Domain(format!(
                "cannot truncate at r = {r} outside [{}, {}]",
                self.start.r,
                self.r_end()
            )));
        }
        let mut steps: Vec<StepRecord> = self.steps.iter().take_while(|s| s.r_from < r).cloned().collect();
        if let Some(last) = steps.last_mut() {
            if last.r_to > r {
                *last = last.truncated(r);
            }
        }
        Ok(Trajectory { steps, stop: StopReason::Truncated { r }, ..self.clone() })
    }
}

pub(crate) fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

/// Integrates the canonical system from `start` to `r_max`, stopping early
/// at the first triggered event.
pub fn integrate(
    start: OdeState,
    params: SystemParams,
    controls: StepControls,
    events: &[EventSpec],
    r_max: f64,
) -> Result<Trajectory> {
    if start.r.is_nan() || start.r <= 0.0 {
        return Err(Error::Domain(format!("integration must start at r > 0, got {}", start.r)));
    }
    let field = |r: f64, y: &[f64; 4]| model::rhs_vector(r, y, &params);
    let mut traj = integrate_field(field, start, params, controls, events, r_max)?;
    // Inverts the Taylor start: u - r u'/2 = u0 exactly for the series state.
    traj.u0 = start.u - 0.5 * start.up * start.r;
    Ok(traj)
}

/// Launches from `u(0) = u0` via the Taylor start at `r_start`.
pub fn integrate_from_origin(
    u0: f64,
    params: SystemParams,
    controls: StepControls,
    events: &[EventSpec],
    r_start: f64,
    r_max: f64,
) -> Result<Trajectory> {
    let start = model::series_start(u0, &params, r_start)?;
    let mut traj = integrate(start, params, controls, events, r_max)?;
    traj.u0 = u0;
    traj.from_origin = true;
    Ok(traj)
}

/// Integrates an arbitrary four-component vector field with the same
/// stepping, dense output and event machinery.
pub fn integrate_field<F>(
    field: F,
    start: OdeState,
    params: SystemParams,
    controls: StepControls,
    events: &[EventSpec],
    r_max: f64,
) -> Result<Trajectory>
where
    F: Fn(f64, &[f64; 4]) -> [f64; 4],
{
    controls.validate()?;
    if r_max.is_nan() || r_max < start.r {
        return Err(Error::Domain(format!("r_max = {r_max} lies before the start radius {}", start.r)));
    }
    let mut traj = Trajectory {
        params,
        u0: start.u,
        controls,
        steps: Vec::new(),
        stop: StopReason::RMaxReached,
        start,
        from_origin: false,
    };
    if !start.is_finite() {
        traj.stop = StopReason::NonFinite { r: start.r };
        return Ok(traj);
    }

    let mut r = start.r;
    let mut y = start.vector();
    let mut k1 = field(r, &y);
    let mut h = controls.h_init.min(controls.h_max);
    let mut attempts = 0usize;
    let mut nonfinite_retries = 0usize;
    let mut last_rejected = false;

    while r < r_max {
        if attempts >= controls.max_steps {
            traj.stop = StopReason::BudgetExhausted;
            return Ok(traj);
        }
        attempts += 1;

        h = h.min(controls.h_max);
        let mut r_next = r + h;
        if r_next >= r_max || r_max - r_next <= 4.0 * f64::EPSILON * r_max {
            r_next = r_max;
            h = r_max - r;
        }
        if r_next <= r {
            traj.stop = StopReason::NonFinite { r };
            return Ok(traj);
        }

        let stage = |ks: &[(&[f64; 4], f64)]| -> [f64; 4] {
            let mut out = y;
            for (k, a) in ks {
                for i in 0..4 {
                    out[i] += h * a * k[i];
                }
            }
            out
        };
        let k2 = field(r + C2 * h, &stage(&[(&k1, A21)]));
        let k3 = field(r + C3 * h, &stage(&[(&k1, A31), (&k2, A32)]));
        let k4 = field(r + C4 * h, &stage(&[(&k1, A41), (&k2, A42), (&k3, A43)]));
        let k5 = field(r + C5 * h, &stage(&[(&k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)]));
        let k6 = field(r + h, &stage(&[(&k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)]));
        let y_new = stage(&[(&k1, A71), (&k3, A73), (&k4, A74), (&k5, A75), (&k6, A76)]);
        let k7 = field(r_next, &y_new);

        let mut err = 0.0f64;
        let mut finite = true;
        for i in 0..4 {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = controls.atol + controls.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max(e.abs() / scale);
            finite &= y_new[i].is_finite() && k7[i].is_finite();
        }

        if !finite || !err.is_finite() {
            nonfinite_retries += 1;
            h *= 0.5;
            if nonfinite_retries > MAX_NONFINITE_RETRIES || h <= 1e-15 * r.max(1.0) {
                traj.stop = StopReason::NonFinite { r };
                return Ok(traj);
            }
            last_rejected = true;
            continue;
        }
        nonfinite_retries = 0;

        if err <= 1.0 {
            let mut coeffs = [[0.0; 4]; 5];
            for i in 0..4 {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                let r4 = ydiff - h * k7[i] - bspl;
                let r5 = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                coeffs[0][i] = y[i];
                coeffs[1][i] = ydiff + bspl;
                coeffs[2][i] = -bspl + r4 + r5;
                coeffs[3][i] = -r4 - 2.0 * r5;
                coeffs[4][i] = r5;
            }
            let step = StepRecord {
                r_from: r,
                r_to: r_next,
                state_from: OdeState::from_vector(r, y),
                state_to: OdeState::from_vector(r_next, y_new),
                coeffs,
            };

            if let Some((index, r_event)) = first_event(&step, events) {
                let cut = if r_event < step.r_to { step.truncated(r_event) } else { step };
                traj.steps.push(cut);
                traj.stop = StopReason::Event { index, name: events[index].name.to_string(), r: r_event };
                return Ok(traj);
            }
            traj.steps.push(step);

            r = r_next;
            y = y_new;
            k1 = k7;
            let mut factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            if last_rejected {
                factor = factor.min(1.0);
            }
            h *= factor;
            last_rejected = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
    traj.stop = StopReason::RMaxReached;
    Ok(traj)
}

/// Earliest guarded root among `events` in `step`. Roots closer than the
/// tie width go to the event listed first.
fn first_event(step: &StepRecord, events: &[EventSpec]) -> Option<(usize, f64)> {
    let tie = 1e-12 * step.r_to.max(1.0);
    let mut best: Option<(usize, f64)> = None;
    for (i, ev) in events.iter().enumerate() {
        let Some(r) = locate_event(step, ev) else { continue };
        if let Some(guard) = ev.guard {
            if !guard(&step.eval_unchecked(r)) {
                continue;
            }
        }
        match best {
            Some((_, rb)) if r >= rb - tie => {}
            _ => best = Some((i, r)),
        }
    }
    best
}
