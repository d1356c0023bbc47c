//! Sorting initial heights into the decreasing-through-zero set (`InN`) and
//! the turning-up-while-positive set (`InP`).
//!
//! A run starts from the Taylor state and watches two events: `u` falling
//! through zero, which places `u0` in N, and `u'` rising through zero while
//! `u > 0`, which places it in P. The ground-state height separates the two
//! and is never hit exactly; it is only ever bracketed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{self, Direction, EventSpec, StepControls, StopReason, Trajectory};
use crate::model::{SystemParams, DEFAULT_R_START};

/// Slack allowed on the `V(r_event) >= 1` certificate of a P verdict.
pub const V_CERTIFICATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    InN,
    InP,
    Undetermined,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::InN => "InN",
            Verdict::InP => "InP",
            Verdict::Undetermined => "Undetermined",
        })
    }
}

/// Radii to try before giving up: `initial`, `2 initial`, ... up to `cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RMaxPolicy {
    pub initial: f64,
    pub cap: f64,
}

impl Default for RMaxPolicy {
    fn default() -> Self {
        Self { initial: 20.0, cap: 320.0 }
    }
}

impl RMaxPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.initial > 0.0 && self.cap >= self.initial && self.cap.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("invalid r_max policy: {self:?}")))
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut r = self.initial;
        while r < self.cap {
            out.push(r);
            r *= 2.0;
        }
        out.push(self.cap);
        out
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub u0: f64,
    pub tag: Verdict,
    /// Zero of `u` for `InN`, zero of `u'` for `InP`.
    pub r_event: Option<f64>,
    pub r_explored: f64,
    /// `V` at the event radius of an `InP` verdict.
    pub v_event: Option<f64>,
    pub note: Option<String>,
    pub trajectory: Trajectory,
}

/// Flat, serializable view of a [`Classification`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationRecord {
    pub u0: f64,
    pub tag: Verdict,
    pub r_event: Option<f64>,
    pub r_explored: f64,
    pub v_event: Option<f64>,
    pub note: Option<String>,
}

impl Classification {
    pub fn record(&self) -> ClassificationRecord {
        ClassificationRecord {
            u0: self.u0,
            tag: self.tag,
            r_event: self.r_event,
            r_explored: self.r_explored,
            v_event: self.v_event,
            note: self.note.clone(),
        }
    }
}

fn amplitude(s: &crate::model::OdeState) -> f64 {
    s.u
}

fn slope(s: &crate::model::OdeState) -> f64 {
    s.up
}

fn positive(s: &crate::model::OdeState) -> bool {
    s.u > 0.0
}

/// The two classification events; the zero of `u` is listed first so that
/// coincident roots resolve to `InN`.
pub fn classification_events() -> [EventSpec; 2] {
    [
        EventSpec::new("u_zero", amplitude, Direction::Falling),
        EventSpec::new("up_zero", slope, Direction::Rising).with_guard(positive),
    ]
}

pub fn classify(u0: f64, params: SystemParams, controls: StepControls, policy: RMaxPolicy) -> Result<Classification> {
    if u0.is_nan() || u0 <= 0.0 {
        return Err(Error::Domain(format!("initial height must be positive, got {u0}")));
    }
    policy.validate()?;
    let events = classification_events();
    let radii = policy.radii();
    let mut last = None;
    for r_max in radii {
        let traj = integrate::integrate_from_origin(u0, params, controls, &events, DEFAULT_R_START, r_max)?;
        match traj.stop.clone() {
            StopReason::Event { index: 0, r, .. } => {
                return Ok(Classification {
                    u0,
                    tag: Verdict::InN,
                    r_event: Some(r),
                    r_explored: r,
                    v_event: None,
                    note: None,
                    trajectory: traj,
                });
            }
            StopReason::Event { r, .. } => {
                let end = *traj.end();
                let (tag, note) = if end.v >= 1.0 - V_CERTIFICATE_TOL {
                    (Verdict::InP, None)
                } else {
                    (Verdict::Undetermined, Some(format!("V = {} < 1 at the minimum of u", end.v)))
                };
                return Ok(Classification {
                    u0,
                    tag,
                    r_event: Some(r),
                    r_explored: r,
                    v_event: Some(end.v),
                    note,
                    trajectory: traj,
                });
            }
            StopReason::RMaxReached | StopReason::Truncated { .. } => last = Some(traj),
            StopReason::BudgetExhausted => {
                return Ok(undetermined(u0, traj, "step budget exhausted".into()));
            }
            StopReason::NonFinite { r } => {
                return Ok(undetermined(u0, traj, format!("non-finite state near r = {r}")));
            }
        }
    }
    let traj = last.expect("policy yields at least one radius");
    let note = format!("no event up to r = {}", traj.r_end());
    Ok(undetermined(u0, traj, note))
}

fn undetermined(u0: f64, trajectory: Trajectory, note: String) -> Classification {
    Classification {
        u0,
        tag: Verdict::Undetermined,
        r_event: None,
        r_explored: trajectory.r_end(),
        v_event: None,
        note: Some(note),
        trajectory,
    }
}

/// Confirms an `InP` verdict: `u > 0` and `V >= 1` at the minimum, then `u`
/// turns upward a short distance further out.
pub fn certify_p_side(c: &Classification) -> bool {
    if c.tag != Verdict::InP {
        return false;
    }
    let at = *c.trajectory.end();
    if at.u <= 0.0 || at.v < 1.0 - V_CERTIFICATE_TOL {
        return false;
    }
    let reach = (0.05 * at.r).max(1e-3);
    let Ok(cont) = integrate::integrate(at, c.trajectory.params, c.trajectory.controls, &[], at.r + reach) else {
        return false;
    };
    if cont.stop != StopReason::RMaxReached {
        return false;
    }
    let end = cont.end();
    end.up > 0.0 && end.u > at.u && cont.nodes().skip(1).all(|s| s.up > 0.0 && s.u > 0.0)
}
