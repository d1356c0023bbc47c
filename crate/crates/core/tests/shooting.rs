mod common;

use std::sync::OnceLock;

use choquard::classify::{certify_p_side, classify, RMaxPolicy, Verdict};
use choquard::integrate::StepControls;
use choquard::model::SystemParams;
use choquard::shoot::{bisect, estimate_vinf, find_bracket, find_bracket_with, BracketSearch, FarField, GroundState};
use choquard::Error;

fn params(dim: u32, p: f64) -> SystemParams {
    SystemParams::new(dim, p).unwrap()
}

fn solve(dim: u32, p: f64, controls: StepControls, tol: f64) -> GroundState {
    let bracket = find_bracket(params(dim, p), controls).unwrap();
    bisect(bracket, params(dim, p), controls, tol).unwrap()
}

fn ground_32() -> &'static GroundState {
    static G: OnceLock<GroundState> = OnceLock::new();
    G.get_or_init(|| solve(3, 2.0, StepControls::default(), 1e-10))
}

#[test]
fn bracket_for_the_reference_pair() {
    let b = find_bracket(params(3, 2.0), StepControls::default()).unwrap();
    assert_eq!(b.lo(), 0.2);
    assert_eq!(b.lo.tag, Verdict::InN);
    assert!([1.0, 2.0, 4.0, 8.0].contains(&b.hi()));
    assert_eq!(b.hi.tag, Verdict::InP);
    assert_eq!(common::rk4_classify(b.hi(), 3, 2.0, 1e-4, 320.0).0, common::Tag::P);

    let b = find_bracket(params(2, 1.0), StepControls::default()).unwrap();
    assert!(b.lo() < b.hi());
    assert_eq!((b.lo.tag, b.hi.tag), (Verdict::InN, Verdict::InP));
}

#[test]
fn bisection_certificate() {
    let g = ground_32();
    assert!(g.bracket_width <= 1e-10);
    assert!(g.lo.u0 < g.u0_star && g.u0_star < g.hi.u0);
    let p = params(3, 2.0);
    let lo = classify(g.lo.u0, p, StepControls::default(), RMaxPolicy::default()).unwrap();
    let hi = classify(g.hi.u0, p, StepControls::default(), RMaxPolicy::default()).unwrap();
    assert_eq!(lo.tag, Verdict::InN);
    assert_eq!(hi.tag, Verdict::InP);
    assert!(certify_p_side(&hi));
}

#[test]
fn restart_from_another_bracket_agrees() {
    let p = params(3, 2.0);
    let controls = StepControls::default();
    let search = BracketSearch { lo: 0.24, hi_start: 8.0, hi_cap: 1e6 };
    let b = find_bracket_with(p, controls, RMaxPolicy::default(), search).unwrap();
    assert_eq!(b.lo(), 0.24);
    assert!(b.hi() >= 8.0);
    let g = bisect(b, p, controls, 1e-10).unwrap();
    assert!((g.u0_star - ground_32().u0_star).abs() < 1e-8);
}

#[test]
fn tighter_integration_moves_the_height_less_than_ten_tolerances() {
    let tol = 1e-10;
    let tight = solve(3, 2.0, StepControls::default().tightened(10.0), tol);
    let diff = (tight.u0_star - ground_32().u0_star).abs();
    assert!(diff < 10.0 * tol, "moved by {diff:e}");
}

#[test]
fn near_critical_trajectory_stays_positive_and_decreasing() {
    let g = ground_32();
    let lo = &g.lo.trajectory;
    let r_event = g.lo.r_event.unwrap();
    let samples = lo.sample(lo.r_start(), r_event * (1.0 - 1e-9), 5000).unwrap();
    assert!(samples.iter().all(|s| s.u > 0.0 && s.up < 0.0));
    let t = &g.trajectory;
    assert!(t.nodes().all(|s| s.u > 0.0 && s.up < 0.0));
}

#[test]
fn event_radius_grows_as_bracket_shrinks() {
    let p = params(3, 2.0);
    let mut last = 0.0;
    for tol in [1e-3, 1e-5, 1e-7, 1e-9] {
        let b = find_bracket(p, StepControls::default()).unwrap();
        let g = bisect(b, p, StepControls::default(), tol).unwrap();
        let r = g.lo.r_event.unwrap();
        assert!(r > last, "tol {tol:e}: {r} after {last}");
        last = r;
    }
}

#[test]
fn far_field_and_decay_of_the_reference_pair() {
    let g = ground_32();
    let v_inf = g.v_inf().unwrap();
    assert!(v_inf > 1.0);
    let k = g.decay_k().unwrap();
    assert!(k > 0.0);
    let rel = (k * k - (v_inf - 1.0)).abs() / (v_inf - 1.0);
    assert!(rel < 0.02, "k^2 = {}, V_inf - 1 = {}", k * k, v_inf - 1.0);
    assert!(g.trajectory.end().u / g.u0_star < 1e-4);
}

#[test]
fn two_dimensional_far_field_is_logarithmic() {
    let g = solve(2, 1.0, StepControls::default(), 1e-10);
    match g.far_field.unwrap() {
        FarField::Logarithmic { mass, .. } => assert!(mass.is_finite() && mass > 0.0),
        other => panic!("expected a logarithmic far field, got {other:?}"),
    }
    assert_eq!(g.v_inf(), Some(f64::INFINITY));
}

/// `V` beyond `R` with no source, in the compact variable `t = R / r`:
/// `dV/dt = -M R^(2-N) t^(N-3)`, integrated by RK4 from `t = 1` down to 0.
fn compactified_limit(dim: u32, r: f64, v: f64, vp: f64) -> f64 {
    let n = f64::from(dim);
    let m = vp * r.powf(n - 1.0);
    let f = |t: f64| -m * r.powf(2.0 - n) * t.powf(n - 3.0);
    let steps = 10_000;
    let h = -1.0 / steps as f64;
    let mut value = v;
    for i in 0..steps {
        let t = 1.0 + i as f64 * h;
        value += h / 6.0 * (f(t) + 4.0 * f(t + 0.5 * h) + f(t + h));
    }
    value
}

#[test]
fn vinf_matches_source_free_long_integration() {
    for (dim, p) in [(3, 2.0), (4, 1.0)] {
        let g = if dim == 3 { ground_32().clone() } else { solve(dim, p, StepControls::default(), 1e-10) };
        let end = *g.trajectory.end();
        let v_inf = estimate_vinf(&g.trajectory, params(dim, p)).unwrap().v_inf();
        let oracle = compactified_limit(dim, end.r, end.v, end.vp);
        assert!((v_inf - oracle).abs() < 1e-8, "N = {dim}: {v_inf} vs {oracle}");

        // Marching the flux form V' = M r^(1-N) out to r = 1000, plus the
        // remaining rise beyond.
        let n = f64::from(dim);
        let (mut r, mut v, w) = (end.r, end.v, end.vp * end.r.powf(n - 1.0));
        let h: f64 = 1e-2;
        while r < 1000.0 {
            let step = h.min(1000.0 - r);
            let dv = |r: f64| w * r.powf(1.0 - n);
            v += step / 6.0 * (dv(r) + 4.0 * dv(r + 0.5 * step) + dv(r + step));
            r += step;
        }
        let marched = v + w * r.powf(2.0 - n) / (n - 2.0);
        assert!((v_inf - marched).abs() < 1e-8, "N = {dim}: {v_inf} vs {marched}");
    }
}

#[test]
fn vinf_refuses_an_undecayed_tail() {
    let c = classify(0.2, params(3, 2.0), StepControls::default(), RMaxPolicy::default()).unwrap();
    let t = c.trajectory.truncated(1.0).unwrap();
    assert!(matches!(estimate_vinf(&t, params(3, 2.0)), Err(Error::TailNotDecayed { .. })));
}

#[test]
fn ground_heights_for_several_pairs_match_reference_bisection() {
    // A coarse reference suffices here; the acceptance target runs the fine one.
    for (dim, p) in [(2, 1.0), (4, 1.0)] {
        let g = solve(dim, p, StepControls::default(), 1e-10);
        let reference = common::rk4_bisect(dim, p, 1e-3, 1e-8);
        assert!((g.u0_star - reference).abs() < 1e-5, "N = {dim}, p = {p}: {} vs {reference}", g.u0_star);
    }
}
