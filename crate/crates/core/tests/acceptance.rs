//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use choquard::analyze::{
    barrier_check, pde_residual, round_trip_check, to_physical, v_sandwich_check, wronskian_check, CheckTolerances,
};
use choquard::classify::{certify_p_side, classify, Classification, RMaxPolicy, Verdict};
use choquard::integrate::StepControls;
use choquard::model::SystemParams;
use choquard::shoot::{bisect, find_bracket, find_bracket_with, BracketSearch, GroundState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PAIRS: [(u32, f64); 9] =
    [(2, 1.0), (2, 1.5), (2, 2.0), (3, 1.0), (3, 1.5), (3, 2.0), (4, 1.0), (4, 1.5), (4, 2.0)];
const SMALL: [f64; 5] = [0.05, 0.1, 0.15, 0.2, 0.24];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn params(dim: u32, p: f64) -> SystemParams {
    SystemParams::new(dim, p).unwrap()
}

fn run(u0: f64, dim: u32, p: f64) -> Classification {
    classify(u0, params(dim, p), StepControls::default(), RMaxPolicy::default()).unwrap()
}

fn solve(dim: u32, p: f64) -> GroundState {
    let b = find_bracket(params(dim, p), StepControls::default()).unwrap();
    bisect(b, params(dim, p), StepControls::default(), 1e-10).unwrap()
}

fn within(limit: Option<Duration>, took: Duration) -> bool {
    limit.is_none_or(|l| took <= l)
}

fn small_heights() -> Outcome {
    let bad: Vec<String> = PAIRS
        .iter()
        .flat_map(|&(d, p)| SMALL.iter().map(move |&u0| (u0, d, p)))
        .filter(|&(u0, d, p)| run(u0, d, p).tag != Verdict::InN)
        .map(|(u0, d, p)| format!("u0={u0} N={d} p={p}"))
        .collect();
    outcome(bad.is_empty(), format!("45 heights, {} not InN {bad:?}", bad.len()))
}

fn large_height() -> Outcome {
    let mut bad = Vec::new();
    for &(d, p) in &PAIRS {
        let c = run(50.0, d, p);
        let ok = c.tag == Verdict::InP && c.v_event.is_some_and(|v| v >= 1.0) && certify_p_side(&c);
        if !ok {
            bad.push(format!("N={d} p={p}: {} V={:?}", c.tag, c.v_event));
        }
    }
    outcome(bad.is_empty(), format!("9 pairs at u0 = 50, {} failing {bad:?}", bad.len()))
}

fn uniqueness(g: &GroundState) -> Outcome {
    let p = params(3, 2.0);
    let search = BracketSearch { lo: 0.24, hi_start: 8.0, hi_cap: 1e6 };
    let b = find_bracket_with(p, StepControls::default(), RMaxPolicy::default(), search).unwrap();
    let (lo, hi) = (b.lo(), b.hi());
    let other = bisect(b, p, StepControls::default(), 1e-10).unwrap();
    let diff = (other.u0_star - g.u0_star).abs();
    outcome(
        diff <= 1e-8,
        format!("lo 0.2 -> {:.12}, bracket [{lo}, {hi}] -> {:.12}, diff {diff:.2e}", g.u0_star, other.u0_star),
    )
}

fn oracle(g: &GroundState) -> Outcome {
    let reference = common::rk4_bisect(3, 2.0, 1e-4, 1e-10);
    let diff = (reference - g.u0_star).abs();
    outcome(diff <= 1e-6, format!("adaptive {:.12}, fixed-step RK4 {reference:.12}, diff {diff:.2e}", g.u0_star))
}

fn far_field(g: &GroundState) -> Outcome {
    let (Some(v_inf), Some(k)) = (g.v_inf(), g.decay_k()) else {
        return outcome(false, format!("tail quantities missing: {:?}", g.tail_note));
    };
    let gap = (k * k - (v_inf - 1.0)).abs() / (v_inf - 1.0);
    outcome(v_inf > 1.0 && gap <= 0.02, format!("V_inf = {v_inf:.8}, k = {k:.6}, |k² - (V_inf - 1)| rel {gap:.3e}"))
}

fn wronskian(g: &GroundState) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let tol = CheckTolerances::default();
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..20 {
        let a = rng.random_range(0.05..g.u0_star);
        let b = rng.random_range(0.05..g.u0_star);
        let (u1, u2) = if a < b { (a, b) } else { (b, a) };
        let r = wronskian_check(&run(u1, 3, 2.0).trajectory, &run(u2, 3, 2.0).trajectory, &tol).unwrap();
        worst = worst.min(r.worst_violation);
        failures += usize::from(!r.passed);
    }
    outcome(
        failures == 0,
        format!("20 pairs below u0* = {:.6}, {failures} failing, worst margin {worst:.3e}", g.u0_star),
    )
}

fn sandwich() -> Outcome {
    let tol = CheckTolerances::default();
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for &(d, p) in &PAIRS {
        for u0 in SMALL.iter().copied().chain([50.0]) {
            let r = v_sandwich_check(&run(u0, d, p).trajectory, &tol).unwrap();
            worst = worst.min(r.worst_violation);
            failures += usize::from(!r.passed);
        }
    }
    outcome(failures == 0, format!("54 trajectories, {failures} failing, worst slack {worst:.3e}"))
}

fn barrier() -> Outcome {
    let r = barrier_check(&run(50.0, 3, 2.0).trajectory, &CheckTolerances::default()).unwrap();
    outcome(r.passed, r.details)
}

fn pde(g: &GroundState) -> Outcome {
    match to_physical(g, 1.0, 1.0).and_then(|(_, prof)| pde_residual(&prof, 1.0, 1.0, g.params)) {
        Ok(res) => outcome(res < 1e-6, format!("relative residual {res:.3e}")),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn round_trip(g: &GroundState) -> Outcome {
    match round_trip_check(g, &[(1.0, 1.0), (4.0, 1.0), (1.0, 3.0)], &CheckTolerances::default()) {
        Ok(r) => outcome(r.passed, r.details),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn p_continuity() -> Outcome {
    let ps = [1.0, 1.25, 1.5, 1.75, 2.0];
    let heights: Vec<f64> = ps.iter().map(|&p| solve(3, p).u0_star).collect();
    let steps: Vec<f64> = heights.windows(2).map(|w| (w[1] - w[0]).abs() / w[0]).collect();
    let ok = heights.iter().all(|h| h.is_finite()) && steps.iter().all(|&s| s < 0.25);
    let shown: Vec<String> = ps.iter().zip(&heights).map(|(p, h)| format!("p={p}: {h:.8}")).collect();
    let max = steps.iter().fold(0.0f64, |m, &s| m.max(s));
    outcome(ok, format!("{}; max adjacent change {max:.3}", shown.join(", ")))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let g = solve(3, 2.0);
    let solve_time = start.elapsed();
    println!("ground state (N=3, p=2): u0* = {:.12} in {:.2?}", g.u0_star, solve_time);

    type Criterion<'a> = (&'a str, Option<Duration>, Box<dyn Fn() -> Outcome + 'a>);
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: Vec<Criterion> = vec![
        ("small heights are InN", secs(10), Box::new(small_heights)),
        ("u0 = 50 is InP with V >= 1", secs(10), Box::new(large_height)),
        ("two brackets agree on u0*", secs(60), Box::new(|| uniqueness(&g))),
        ("fixed-step oracle agrees on u0*", None, Box::new(|| oracle(&g))),
        ("V_inf > 1 and k^2 = V_inf - 1", None, Box::new(|| far_field(&g))),
        ("Wronskian on 20 seeded pairs", None, Box::new(|| wronskian(&g))),
        ("V sandwich on decreasing ranges", None, Box::new(sandwich)),
        ("lower barrier at u0 = 50", None, Box::new(barrier)),
        ("PDE residual of physical solution", secs(120), Box::new(|| pde(&g))),
        ("canonical round trip", None, Box::new(|| round_trip(&g))),
        ("u0* continuous in p", None, Box::new(p_continuity)),
    ];

    let mut all = true;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        // Criteria that reuse the ground state are charged for computing it.
        let took = t.elapsed() + if [3, 9].contains(&(i + 1)) { solve_time } else { Duration::ZERO };
        let ok = o.passed && within(*limit, took);
        all &= ok;
        let budget = limit.map_or(String::new(), |l| format!(" (limit {l:?})"));
        println!("{} {:>2}. {name}: {} [{took:.2?}{budget}]", if ok { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if all {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("some acceptance criteria failed");
        ExitCode::FAILURE
    }
}
