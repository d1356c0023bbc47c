//! Two trajectories below the ground-state height: their weighted Wronskian
//! grows, they never cross, and the larger one carries the larger potential.
//!
//! ```text
//! cargo run --release --example wronskian_ordering -- 0.6 0.7
//! ```

use choquard::analyze::{v_ordering_check, wronskian_check, CheckTolerances};
use choquard::classify::{classify, RMaxPolicy};
use choquard::integrate::StepControls;
use choquard::model::SystemParams;

fn main() -> choquard::Result<()> {
    let mut args = std::env::args().skip(1);
    let u1: f64 = args.next().map_or(0.6, |s| s.parse().expect("first height"));
    let u2: f64 = args.next().map_or(0.7, |s| s.parse().expect("second height"));

    let params = SystemParams::new(3, 2.0)?;
    let run = |u0| classify(u0, params, StepControls::default(), RMaxPolicy::default());
    let (c1, c2) = (run(u1)?, run(u2)?);
    println!("u0 = {u1}: {}, u0 = {u2}: {}", c1.tag, c2.tag);

    let r_end = c1.trajectory.r_end().min(c2.trajectory.r_end());
    println!("{:>8} {:>14} {:>14} {:>14}", "r", "u2 - u1", "V2 - V1", "ω r^2");
    for i in 1..=8 {
        let r = r_end * i as f64 / 8.0;
        let (a, b) = (c1.trajectory.eval(r)?, c2.trajectory.eval(r)?);
        let omega = b.up * a.u - a.up * b.u;
        println!("{r:>8.4} {:>14.6e} {:>14.6e} {:>14.6e}", b.u - a.u, b.v - a.v, omega * r * r);
    }

    let tol = CheckTolerances::default();
    for report in [
        wronskian_check(&c1.trajectory, &c2.trajectory, &tol)?,
        v_ordering_check(&c1.trajectory, &c2.trajectory, &tol)?,
    ] {
        println!("{}: {} ({})", report.name, if report.passed { "pass" } else { "FAIL" }, report.details);
    }
    Ok(())
}
