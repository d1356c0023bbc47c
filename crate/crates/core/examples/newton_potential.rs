//! Newton potentials of a uniform ball and of the ground-state density,
//! compared with the closed form and with the integrated potential `V`.
//!
//! ```text
//! cargo run --release --example newton_potential
//! ```

use choquard::analyze::{newton_potential, PowerDensity, RadialFn};
use choquard::integrate::StepControls;
use choquard::model::SystemParams;
use choquard::shoot::{bisect, find_bracket};

fn main() -> choquard::Result<()> {
    let ball = RadialFn { f: |s: f64| if s <= 1.0 { 1.0 } else { 0.0 }, outer: 1.0, breakpoints: vec![] };
    let radii = [0.0, 0.5, 1.0, 2.0, 4.0];
    let w = newton_potential(&ball, 3, &radii)?;
    println!("unit ball, N = 3");
    for (r, w) in radii.iter().zip(&w) {
        let exact = if *r <= 1.0 { (3.0 - r * r) / 6.0 } else { 1.0 / (3.0 * r) };
        println!("  r = {r:<4} W = {w:.15}  closed form {exact:.15}");
    }

    let params = SystemParams::new(3, 2.0)?;
    let g = bisect(find_bracket(params, StepControls::default())?, params, StepControls::default(), 1e-10)?;
    let density = PowerDensity { base: &g.trajectory, p: 2.0 };
    let radii: Vec<f64> = (0..=6).map(|i| i as f64 * 2.0).collect();
    let w = newton_potential(&density, 3, &radii)?;
    let v0 = g.trajectory.eval(0.0)?.v;
    println!("ground state |u|^2, N = 3: V(r) - V(0) against -(W(r) - W(0))");
    for (r, wr) in radii.iter().zip(&w) {
        let dv = g.trajectory.eval(*r)?.v - v0;
        println!("  r = {r:<4} {dv:.12}  {:.12}", w[0] - wr);
    }
    Ok(())
}
