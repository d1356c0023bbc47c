//! Brackets and bisects the ground-state height for one `(N, p)` pair and
//! prints the tail quantities.
//!
//! ```text
//! cargo run --release --example solve_ground_state -- 3 2
//! ```

use choquard::integrate::StepControls;
use choquard::model::SystemParams;
use choquard::shoot::{bisect, find_bracket};

fn main() -> choquard::Result<()> {
    let mut args = std::env::args().skip(1);
    let dim: u32 = args.next().map_or(3, |s| s.parse().expect("dimension"));
    let p: f64 = args.next().map_or(2.0, |s| s.parse().expect("exponent"));

    let params = SystemParams::new(dim, p)?;
    let controls = StepControls::default();
    let bracket = find_bracket(params, controls)?;
    println!("initial bracket [{}, {}]", bracket.lo(), bracket.hi());

    let gs = bisect(bracket, params, controls, 1e-10)?;
    println!("u0*            = {:.10}", gs.u0_star);
    println!("bracket width  = {:e} after {} iterations", gs.bracket_width, gs.iterations);
    println!("tracking to r  = {:.3} (u = {:e})", gs.tracking_radius, gs.trajectory.end().u);
    match gs.far_field {
        Some(ff) => println!("V_inf          = {:.6}, mass = {:.6}", ff.v_inf(), ff.mass()),
        None => println!("far field      : {}", gs.tail_note.as_deref().unwrap_or("-")),
    }
    if let (Some(d), Some(v_inf)) = (gs.decay, gs.v_inf()) {
        let predicted = (v_inf - 1.0).sqrt();
        println!("decay k        = {:.6} (sqrt(V_inf - 1) = {:.6})", d.k, predicted);
        println!("z limit        = {:.6}, z at R = {:.6}", d.z_limit, d.z_final);
    }
    Ok(())
}
