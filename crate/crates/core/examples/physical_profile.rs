//! Maps the canonical ground state to physical variables for a given
//! `(λ, γ)` and reports the PDE residual of the result.
//!
//! ```text
//! cargo run --release --example physical_profile -- 3 2 1.0 1.0
//! ```

use choquard::analyze::{pde_residual, to_physical};
use choquard::integrate::StepControls;
use choquard::model::SystemParams;
use choquard::shoot::{bisect, find_bracket};

fn main() -> choquard::Result<()> {
    let mut args = std::env::args().skip(1);
    let dim: u32 = args.next().map_or(3, |s| s.parse().expect("dimension"));
    let p: f64 = args.next().map_or(2.0, |s| s.parse().expect("exponent"));
    let lambda: f64 = args.next().map_or(1.0, |s| s.parse().expect("lambda"));
    let gamma: f64 = args.next().map_or(1.0, |s| s.parse().expect("gamma"));

    let params = SystemParams::new(dim, p)?;
    let ground = bisect(find_bracket(params, StepControls::default())?, params, StepControls::default(), 1e-10)?;
    let (s, profile) = to_physical(&ground, lambda, gamma)?;
    println!("sigma = {:.8}, A = {:.8}, B = {:.8}, V_lambda(0) = {:.8}", s.sigma, s.a_scale, s.b_scale, s.v_lambda_0);
    println!("identity residual {:.2e}", s.identity_residual());
    let step = profile.r.len() / 10;
    for i in (0..profile.r.len()).step_by(step.max(1)) {
        println!("r = {:>8.4}  u = {:.6e}  V = {:.6e}", profile.r[i], profile.u[i], profile.v[i]);
    }
    println!("relative PDE residual {:.3e}", pde_residual(&profile, lambda, gamma, params)?);
    Ok(())
}
