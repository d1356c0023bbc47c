//! Classifies a few initial heights and prints where each trajectory
//! decides its fate.
//!
//! ```text
//! cargo run --release --example classify_heights -- 3 2 0.2 1 50
//! ```

use choquard::classify::{certify_p_side, classify, RMaxPolicy, Verdict};
use choquard::integrate::StepControls;
use choquard::model::SystemParams;

fn main() -> choquard::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dim: u32 = args.first().map_or(3, |s| s.parse().expect("dimension"));
    let p: f64 = args.get(1).map_or(2.0, |s| s.parse().expect("exponent"));
    let heights: Vec<f64> = if args.len() > 2 {
        args[2..].iter().map(|s| s.parse().expect("height")).collect()
    } else {
        vec![0.1, 0.2, 0.5, 1.0, 2.0, 50.0]
    };

    let params = SystemParams::new(dim, p)?;
    for u0 in heights {
        let c = classify(u0, params, StepControls::default(), RMaxPolicy::default())?;
        let end = c.trajectory.end();
        match c.tag {
            Verdict::InN => println!("u0 = {u0:<8} InN: u hits zero at r = {:.6}, u' = {:.3e}", end.r, end.up),
            Verdict::InP => println!(
                "u0 = {u0:<8} InP: minimum u = {:.3e} at r = {:.6}, V = {:.4}, certified {}",
                end.u,
                end.r,
                end.v,
                certify_p_side(&c)
            ),
            Verdict::Undetermined => println!("u0 = {u0:<8} undetermined: {}", c.note.unwrap_or_default()),
        }
    }
    Ok(())
}
