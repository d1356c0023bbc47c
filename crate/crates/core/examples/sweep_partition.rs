//! Sweeps a geometric grid of heights in parallel and prints where the
//! verdicts switch from InN to InP.
//!
//! ```text
//! cargo run --release --example sweep_partition -- 3 2
//! ```

use choquard::classify::Verdict;
use choquard::integrate::StepControls;
use choquard::model::SystemParams;
use choquard::shoot::sweep;

fn main() -> choquard::Result<()> {
    let mut args = std::env::args().skip(1);
    let dim: u32 = args.next().map_or(3, |s| s.parse().expect("dimension"));
    let p: f64 = args.next().map_or(2.0, |s| s.parse().expect("exponent"));

    let grid: Vec<f64> = (0..=40).map(|i| 0.05 * 2f64.powf(i as f64 / 4.0)).collect();
    let results = sweep(&grid, SystemParams::new(dim, p)?, StepControls::default());
    let mut previous = None;
    for (u0, c) in grid.iter().zip(results) {
        let c = c?;
        let r = c.r_event.map_or("-".to_string(), |r| format!("{r:.4}"));
        println!("{u0:>12.6}  {:<12} r_event = {r}", c.tag.to_string());
        if previous == Some(Verdict::InN) && c.tag == Verdict::InP {
            println!("{:>12}  --- ground-state height lies below here ---", "");
        }
        previous = Some(c.tag);
    }
    Ok(())
}
