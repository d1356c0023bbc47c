//! Runs the whole check battery for one `(N, p)` pair and prints one line
//! per check.
//!
//! ```text
//! cargo run --release --example check_suite -- 3 2
//! ```

use choquard::analyze::{run_suite, SuiteOptions, SuiteStatus};
use choquard::model::SystemParams;

fn main() -> choquard::Result<()> {
    let mut args = std::env::args().skip(1);
    let dim: u32 = args.next().map_or(3, |s| s.parse().expect("dimension"));
    let p: f64 = args.next().map_or(2.0, |s| s.parse().expect("exponent"));

    let outcome = run_suite(SystemParams::new(dim, p)?, &SuiteOptions::default())?;
    if let Some(g) = &outcome.ground {
        println!("N = {dim}, p = {p}: u0* = {:.10}, V_inf = {:?}", g.u0_star, g.v_inf);
    }
    for e in &outcome.entries {
        let status = match e.status {
            SuiteStatus::Passed => "pass",
            SuiteStatus::Failed => "FAIL",
            SuiteStatus::Skipped => "skip",
        };
        let detail = e.report.as_ref().map(|r| r.details.as_str()).or(e.note.as_deref()).unwrap_or("");
        println!("{status}  {:<26} {detail}", e.name);
    }
    println!("{}", if outcome.all_passed() { "all checks passed" } else { "some checks failed" });
    Ok(())
}
