//! Large-E behaviour of the ground-state branch: mass ~ E^{1/2} and
//! convergence of the rescaled profiles.
//!
//! cargo run --release --example scaling_tail -- [e_max]

use radial_sp::bound_states::{rescale_check, TraceOptions};
use radial_sp::pipeline::BranchStage;
use radial_sp::potential::PotentialSpec;

fn main() -> radial_sp::Result<()> {
    let e_max: f64 = std::env::args().nth(1).map_or(100.0, |s| s.parse().expect("e_max"));
    let stage = BranchStage::new(&PotentialSpec::smoothed_exponential(), 4000, 300.0, 1)?;
    let path = stage.continue_gamma(0, 1.0, 0.05)?;
    let options = TraceOptions {
        energy_max: e_max,
        max_down_steps: 0,
        max_up_steps: 400,
        ..TraceOptions::default()
    };
    let curve = stage.trace(&path, options)?;
    let report = rescale_check(&curve)?;
    println!(
        "log-log slope {:.4} fitted on E in [{:.2}, {:.2}]",
        report.slope, report.fit_range.0, report.fit_range.1
    );
    for ((e, _), diff) in report.profiles.iter().zip(&report.successive_differences) {
        println!("  E = {e:8.3}  sup |ũ(E) - ũ(2E)| = {diff:.3e}");
    }
    Ok(())
}
