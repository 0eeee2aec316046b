//! Mass as a function of E along one branch, with the `d'(E) = M` check.
//!
//! cargo run --release --example branch_sweep -- [branch]

use radial_sp::bound_states::{d_second_sign, TraceOptions};
use radial_sp::pipeline::BranchStage;
use radial_sp::potential::PotentialSpec;

fn main() -> radial_sp::Result<()> {
    let j: usize = std::env::args().nth(1).map_or(0, |s| s.parse().expect("branch"));
    let stage = BranchStage::new(&PotentialSpec::smoothed_exponential(), 4000, 300.0, j + 1)?;
    let path = stage.continue_gamma(j, 1.0, 0.05)?;
    let curve = stage.trace(&path, TraceOptions::default())?;
    let d = d_second_sign(&curve.samples)?;

    println!("branch {j}: {} samples, stops {:?} / {:?}", curve.samples.len(), curve.low_stop, curve.high_stop);
    for s in curve.samples.iter().step_by(8) {
        println!("  E = {:.6}  mass = {:.6e}  H = {:+.6e}", s.energy, s.mass, s.hamiltonian);
    }
    println!("p(d'') = {}, max |d' - M| / M = {:.2e}", d.p, d.max_relative_error);
    Ok(())
}
