//! Onset of linear instability along the first excited branch, compared
//! with the a-priori bound on unstable eigenvalues.
//!
//! cargo run --release --example transition_scan -- [n]

use radial_sp::bound_states::TraceOptions;
use radial_sp::fem::{assemble, RadialMesh};
use radial_sp::pipeline::BranchStage;
use radial_sp::potential::{potential_norms, PotentialSpec};
use radial_sp::stability::{transition_scan, BoundConstants};

fn main() -> radial_sp::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(600, |s| s.parse().expect("n"));
    let v = PotentialSpec::smoothed_exponential();
    let stage = BranchStage::new(&v, 4000, 300.0, 2)?;
    let path = stage.continue_gamma(1, 1.0, 0.05)?;
    let curve = stage.trace(&path, TraceOptions { energy_max: 1.2, ..TraceOptions::default() })?;
    let ops = assemble(&RadialMesh::sinh(n, 100.0)?, &v)?;
    let norms = potential_norms(&v)?;
    let energies = [0.07, 0.1, 0.13, 0.16, 0.25, 0.5, 1.0];
    let scan = transition_scan(&ops, &stage.solver, &curve, &energies, 0.01, &norms, BoundConstants::default())?;
    for p in &scan.points {
        println!(
            "E = {:.4}  mass = {:.4e}  sigma_max = {:.3e}  bound = {:.3e}",
            p.energy,
            p.mass,
            p.sigma_max,
            p.bound.value()
        );
    }
    println!("stable -> unstable bracket {:?}", scan.bracket);
    Ok(())
}
