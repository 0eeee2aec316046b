//! Fixed-mass homotopy from the linear states (γ = 0) to the Hartree
//! problem (γ = 1).
//!
//! cargo run --release --example gamma_continuation -- [branches] [mass]

use radial_sp::pipeline::BranchStage;
use radial_sp::potential::PotentialSpec;

fn main() -> radial_sp::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map_or(4, |s| s.parse().expect("branches"));
    let mass: f64 = args.next().map_or(1.0, |s| s.parse().expect("mass"));

    let stage = BranchStage::new(&PotentialSpec::smoothed_exponential(), 4000, 300.0, count)?;
    let branches: Vec<usize> = (0..count).collect();
    for (j, path) in branches.iter().zip(stage.continue_all(&branches, mass, 0.05)) {
        let path = path?;
        let st = &path.state;
        println!(
            "branch {j}: E_lin = {:.6} -> E = {:.6} at γ = 1, {} steps, Pohozaev residual {:.1e}",
            stage.linear_energy(*j)?,
            st.energy,
            path.steps.len(),
            st.pohozaev_residual(stage.potential())
        );
        for s in path.steps.iter().step_by(5) {
            println!("    γ = {:.2}  E = {:.6}  crossings {}", s.gamma, s.energy, s.nodes);
        }
    }
    Ok(())
}
