//! Perturbed ground and first excited states under the Strang integrator.
//!
//! cargo run --release --example time_evolution -- [t_final]

use radial_sp::evolution::{evolve, perturbed_ic, stationary_state, EvolutionParams, StrangIntegrator};
use radial_sp::fem::{assemble, RadialMesh};
use radial_sp::pipeline::BranchStage;
use radial_sp::potential::PotentialSpec;

fn main() -> radial_sp::Result<()> {
    let t_final: f64 = std::env::args().nth(1).map_or(40.0, |s| s.parse().expect("t_final"));
    let params = EvolutionParams {
        n: 4000,
        r_max: 200.0,
        t_final,
        ..EvolutionParams::desk()
    };
    params.validate()?;
    let v = PotentialSpec::smoothed_exponential();
    let stage = BranchStage::new(&v, 4000, 300.0, 2)?;
    let ops = assemble(&RadialMesh::sinh(params.n, params.r_max)?, &v)?;
    let integ = StrangIntegrator::new(&ops, params.dt)?;
    let radii: Vec<f64> = (0..=40).map(|i| i as f64).collect();

    for j in 0..2 {
        let state = stage.state_at_energy(j, 1.0, 0.05, 1.0)?;
        let base = stationary_state(&ops, &state, v.charge())?;
        let (ic, _) = perturbed_ic(&ops, &base.u, params.epsilon)?;
        let (_, out) = evolve(&integ, &ic, params.t_final, params.snapshot_stride, &radii, 10.0 * params.epsilon)?;
        println!(
            "branch {j}: max modulus deviation {:.3e}, departure {:?}, mass drift {:.1e}, energy drift {:.1e}",
            out.max_modulus_deviation,
            out.departure_time,
            out.trace.mass_drift(),
            out.trace.energy_drift()
        );
        let last = out.snapshots.last().unwrap();
        let profile: Vec<String> = last.iter().step_by(5).map(|x| format!("{x:.4}")).collect();
        println!("    |phi| at t = {t_final}, r = 0, 5, ..., 40: {}", profile.join(" "));
    }
    Ok(())
}
