//! Lowest bound states of `-Δ + V` on a sinh mesh.
//!
//! cargo run --release --example linear_states -- [n] [r_max]

use radial_sp::fem::{assemble, RadialMesh};
use radial_sp::linear::{count_bound_states, solve_linear_states, sturm_check};
use radial_sp::potential::PotentialSpec;

fn main() -> radial_sp::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(4000, |s| s.parse().expect("n"));
    let r_max: f64 = args.next().map_or(100.0, |s| s.parse().expect("r_max"));

    let ops = assemble(&RadialMesh::sinh(n, r_max)?, &PotentialSpec::smoothed_exponential())?;
    let bound = count_bound_states(&ops);
    let pairs = solve_linear_states(&ops, bound.min(6))?;
    sturm_check(&pairs)?;
    println!("{bound} bound states below the continuum floor (n = {n}, r_max = {r_max})");
    for p in &pairs {
        println!("  nodes {}  eigenvalue {:+.10}  E = {:.10}", p.nodes, p.eigenvalue, p.energy());
    }

    // hydrogen: E_n = Z^2 / (4 n^2) in these units
    let coulomb = PotentialSpec::coulomb_table(1.0, 1e-4, 200.0, 4000)?;
    let h = assemble(&RadialMesh::sinh(4000, 200.0)?, &coulomb)?;
    for p in solve_linear_states(&h, 2)? {
        println!("hydrogen level with {} node(s): {:+.8}", p.nodes, p.eigenvalue);
    }
    Ok(())
}
