//! L± negative counts, the JL spectrum and the stability verdict of the
//! first branches at one energy.
//!
//! cargo run --release --example stability_spectrum -- [energy] [n]

use radial_sp::fem::{assemble, RadialMesh};
use radial_sp::pipeline::{local_d_second, BranchStage};
use radial_sp::potential::PotentialSpec;
use radial_sp::stability::analyze_state;

fn main() -> radial_sp::Result<()> {
    let mut args = std::env::args().skip(1);
    let energy: f64 = args.next().map_or(1.0, |s| s.parse().expect("energy"));
    let n: usize = args.next().map_or(800, |s| s.parse().expect("n"));

    let v = PotentialSpec::smoothed_exponential();
    let stage = BranchStage::new(&v, 4000, 300.0, 3)?;
    let ops = assemble(&RadialMesh::sinh(n, 100.0)?, &v)?;
    for j in 0..3 {
        let state = stage.state_at_energy(j, 1.0, 0.05, energy)?;
        let p = local_d_second(&stage.solver, &state)?.p;
        let r = analyze_state(&ops, &state, p)?;
        println!(
            "branch {j} at E = {energy}: n(L-) = {}, n(L+) = {}, p = {p}, sigma_max = {:.3e}, {} quartet(s) -> {}",
            r.lpm.n_minus,
            r.lpm.n_plus,
            r.jl.sigma_max,
            r.jl.quartets.len(),
            r.verdict.as_str()
        );
        for q in &r.jl.quartets {
            println!("    quartet {:.5} {:+.5}i", q[0].re.abs(), q[0].im.abs());
        }
        for w in &r.warnings {
            println!("    warning: {w}");
        }
    }
    Ok(())
}
