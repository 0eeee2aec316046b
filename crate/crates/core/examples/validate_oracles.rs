//! The oracle suite behind `radial-sp validate`.

use radial_sp::cli::commands::oracle_checks;
use radial_sp::cli::RunConfig;

fn main() -> radial_sp::Result<()> {
    let checks = oracle_checks(&RunConfig::default())?;
    for (name, value, tolerance, pass) in &checks {
        println!("{} {name:<22} {value:.3e} (tolerance {tolerance:.0e})", if *pass { "pass" } else { "FAIL" });
    }
    Ok(())
}
