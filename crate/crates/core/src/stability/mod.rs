//! Linearization about bound states: `L±`, the nonlocal matrix `T`, the
//! block generator `JL`, the GSS classifier and the unstable-eigenvalue bound.

mod bound;
mod linearization;
mod spectrum;
mod transition;

pub use bound::{unstable_bound, BoundConstants, UnstableBound, C_GN_SHARP, C_HLS_SHARP};
pub use linearization::{apply_t, assemble_t, polish_on_mesh, LinearizationMatrices};
pub use spectrum::{
    classify, negative_counts, spectra_lpm, spectrum_jl, JlSpectrum, LpmSpectrum, SpectrumReport, Verdict,
    NEGATIVE_THRESHOLD, SPURIOUS_LIMIT, SYMMETRY_TOLERANCE, UNSTABLE_THRESHOLD,
};
pub use transition::{spurious_retest, transition_scan, SpuriousMode, TransitionPoint, TransitionScan};

use crate::bound_states::BoundState;
use crate::error::Result;
use crate::fem::AssembledOperators;

/// Smallest `|μ(L₊)| / max |μ(L₊)|` accepted without a kernel warning.
pub const KERNEL_GAP: f64 = 1e-8;

/// Full spectral analysis of one bound state on the mesh of `ops`.
pub fn analyze_state(ops: &AssembledOperators, state: &BoundState, p: u8) -> Result<SpectrumReport> {
    let fem = polish_on_mesh(ops, state)?;
    let lin = LinearizationMatrices::assemble(ops, &fem)?;
    let lpm = spectra_lpm(&lin)?;
    let jl = spectrum_jl(&lin, fem.is_trivial())?;
    let kernel_residual = lin.kernel_residual(&fem.u)?;
    let verdict = classify(lpm.n_minus, lpm.n_plus, Some(p), Some(jl.sigma_max), state.energy)?;
    let mut warnings = Vec::new();
    if lpm.plus_kernel_gap < KERNEL_GAP {
        warnings.push(format!(
            "branch integrity: L+ nearly singular (min |mu| / max |mu| = {:.3e})",
            lpm.plus_kernel_gap
        ));
    }
    if jl.symmetry_defect > SYMMETRY_TOLERANCE {
        warnings.push(format!("JL symmetry defect {:.3e}", jl.symmetry_defect));
    }
    if !jl.small_real.is_empty() {
        warnings.push(format!(
            "{} small real JL eigenvalue(s) below {SPURIOUS_LIMIT:e}; re-test under refinement",
            jl.small_real.len()
        ));
    }
    Ok(SpectrumReport {
        branch: state.branch,
        energy: state.energy,
        lpm,
        jl,
        p,
        verdict,
        kernel_residual,
        warnings,
    })
}
