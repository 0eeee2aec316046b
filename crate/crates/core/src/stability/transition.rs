use serde::{Deserialize, Serialize};

use crate::bound_states::{solve_at_energy, BoundState, BranchCurve, BvpSolver};
use crate::error::{Error, Result};
use crate::fem::{assemble, AssembledOperators};
use crate::potential::PotentialNorms;
use crate::stability::bound::{unstable_bound, BoundConstants, UnstableBound};
use crate::stability::linearization::{polish_on_mesh, LinearizationMatrices};
use crate::stability::spectrum::{spectrum_jl, UNSTABLE_THRESHOLD};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionPoint {
    pub energy: f64,
    pub mass: f64,
    pub sigma_max: f64,
    pub bound: UnstableBound,
    pub n_minus: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionScan {
    pub branch: usize,
    /// Sorted by energy.
    pub points: Vec<TransitionPoint>,
    /// Bracket `[E_stable, E_unstable]` around the first threshold crossing.
    pub bracket: Option<(f64, f64)>,
}

impl TransitionScan {
    pub fn crossing(&self) -> Option<f64> {
        self.bracket.map(|(a, b)| 0.5 * (a + b))
    }
}

fn is_unstable(p: &TransitionPoint) -> bool {
    p.sigma_max > UNSTABLE_THRESHOLD * (1.0 + p.energy)
}

fn scan_point(
    ops: &AssembledOperators,
    solver: &BvpSolver,
    curve: &BranchCurve,
    energy: f64,
    norms: &PotentialNorms,
    constants: BoundConstants,
) -> Result<TransitionPoint> {
    let state = solve_at_energy(solver, curve.nearest(energy), energy)?;
    let fem = polish_on_mesh(ops, &state)?;
    let lin = LinearizationMatrices::assemble(ops, &fem)?;
    let jl = spectrum_jl(&lin, fem.is_trivial())?;
    Ok(TransitionPoint {
        energy,
        mass: state.mass(),
        sigma_max: jl.sigma_max.max(0.0),
        bound: unstable_bound(&state, solver.potential(), norms, constants),
        n_minus: lin.l_minus.count_below(&lin.m_dir, -1e-10),
    })
}

/// `σ_max(E)` along one branch on the mesh of `ops`, with bisection of the
/// first stable-to-unstable bracket down to width `tolerance`.
pub fn transition_scan(
    ops: &AssembledOperators,
    solver: &BvpSolver,
    curve: &BranchCurve,
    energies: &[f64],
    tolerance: f64,
    norms: &PotentialNorms,
    constants: BoundConstants,
) -> Result<TransitionScan> {
    if energies.is_empty() {
        return Err(Error::Range("transition scan needs at least one energy".into()));
    }
    let (lo, hi) = curve.energy_range();
    if let Some(e) = energies.iter().find(|&&e| !(e >= lo && e <= hi)) {
        return Err(Error::Range(format!(
            "scan energy {e} outside the traced branch range [{lo}, {hi}]"
        )));
    }
    let mut points = energies
        .iter()
        .map(|&e| scan_point(ops, solver, curve, e, norms, constants))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let mut bracket = points
        .windows(2)
        .find(|w| !is_unstable(&w[0]) && is_unstable(&w[1]))
        .map(|w| (w[0].energy, w[1].energy));
    while let Some((lo, hi)) = bracket {
        if hi - lo <= tolerance {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let p = scan_point(ops, solver, curve, mid, norms, constants)?;
        bracket = Some(if is_unstable(&p) { (lo, mid) } else { (mid, hi) });
        points.push(p);
    }
    points.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(TransitionScan {
        branch: curve.branch,
        points,
        bracket,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpuriousMode {
    pub coarse: f64,
    pub fine: Option<f64>,
    /// Shrinks by more than half (or disappears) under refinement.
    pub flagged: bool,
}

/// Re-tests the small purely real JL eigenvalues of `state` on the bisected
/// mesh.
pub fn spurious_retest(ops: &AssembledOperators, state: &BoundState) -> Result<Vec<SpuriousMode>> {
    let jl_on = |ops: &AssembledOperators| -> Result<Vec<f64>> {
        let fem = polish_on_mesh(ops, state)?;
        let lin = LinearizationMatrices::assemble(ops, &fem)?;
        Ok(spectrum_jl(&lin, fem.is_trivial())?.small_real)
    };
    let coarse = jl_on(ops)?;
    if coarse.is_empty() {
        return Ok(Vec::new());
    }
    let fine_ops = assemble(&ops.mesh().bisected(), ops.potential())?;
    let fine = jl_on(&fine_ops)?;
    Ok(coarse
        .iter()
        .map(|&c| {
            let f = fine
                .iter()
                .copied()
                .min_by(|a, b| (a - c).abs().total_cmp(&(b - c).abs()));
            let flagged = f.map_or(true, |f| f < 0.5 * c);
            SpuriousMode {
                coarse: c,
                fine: f,
                flagged,
            }
        })
        .collect())
}
