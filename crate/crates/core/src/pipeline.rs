//! Stage wiring shared by the CLI, the examples and the acceptance suite:
//! linear seeds on a mesh, γ-continuation to the nonlinear problem, branch
//! tracing and bound states at a prescribed energy.

use rayon::prelude::*;

use crate::bound_states::{
    d_second_sign, gamma_continuation, solve_at_energy, trace_branch, BoundState, BranchCurve, BranchSample, BvpSolver,
    DSecondReport, GammaPath, NewtonOptions, TraceOptions, GRID_RATIO,
};
use crate::error::{Error, Result};
use crate::fem::{assemble, AssembledOperators, RadialMesh};
use crate::linear::{solve_linear_states, LinearEigenpair};
use crate::potential::PotentialSpec;

/// Linear seeds and the collocation solver on one mesh.
pub struct BranchStage {
    pub ops: AssembledOperators,
    pub solver: BvpSolver,
    pub linear: Vec<LinearEigenpair>,
}

impl BranchStage {
    /// Computes the lowest `count` linear states on a sinh mesh.
    pub fn new(potential: &PotentialSpec, n: usize, r_max: f64, count: usize) -> Result<Self> {
        let mesh = RadialMesh::sinh(n, r_max)?;
        let ops = assemble(&mesh, potential)?;
        let linear = solve_linear_states(&ops, count)?;
        let solver = BvpSolver::new(potential, mesh.nodes());
        Ok(BranchStage { ops, solver, linear })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.solver.options = NewtonOptions {
            tolerance,
            ..self.solver.options
        };
        self
    }

    pub fn potential(&self) -> &PotentialSpec {
        self.solver.potential()
    }

    fn pair(&self, branch: usize) -> Result<&LinearEigenpair> {
        self.linear.get(branch).ok_or(Error::InsufficientDomain {
            requested: branch + 1,
            found: self.linear.len(),
        })
    }

    pub fn linear_energy(&self, branch: usize) -> Result<f64> {
        Ok(self.pair(branch)?.energy())
    }

    /// Fixed-mass continuation `γ: 0 → 1` of branch `branch`.
    pub fn continue_gamma(&self, branch: usize, mass: f64, step: f64) -> Result<GammaPath> {
        let seed = BoundState::from_linear(self.pair(branch)?, &self.ops, mass)?;
        gamma_continuation(&self.solver, &seed, mass, step, 1.0)
    }

    /// Continuation for several branches in parallel, in input order.
    pub fn continue_all(&self, branches: &[usize], mass: f64, step: f64) -> Vec<Result<GammaPath>> {
        branches
            .par_iter()
            .map(|&j| self.continue_gamma(j, mass, step))
            .collect()
    }

    pub fn trace(&self, path: &GammaPath, options: TraceOptions) -> Result<BranchCurve> {
        trace_branch(&self.solver, &path.state, self.linear_energy(path.state.branch)?, options)
    }

    /// The γ = 1 state of `branch` at `energy`, reached from the mass-`mass`
    /// state by geometric energy steps.
    pub fn state_at_energy(&self, branch: usize, mass: f64, step: f64, energy: f64) -> Result<BoundState> {
        let path = self.continue_gamma(branch, mass, step)?;
        solve_at_energy(&self.solver, &path.state, energy)
    }
}

/// `p(d'')` from the mass at `E/q`, `E`, `E q` with `q` the branch grid ratio.
pub fn local_d_second(solver: &BvpSolver, state: &BoundState) -> Result<DSecondReport> {
    let below = solve_at_energy(solver, state, state.energy / GRID_RATIO)?;
    let above = solve_at_energy(solver, state, state.energy * GRID_RATIO)?;
    let sample = |s: &BoundState| BranchSample {
        energy: s.energy,
        mass: s.mass(),
        hamiltonian: s.hamiltonian(solver.potential()),
        nodes: s.branch,
        residual: s.residual,
    };
    d_second_sign(&[sample(&below), sample(state), sample(&above)])
}
