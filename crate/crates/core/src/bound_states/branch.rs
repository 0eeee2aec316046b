use serde::{Deserialize, Serialize};

use crate::bound_states::collocation::BvpSolver;
use crate::bound_states::ode::Constraint;
use crate::bound_states::state::BoundState;
use crate::error::{Error, Result};

/// One accepted step of a γ-continuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaStep {
    pub gamma: f64,
    pub energy: f64,
    pub mass: f64,
    pub nodes: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct GammaPath {
    pub steps: Vec<GammaStep>,
    pub state: BoundState,
}

/// Fixed-mass continuation in `γ` from `seed` (solved first at `γ = 0`) to
/// `gamma_end`. Steps of `step` are halved on failure down to `step / 4`;
/// the zero-crossing count must not change along the way.
pub fn gamma_continuation(
    solver: &BvpSolver,
    seed: &BoundState,
    mass: f64,
    step: f64,
    gamma_end: f64,
) -> Result<GammaPath> {
    if !(step > 0.0 && step <= 0.2) {
        return Err(Error::Config(format!("γ step must lie in (0, 0.2], got {step}")));
    }
    if !(0.0..=1.0).contains(&gamma_end) {
        return Err(Error::Config(format!("γ end must lie in [0, 1], got {gamma_end}")));
    }
    let constraint = Constraint::FixedMass(mass);
    let wrap = |gamma: f64| move |e: Error| Error::Continuation {
        gamma,
        source: Box::new(e),
    };
    let mut state = solver.solve(seed, 0.0, constraint).map_err(wrap(0.0))?;
    let nodes = seed.branch;
    if state.branch != nodes {
        return Err(Error::BranchIntegrity(format!(
            "linear solve changed node count {nodes} -> {}",
            state.branch
        )));
    }
    let record = |s: &BoundState| GammaStep {
        gamma: s.gamma,
        energy: s.energy,
        mass: s.mass(),
        nodes: s.branch,
        residual: s.residual,
    };
    let mut steps = vec![record(&state)];
    let min_step = step / 4.0 - 1e-15;
    let mut gamma = 0.0;
    let mut h = step;
    while gamma < gamma_end - 1e-12 {
        let target = (gamma + h).min(gamma_end);
        match solver.solve(&state, target, constraint) {
            Ok(next) => {
                if next.branch != nodes {
                    return Err(Error::BranchIntegrity(format!(
                        "node count changed {nodes} -> {} at γ = {target}",
                        next.branch
                    )));
                }
                steps.push(record(&next));
                state = next;
                gamma = target;
            }
            Err(e) => {
                h *= 0.5;
                if h < min_step {
                    return Err(wrap(target)(e));
                }
            }
        }
    }
    Ok(GammaPath { steps, state })
}

/// Why a branch sweep stopped in one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StopReason {
    ReachedTarget,
    TailTooLarge { energy: f64, ratio: f64 },
    NodeCountChanged { energy: f64, nodes: usize },
    MassVanished { energy: f64 },
    SolverFailed { energy: f64, message: String },
    StepLimit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchSample {
    pub energy: f64,
    pub mass: f64,
    /// `H(u)` of the state; `d(E) = H + E M`.
    pub hamiltonian: f64,
    pub nodes: usize,
    pub residual: f64,
}

/// Samples of one branch, `E` strictly increasing.
#[derive(Debug, Clone)]
pub struct BranchCurve {
    pub branch: usize,
    pub samples: Vec<BranchSample>,
    pub states: Vec<BoundState>,
    pub low_stop: StopReason,
    pub high_stop: StopReason,
}

impl BranchCurve {
    pub fn energies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.energy).collect()
    }

    pub fn energy_range(&self) -> (f64, f64) {
        let e = self.energies();
        (e[0], e[e.len() - 1])
    }

    pub fn masses(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.mass).collect()
    }

    /// Stored state with energy closest to `energy`.
    pub fn nearest(&self, energy: f64) -> &BoundState {
        self.states
            .iter()
            .min_by(|a, b| {
                (a.energy - energy)
                    .abs()
                    .partial_cmp(&(b.energy - energy).abs())
                    .expect("finite energies")
            })
            .expect("non-empty curve")
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub states: Vec<BoundState>,
    pub failure: Option<(f64, String)>,
}

/// Fixed-`E` solves along `energies`, warm-started with a secant predictor
/// from the previous two solutions. Stops at the first failure.
pub fn sweep_energy(solver: &BvpSolver, start: &BoundState, energies: &[f64]) -> SweepOutcome {
    let mut states: Vec<BoundState> = Vec::with_capacity(energies.len());
    let mut prev: Option<BoundState> = None;
    let mut cur = start.clone();
    for &e in energies {
        let guess = predict(prev.as_ref(), &cur, e);
        match solver.solve(&guess, start.gamma, Constraint::FixedEnergy(e)) {
            Ok(s) if s.branch == start.branch => {
                prev = Some(std::mem::replace(&mut cur, s.clone()));
                states.push(s);
            }
            Ok(s) => {
                return SweepOutcome {
                    states,
                    failure: Some((e, format!("node count changed to {}", s.branch))),
                }
            }
            Err(err) => {
                return SweepOutcome {
                    states,
                    failure: Some((e, err.to_string())),
                }
            }
        }
    }
    SweepOutcome {
        states,
        failure: None,
    }
}

/// Fixed-`E` solve at `energy` by geometric steps from `start`.
pub fn solve_at_energy(solver: &BvpSolver, start: &BoundState, energy: f64) -> Result<BoundState> {
    let ratio = energy / start.energy;
    let steps = ((ratio.ln().abs() / GRID_RATIO.ln()).ceil() as usize).max(1);
    let energies: Vec<f64> = (1..=steps)
        .map(|k| {
            if k == steps {
                energy
            } else {
                start.energy * ratio.powf(k as f64 / steps as f64)
            }
        })
        .collect();
    let out = sweep_energy(solver, start, &energies);
    match out.failure {
        None => Ok(out.states.into_iter().last().expect("at least one step")),
        Some((e, msg)) => Err(Error::Evaluation(format!("sweep failed at E = {e}: {msg}"))),
    }
}

fn predict(prev: Option<&BoundState>, cur: &BoundState, energy: f64) -> BoundState {
    let mut g = cur.clone();
    g.energy = energy;
    if let Some(p) = prev {
        let t = (energy - cur.energy) / (cur.energy - p.energy);
        if t.is_finite() {
            let lerp = |a: &mut Vec<f64>, b: &[f64]| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += t * (*x - y);
                }
            };
            lerp(&mut g.u, &p.u);
            lerp(&mut g.v, &p.v);
            lerp(&mut g.w, &p.w);
            lerp(&mut g.z, &p.z);
            lerp(&mut g.m, &p.m);
        }
    }
    g
}

/// Geometric E-grid ratio: 25 points per decade.
pub const GRID_RATIO: f64 = 1.096_478_196_143_185_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Upper end of the sweep.
    pub energy_max: f64,
    /// Max geometric steps towards the linear eigenvalue.
    pub max_down_steps: usize,
    pub max_up_steps: usize,
    /// Stop when `|u(r_max)| / max|u|` exceeds this.
    pub tail_limit: f64,
    /// Stop when the mass falls below this.
    pub mass_floor: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            energy_max: f64::NAN,
            max_down_steps: 100,
            max_up_steps: 200,
            tail_limit: 1e-4,
            mass_floor: 1e-6,
        }
    }
}

/// Traces the branch through `start` (γ = 1) down towards the linear
/// eigenvalue `linear_energy` on the grid `E_lin + (E* - E_lin) q^{-k}` and
/// up to `energy_max` (default `2 E*`) on `E* q^k`.
pub fn trace_branch(
    solver: &BvpSolver,
    start: &BoundState,
    linear_energy: f64,
    options: TraceOptions,
) -> Result<BranchCurve> {
    let e0 = start.energy;
    if !(e0 > linear_energy) {
        return Err(Error::Range(format!(
            "start energy {e0} must exceed the linear eigenvalue energy {linear_energy}"
        )));
    }
    let e_max = if options.energy_max.is_nan() { 2.0 * e0 } else { options.energy_max };
    let accept = |s: &BoundState| -> Option<StopReason> {
        if s.branch != start.branch {
            Some(StopReason::NodeCountChanged { energy: s.energy, nodes: s.branch })
        } else if s.tail_ratio() > options.tail_limit {
            Some(StopReason::TailTooLarge { energy: s.energy, ratio: s.tail_ratio() })
        } else if s.mass() < options.mass_floor {
            Some(StopReason::MassVanished { energy: s.energy })
        } else {
            None
        }
    };

    let down: Vec<f64> = (1..=options.max_down_steps)
        .map(|k| linear_energy + (e0 - linear_energy) * GRID_RATIO.powi(-(k as i32)))
        .collect();
    let (low_states, low_stop) = walk(solver, start, &down, &accept, options.max_down_steps);

    let mut up: Vec<f64> = Vec::new();
    let mut k = 1;
    while up.len() < options.max_up_steps {
        let e = e0 * GRID_RATIO.powi(k);
        if e >= e_max * (1.0 - 1e-12) {
            up.push(e_max);
            break;
        }
        up.push(e);
        k += 1;
    }
    let (high_states, mut high_stop) = walk(solver, start, &up, &accept, options.max_up_steps);
    if high_stop == StopReason::StepLimit && up.last() == Some(&e_max) {
        high_stop = StopReason::ReachedTarget;
    }

    let mut states: Vec<BoundState> = low_states.into_iter().rev().collect();
    states.push(start.clone());
    states.extend(high_states);
    let samples = states
        .iter()
        .map(|s| BranchSample {
            energy: s.energy,
            mass: s.mass(),
            hamiltonian: s.hamiltonian(solver.potential()),
            nodes: s.branch,
            residual: s.residual,
        })
        .collect();
    Ok(BranchCurve {
        branch: start.branch,
        samples,
        states,
        low_stop,
        high_stop,
    })
}

fn walk(
    solver: &BvpSolver,
    start: &BoundState,
    energies: &[f64],
    accept: &dyn Fn(&BoundState) -> Option<StopReason>,
    limit: usize,
) -> (Vec<BoundState>, StopReason) {
    let mut out = Vec::new();
    let mut prev: Option<BoundState> = None;
    let mut cur = start.clone();
    for &e in energies.iter().take(limit) {
        let guess = predict(prev.as_ref(), &cur, e);
        match solver.solve(&guess, start.gamma, Constraint::FixedEnergy(e)) {
            Ok(s) => {
                if let Some(reason) = accept(&s) {
                    return (out, reason);
                }
                out.push(s.clone());
                prev = Some(std::mem::replace(&mut cur, s));
            }
            Err(err) => {
                return (
                    out,
                    StopReason::SolverFailed {
                        energy: e,
                        message: err.to_string(),
                    },
                )
            }
        }
    }
    (out, StopReason::StepLimit)
}
