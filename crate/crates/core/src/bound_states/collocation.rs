//! Three-stage Lobatto IIIA collocation (Simpson / Hermite–Simpson, fourth
//! order) for the radial system, solved by damped Newton on a banded
//! Jacobian.
//!
//! Unknowns are node-major, `x[d i + k]`; with a prescribed mass the energy
//! is carried as a sixth component with `E' = 0`, which keeps the Jacobian
//! banded. Rows: three left conditions, `d` per interval, then the right
//! conditions.

use crate::bound_states::ode::{boundary_residuals, rhs_and_jacobian, robin_coefficient, Constraint, STATE_DIM};
use crate::bound_states::state::BoundState;
use crate::error::{Error, Result};
use crate::fem::count_zero_crossings;
use crate::linalg::BandedMatrix;
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Bound on `|res| / (h (1 + |f_mid|))` over all collocation rows.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Smallest accepted damping factor.
    pub min_damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 40,
            min_damping: 1.0 / 1024.0,
        }
    }
}

/// Collocation discretization on fixed nodes for one potential.
#[derive(Debug, Clone)]
pub struct BvpSolver {
    potential: PotentialSpec,
    charge: f64,
    r: Vec<f64>,
    v_nodes: Vec<f64>,
    v_mid: Vec<f64>,
    pub options: NewtonOptions,
}

struct Evaluation {
    res: Vec<f64>,
    scaled: f64,
    jac: Option<BandedMatrix>,
}

impl BvpSolver {
    pub fn new(potential: &PotentialSpec, nodes: &[f64]) -> Self {
        let v_nodes = nodes.iter().map(|&r| potential.value_unchecked(r)).collect();
        let v_mid = nodes
            .windows(2)
            .map(|w| potential.value_unchecked(0.5 * (w[0] + w[1])))
            .collect();
        Self {
            potential: potential.clone(),
            charge: potential.charge(),
            r: nodes.to_vec(),
            v_nodes,
            v_mid,
            options: NewtonOptions::default(),
        }
    }

    pub fn with_options(mut self, options: NewtonOptions) -> Self {
        self.options = options;
        self
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    /// Residuals of the boundary conditions of a state.
    pub fn boundary_residuals(&self, state: &BoundState, constraint: Constraint) -> Result<Vec<f64>> {
        let n = state.n_nodes() - 1;
        boundary_residuals(
            &state.node(0),
            &state.node(n),
            state.energy,
            constraint,
            state.r_max(),
            self.charge,
            state.gamma,
        )
    }

    /// Max scaled collocation residual of `state` (energy and γ as stored).
    pub fn collocation_residual(&self, state: &BoundState) -> Result<f64> {
        let constraint = Constraint::FixedEnergy(state.energy);
        let x = self.pack(state, constraint);
        Ok(self.evaluate(&x, state.gamma, constraint, false)?.scaled)
    }

    /// Newton solve from `guess` at homotopy parameter `gamma`.
    pub fn solve(&self, guess: &BoundState, gamma: f64, constraint: Constraint) -> Result<BoundState> {
        if guess.r != self.r {
            return Err(Error::Domain("guess lives on a different mesh".into()));
        }
        let mut x = self.pack(guess, constraint);
        let opts = self.options;
        let mut last = f64::INFINITY;
        for iteration in 0..=opts.max_iterations {
            let eval = self.evaluate(&x, gamma, constraint, true)?;
            last = eval.scaled;
            if eval.scaled < opts.tolerance {
                // One extra full step: the tolerance is absolute, so small
                // amplitudes would otherwise keep a large relative error.
                let (x, scaled) = self.polish(x, eval, gamma, constraint);
                return self.unpack(&x, guess, gamma, constraint, scaled);
            }
            if iteration == opts.max_iterations {
                break;
            }
            let lu = eval
                .jac
                .expect("jacobian requested")
                .factor()
                .map_err(|e| Error::SingularJacobian(e.to_string()))?;
            let dx = lu.solve(&eval.res);
            if dx.iter().any(|d| !d.is_finite()) {
                return Err(Error::SingularJacobian("non-finite Newton step".into()));
            }
            let norm0 = norm2(&eval.res);
            let mut lambda = 1.0;
            loop {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a - lambda * b).collect();
                let ok = match self.evaluate(&trial, gamma, constraint, false) {
                    Ok(t) => norm2(&t.res) <= (1.0 - 1e-4 * lambda) * norm0 || t.scaled < opts.tolerance,
                    Err(_) => false,
                };
                if ok {
                    x = trial;
                    break;
                }
                lambda *= 0.5;
                if lambda < opts.min_damping {
                    return Err(Error::Convergence {
                        iterations: iteration + 1,
                        residual: eval.scaled,
                    });
                }
            }
        }
        Err(Error::Convergence {
            iterations: opts.max_iterations,
            residual: last,
        })
    }

    fn polish(&self, x: Vec<f64>, eval: Evaluation, gamma: f64, constraint: Constraint) -> (Vec<f64>, f64) {
        let Some(Ok(lu)) = eval.jac.map(|j| j.factor()) else {
            return (x, eval.scaled);
        };
        let dx = lu.solve(&eval.res);
        let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a - b).collect();
        match self.evaluate(&trial, gamma, constraint, false) {
            Ok(t) if t.scaled.is_finite() && norm2(&t.res) <= norm2(&eval.res) => (trial, t.scaled),
            _ => (x, eval.scaled),
        }
    }

    fn pack(&self, state: &BoundState, constraint: Constraint) -> Vec<f64> {
        let d = constraint.dim();
        let mut x = Vec::with_capacity(d * state.n_nodes());
        for i in 0..state.n_nodes() {
            x.extend_from_slice(&state.node(i));
            if d > STATE_DIM {
                x.push(state.energy);
            }
        }
        x
    }

    fn unpack(
        &self,
        x: &[f64],
        template: &BoundState,
        gamma: f64,
        constraint: Constraint,
        residual: f64,
    ) -> Result<BoundState> {
        let d = constraint.dim();
        let mut s = template.clone();
        for i in 0..s.n_nodes() {
            s.set_node(i, &x[d * i..d * i + STATE_DIM]);
        }
        s.energy = match constraint {
            Constraint::FixedMass(_) => x[STATE_DIM],
            Constraint::FixedEnergy(e) => e,
        };
        s.gamma = gamma;
        s.residual = residual;
        s.check_profile()?;
        s.branch = count_zero_crossings(&s.u)?;
        Ok(s)
    }

    fn evaluate(&self, x: &[f64], gamma: f64, constraint: Constraint, with_jac: bool) -> Result<Evaluation> {
        let d = constraint.dim();
        let n = self.r.len() - 1;
        let size = d * (n + 1);
        let (kl, ku) = (d + 2, 2 * d - 4);
        let energy_at = |i: usize| match constraint {
            Constraint::FixedMass(_) => x[d * i + STATE_DIM],
            Constraint::FixedEnergy(e) => e,
        };
        let node = |i: usize| -> [f64; STATE_DIM] {
            let mut y = [0.0; STATE_DIM];
            y.copy_from_slice(&x[d * i..d * i + STATE_DIM]);
            y
        };
        let mut res = vec![0.0; size];
        let mut jac = with_jac.then(|| BandedMatrix::zeros(size, kl, ku));
        let mut scaled = 0.0f64;

        let evals: Vec<([f64; 6], [[f64; 6]; 6])> = (0..=n)
            .map(|i| rhs_and_jacobian(&node(i), self.r[i], self.v_nodes[i], gamma, energy_at(i)))
            .collect();

        for i in 0..n {
            let h = self.r[i + 1] - self.r[i];
            let (y0, y1) = (node(i), node(i + 1));
            let (e0, e1) = (energy_at(i), energy_at(i + 1));
            let (f0, j0) = &evals[i];
            let (f1, j1) = &evals[i + 1];
            let mut ym = [0.0; STATE_DIM];
            for k in 0..STATE_DIM {
                ym[k] = 0.5 * (y0[k] + y1[k]) - h / 8.0 * (f1[k] - f0[k]);
            }
            let em = 0.5 * (e0 + e1);
            let rm = 0.5 * (self.r[i] + self.r[i + 1]);
            let (fm, jm) = rhs_and_jacobian(&ym, rm, self.v_mid[i], gamma, em);
            let row0 = 3 + d * i;
            for k in 0..d {
                let (a, b) = (
                    if k < STATE_DIM { y0[k] } else { e0 },
                    if k < STATE_DIM { y1[k] } else { e1 },
                );
                let r = b - a - h / 6.0 * (f0[k] + 4.0 * fm[k] + f1[k]);
                res[row0 + k] = r;
                scaled = scaled.max(r.abs() / (h * (1.0 + fm[k].abs())));
            }
            if let Some(jac) = jac.as_mut() {
                // ∂y_m/∂y_i = I/2 + h/8 J_i, ∂y_m/∂y_{i+1} = I/2 - h/8 J_{i+1}
                for k in 0..d {
                    for c in 0..d {
                        let mut left = 0.0;
                        let mut right = 0.0;
                        for l in 0..d {
                            let dl = if l == c { 0.5 } else { 0.0 };
                            left += jm[k][l] * (dl + h / 8.0 * j0[l][c]);
                            right += jm[k][l] * (dl - h / 8.0 * j1[l][c]);
                        }
                        let id = if k == c { 1.0 } else { 0.0 };
                        let a = -id - h / 6.0 * (j0[k][c] + 4.0 * left);
                        let b = id - h / 6.0 * (j1[k][c] + 4.0 * right);
                        if a != 0.0 {
                            jac.add(row0 + k, d * i + c, a);
                        }
                        if b != 0.0 {
                            jac.add(row0 + k, d * (i + 1) + c, b);
                        }
                    }
                }
            }
        }

        // Left: v(0), z(0), m(0).
        res[0] = x[1];
        res[1] = x[3];
        res[2] = x[4];
        // Right.
        let base = d * n;
        let e_n = energy_at(n);
        if !(e_n > 0.0) {
            return Err(Error::Domain(format!("energy left the domain E > 0 ({e_n:e})")));
        }
        let [u, v, w, z, m] = node(n);
        let r_max = self.r[n];
        let q = self.charge + gamma * m;
        let c = robin_coefficient(e_n, r_max, q);
        let mut row = 3 + d * n;
        if let Constraint::FixedMass(target) = constraint {
            res[row] = m - target;
            row += 1;
        }
        res[row] = z + w / r_max;
        res[row + 1] = v + c * u;
        for k in 0..(size - 3 - d * n) {
            scaled = scaled.max(res[3 + d * n + k].abs());
        }
        scaled = scaled.max(res[0].abs()).max(res[1].abs()).max(res[2].abs());

        if let Some(jac) = jac.as_mut() {
            jac.add(0, 1, 1.0);
            jac.add(1, 3, 1.0);
            jac.add(2, 4, 1.0);
            let mut row = 3 + d * n;
            if matches!(constraint, Constraint::FixedMass(_)) {
                jac.add(row, base + 4, 1.0);
                row += 1;
            }
            jac.add(row, base + 3, 1.0);
            jac.add(row, base + 2, 1.0 / r_max);
            let k = e_n.sqrt();
            jac.add(row + 1, base + 1, 1.0);
            jac.add(row + 1, base, c);
            // ∂c/∂m = -γ/(2 r_max √E)
            jac.add(row + 1, base + 4, -gamma / (2.0 * r_max * k) * u);
            if d > STATE_DIM {
                // ∂c/∂E = 1/(2√E) + Q/(4 r_max E^{3/2})
                let dc = 0.5 / k + q / (4.0 * r_max * e_n * k);
                jac.add(row + 1, base + STATE_DIM, dc * u);
            }
        }
        Ok(Evaluation { res, scaled, jac })
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
