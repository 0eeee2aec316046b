use crate::error::{Error, Result};
use crate::fem::operators::{weighted_overlap, AssembledOperators};
use crate::linalg::{BandedMatrix, SymTridiag};

/// How the Hartree term `w u` and the density `u²` are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    /// Exact Galerkin products: `U(w) u` and `U(u) u`.
    Galerkin,
    /// Nodewise products through the mass matrix: `M (w ∘ u)` and `M (u ∘ u)`,
    /// as used by the time integrator.
    Nodal,
}

/// Discrete stationary state: nodal `u` (zero at `r_max`) and Hartree
/// potential `w` on all nodes.
#[derive(Debug, Clone)]
pub struct DiscreteState {
    pub energy: f64,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    /// Max-norm of the discrete residual at the returned iterate.
    pub residual: f64,
    pub iterations: usize,
}

impl DiscreteState {
    pub fn is_trivial(&self) -> bool {
        self.u.iter().all(|&x| x == 0.0)
    }
}

fn tri(t: &SymTridiag, i: usize, k: usize) -> f64 {
    if i == k {
        t.diag[i]
    } else {
        t.off[i.min(k)]
    }
}

struct Residual {
    fu: Vec<f64>,
    fw: Vec<f64>,
    uw: SymTridiag,
    uu: SymTridiag,
}

fn residual(ops: &AssembledOperators, a: &SymTridiag, kind: Nonlinearity, u: &[f64], w: &[f64]) -> Residual {
    let n = ops.n_dir();
    let au = a.matvec(&u[..n]);
    let kw = ops.k_rob.matvec(w);
    let (wu, uuu, uw, uu) = match kind {
        Nonlinearity::Galerkin => {
            let uw = weighted_overlap(ops.mesh(), w);
            let uu = weighted_overlap(ops.mesh(), u);
            (uw.matvec(u), uu.matvec(u), uw, uu)
        }
        Nonlinearity::Nodal => {
            let prod: Vec<f64> = w.iter().zip(u).map(|(a, b)| a * b).collect();
            let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
            let m = &ops.m_full;
            (m.matvec(&prod), m.matvec(&sq), SymTridiag::zeros(0), SymTridiag::zeros(0))
        }
    };
    Residual {
        fu: (0..n).map(|i| au[i] - wu[i]).collect(),
        fw: (0..=n).map(|i| kw[i] - uuu[i]).collect(),
        uw,
        uu,
    }
}

fn max_abs(r: &Residual) -> f64 {
    r.fu.iter().chain(&r.fw).fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Newton's method at fixed `E` for
/// `(K + V + E M)_dir u − N_u(w, u) = 0`, `K_rob w − N_w(u) = 0`.
///
/// Unknowns are interleaved (`u_i`, `w_i`) so the Jacobian is banded with
/// three sub- and super-diagonals.
pub fn solve_stationary(
    ops: &AssembledOperators,
    energy: f64,
    guess: &[f64],
    kind: Nonlinearity,
) -> Result<DiscreteState> {
    let n = ops.n_dir();
    if guess.len() != n + 1 {
        return Err(Error::Domain(format!(
            "guess has length {}, mesh has {} nodes",
            guess.len(),
            n + 1
        )));
    }
    let mut u = guess.to_vec();
    u[n] = 0.0;
    let mut w = match kind {
        Nonlinearity::Galerkin => ops.k_rob_factor().solve(&weighted_overlap(ops.mesh(), &u).matvec(&u)),
        Nonlinearity::Nodal => ops.hartree(&u)?,
    };
    let a = ops.h_dir().add_scaled(energy, &ops.m_dir());
    let m = &ops.m_full;
    let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let iu = |i: usize| 2 * i;
    let iw = |i: usize| if i < n { 2 * i + 1 } else { 2 * n };
    let max_iterations = 30;
    let mut res = residual(ops, &a, kind, &u, &w);
    for it in 0..max_iterations {
        // nonlinear Jacobian parts at (i, k), |i − k| ≤ 1:
        // d(N_u)_i/du_k, d(N_u)_i/dw_k, d(N_w)_i/du_k
        let parts = |i: usize, k: usize| -> (f64, f64, f64) {
            match kind {
                Nonlinearity::Galerkin => {
                    let s = tri(&res.uu, i, k);
                    (tri(&res.uw, i, k), s, 2.0 * s)
                }
                Nonlinearity::Nodal => {
                    let mk = tri(m, i, k);
                    (mk * w[k], mk * u[k], 2.0 * mk * u[k])
                }
            }
        };
        let dim = 2 * n + 1;
        let mut jac = BandedMatrix::zeros(dim, 3, 3);
        let mut rhs = vec![0.0; dim];
        for i in 0..=n {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n);
            if i < n {
                rhs[iu(i)] = -res.fu[i];
            }
            rhs[iw(i)] = -res.fw[i];
            for k in lo..=hi {
                let (xuu, yuw, zwu) = parts(i, k);
                if i < n {
                    if k < n {
                        jac.add(iu(i), iu(k), tri(&a, i, k) - xuu);
                    }
                    jac.add(iu(i), iw(k), -yuw);
                }
                if k < n {
                    jac.add(iw(i), iu(k), -zwu);
                }
                jac.add(iw(i), iw(k), tri(&ops.k_rob, i, k));
            }
        }
        let lu = jac
            .factor()
            .map_err(|e| Error::SingularJacobian(format!("stationary solve: {e}")))?;
        let dx = lu.solve(&rhs);
        let mut step: f64 = 0.0;
        for i in 0..n {
            u[i] += dx[iu(i)];
            step = step.max(dx[iu(i)].abs());
        }
        for i in 0..=n {
            w[i] += dx[iw(i)];
        }
        if !u.iter().chain(&w).all(|x| x.is_finite()) {
            return Err(Error::Evaluation("stationary solve produced non-finite values".into()));
        }
        res = residual(ops, &a, kind, &u, &w);
        if step <= 1e-10 * scale {
            return Ok(DiscreteState {
                energy,
                residual: max_abs(&res),
                u,
                w,
                iterations: it + 1,
            });
        }
    }
    Err(Error::Convergence {
        iterations: max_iterations,
        residual: max_abs(&res),
    })
}
