use faer::Mat;

use crate::bound_states::BoundState;
use crate::error::{Error, Result};
use crate::fem::{solve_stationary, weighted_overlap, AssembledOperators, DiscreteState, Nonlinearity};
use crate::linalg::{SymTridiag, TridiagCholesky};

/// Interpolates `state` onto the mesh of `ops` and re-solves the discrete
/// stationary equations (Galerkin products) at fixed `E`.
pub fn polish_on_mesh(ops: &AssembledOperators, state: &BoundState) -> Result<DiscreteState> {
    solve_stationary(ops, state.energy, &state.sample_u(ops.mesh()), Nonlinearity::Galerkin)
}

/// Discretized linearization about a real bound state:
/// `L₋ = K + E M + V − U(w)` (tridiagonal, Dirichlet block),
/// `T = I U(u) K_rob⁻¹ U(u) I`, `L₊ = L₋ − 2T`.
#[derive(Debug, Clone)]
pub struct LinearizationMatrices {
    pub energy: f64,
    pub l_minus: SymTridiag,
    pub t: Mat<f64>,
    pub l_plus: Mat<f64>,
    pub m_dir: SymTridiag,
}

impl LinearizationMatrices {
    pub fn assemble(ops: &AssembledOperators, state: &DiscreteState) -> Result<Self> {
        let n = ops.n_dir();
        let uw = weighted_overlap(ops.mesh(), &state.w).leading(n);
        let mut l_minus = ops.h_dir().add_scaled(state.energy, &ops.m_dir());
        l_minus = l_minus.add_scaled(-1.0, &uw);
        let t = assemble_t(ops, &state.u)?;
        let mut l_plus = l_minus.to_dense();
        for j in 0..n {
            for i in 0..n {
                l_plus[(i, j)] -= 2.0 * t[(i, j)];
            }
        }
        Ok(LinearizationMatrices {
            energy: state.energy,
            l_minus,
            t,
            l_plus,
            m_dir: ops.m_dir(),
        })
    }

    pub fn dim(&self) -> usize {
        self.l_minus.len()
    }

    pub fn mass_factor(&self) -> Result<TridiagCholesky> {
        TridiagCholesky::new(&self.m_dir)
            .map_err(|e| Error::LinearAlgebra(format!("mass matrix not positive definite: {e}")))
    }

    /// `‖L₋ u‖_{M⁻¹} / ‖u‖_M`, zero for the exact discrete bound state.
    pub fn kernel_residual(&self, u: &[f64]) -> Result<f64> {
        let n = self.dim();
        let lu = self.l_minus.matvec(&u[..n]);
        let chol = self.mass_factor()?;
        let minv = chol.solve(&lu);
        let num: f64 = lu.iter().zip(&minv).map(|(a, b)| a * b).sum();
        let den = self.m_dir.bilinear(&u[..n], &u[..n]);
        if den == 0.0 {
            return Err(Error::UndefinedProfile);
        }
        Ok((num / den).sqrt())
    }

    /// `‖A − Aᵀ‖_F / ‖A‖_F` of `L₊` (and of `T` through it).
    pub fn asymmetry(m: &Mat<f64>) -> f64 {
        let n = m.nrows();
        let (mut d, mut s) = (0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                d += (m[(i, j)] - m[(j, i)]).powi(2);
                s += m[(i, j)].powi(2);
            }
        }
        if s == 0.0 {
            0.0
        } else {
            (d / s).sqrt()
        }
    }
}

/// Dense `I U K_rob⁻¹ U I` built column by column with the stored
/// Cholesky factor of `K_rob`.
pub fn assemble_t(ops: &AssembledOperators, u: &[f64]) -> Result<Mat<f64>> {
    let n = ops.n_dir();
    if u.len() != n + 1 {
        return Err(Error::Domain(format!(
            "profile has length {}, mesh has {} nodes",
            u.len(),
            n + 1
        )));
    }
    let uu = weighted_overlap(ops.mesh(), u);
    let chol = ops.k_rob_factor();
    let mut t = Mat::<f64>::zeros(n, n);
    let mut x = vec![0.0; n + 1];
    for j in 0..n {
        x.iter_mut().for_each(|v| *v = 0.0);
        x[j] = uu.diag[j];
        if j > 0 {
            x[j - 1] = uu.off[j - 1];
        }
        x[j + 1] = uu.off[j];
        let psi = chol.solve(&x);
        let col = uu.matvec(&psi);
        for i in 0..n {
            t[(i, j)] = col[i];
        }
    }
    // remove round-off asymmetry
    for j in 0..n {
        for i in 0..j {
            let s = 0.5 * (t[(i, j)] + t[(j, i)]);
            t[(i, j)] = s;
            t[(j, i)] = s;
        }
    }
    Ok(t)
}

/// `T x` without forming `T`: solve `K_rob ψ = U x`, then restrict `U ψ`.
pub fn apply_t(ops: &AssembledOperators, u: &[f64], x: &[f64]) -> Vec<f64> {
    let n = ops.n_dir();
    let uu = weighted_overlap(ops.mesh(), u);
    let mut full = x.to_vec();
    full.resize(n + 1, 0.0);
    let psi = ops.k_rob_factor().solve(&uu.matvec(&full));
    let mut out = uu.matvec(&psi);
    out.truncate(n);
    out
}
