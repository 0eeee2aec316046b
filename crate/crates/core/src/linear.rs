//! Bound states of the linear operator `-Δ + V` on the Dirichlet FEM space.
//!
//! Eigenvalues of the pencil `(K + V, M)` are isolated by Sturm bisection on
//! the inertia of `K + V - μM`, then refined by shifted inverse iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{count_zero_crossings, with_boundary_zero, AssembledOperators};
use crate::linalg::{BandedMatrix, SymTridiag};

/// Eigenvalues in `[-CONTINUUM_FLOOR, 0)` are treated as discretized continuum.
pub const CONTINUUM_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearEigenpair {
    /// Eigenvalue `-E < 0`.
    pub eigenvalue: f64,
    /// Nodal eigenvector on all mesh nodes (zero at `r_max`), `uᵀMu = 1`.
    pub vector: Vec<f64>,
    pub nodes: usize,
}

impl LinearEigenpair {
    pub fn energy(&self) -> f64 {
        -self.eigenvalue
    }
}

/// Number of eigenvalues of `(K + V)x = λMx` below `-CONTINUUM_FLOOR`.
pub fn count_bound_states(ops: &AssembledOperators) -> usize {
    ops.h_dir().count_below(&ops.m_dir(), -CONTINUUM_FLOOR)
}

/// The `k` lowest eigenpairs, sorted by increasing eigenvalue.
pub fn solve_linear_states(ops: &AssembledOperators, k: usize) -> Result<Vec<LinearEigenpair>> {
    if k == 0 {
        return Err(Error::Config("requested zero linear states".into()));
    }
    let a = ops.h_dir();
    let b = ops.m_dir();
    let found = a.count_below(&b, -CONTINUUM_FLOOR);
    if found < k {
        return Err(Error::InsufficientDomain {
            requested: k,
            found,
        });
    }
    let mut lo = -1.0;
    while a.count_below(&b, lo) > 0 {
        lo *= 2.0;
        if !lo.is_finite() {
            return Err(Error::LinearAlgebra("eigenvalue bracket diverged".into()));
        }
    }
    (0..k)
        .map(|j| {
            let mu = bisect(&a, &b, j, lo, -CONTINUUM_FLOOR);
            let (eigenvalue, x) = inverse_iteration(&a, &b, mu)?;
            let vector = with_boundary_zero(&x);
            let nodes = count_zero_crossings(&vector)?;
            Ok(LinearEigenpair {
                eigenvalue,
                vector,
                nodes,
            })
        })
        .collect()
}

/// `j`-th eigenvalue (0-based) inside `[lo, hi]` by inertia bisection.
fn bisect(a: &SymTridiag, b: &SymTridiag, j: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if a.count_below(b, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * mid.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn inverse_iteration(a: &SymTridiag, b: &SymTridiag, mu: f64) -> Result<(f64, Vec<f64>)> {
    let n = a.len();
    let shift = mu - 1e-10 * mu.abs().max(1e-12);
    let mut band = BandedMatrix::zeros(n, 1, 1);
    for i in 0..n {
        band.add(i, i, a.diag[i] - shift * b.diag[i]);
        if i + 1 < n {
            let o = a.off[i] - shift * b.off[i];
            band.add(i, i + 1, o);
            band.add(i + 1, i, o);
        }
    }
    let lu = band.factor()?;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 1e-3 * (i % 7) as f64).collect();
    let mut rayleigh = mu;
    for _ in 0..6 {
        let rhs = b.matvec(&x);
        x = lu.solve(&rhs);
        let norm = b.bilinear(&x, &x).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::LinearAlgebra("inverse iteration broke down".into()));
        }
        x.iter_mut().for_each(|v| *v /= norm);
        rayleigh = a.bilinear(&x, &x);
    }
    if x[0] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    Ok((rayleigh, x))
}

/// Checks that node counts strictly increase with the eigenvalue and that no
/// eigenvalue is repeated within `1e-10` relative.
pub fn sturm_check(pairs: &[LinearEigenpair]) -> Result<()> {
    for (i, w) in pairs.windows(2).enumerate() {
        let (p, q) = (&w[0], &w[1]);
        if (q.eigenvalue - p.eigenvalue).abs() <= 1e-10 * p.eigenvalue.abs() {
            return Err(Error::SpectralStructure(format!(
                "eigenvalues {} and {} coincide ({:e})",
                i,
                i + 1,
                p.eigenvalue
            )));
        }
        if q.eigenvalue < p.eigenvalue || q.nodes <= p.nodes {
            return Err(Error::SpectralStructure(format!(
                "pair {} (λ = {:e}, {} nodes) does not follow pair {} (λ = {:e}, {} nodes)",
                i + 1,
                q.eigenvalue,
                q.nodes,
                i,
                p.eigenvalue,
                p.nodes
            )));
        }
    }
    Ok(())
}
