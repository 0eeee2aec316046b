//! The radial Schrödinger–Poisson system as a first-order ODE in
//! `y = (u, v, w, z, m)`:
//!
//! ```text
//! u' = v
//! v' = -2v/r + (V - γw + E) u
//! w' = z
//! z' = -2z/r - u²
//! m' = u² r²
//! ```

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

pub const STATE_DIM: usize = 5;

/// Which scalar closes the system at `r_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// `m(r_max)` prescribed, `E` unknown.
    FixedMass(f64),
    /// `E` prescribed, `m(r_max)` unknown.
    FixedEnergy(f64),
}

impl Constraint {
    /// Length of the unknown vector per node.
    pub fn dim(&self) -> usize {
        match self {
            Constraint::FixedMass(_) => STATE_DIM + 1,
            Constraint::FixedEnergy(_) => STATE_DIM,
        }
    }
}

/// Right-hand side at `r > 0`.
pub fn first_order_rhs(
    y: &[f64; STATE_DIM],
    r: f64,
    gamma: f64,
    energy: f64,
    potential: &PotentialSpec,
) -> Result<[f64; STATE_DIM]> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!(
            "first-order system is singular at r = {r}; use the regularized origin form"
        )));
    }
    let (f, _) = rhs_and_jacobian(y, r, potential.value_unchecked(r), gamma, energy);
    Ok([f[0], f[1], f[2], f[3], f[4]])
}

/// `(f, ∂f/∂(y, E))` with the removable singularity at `r = 0` resolved by
/// `v'(0) = (V(0) - γw + E)u/3`, `z'(0) = -u²/3`. Row/column 5 is `E`.
pub(crate) fn rhs_and_jacobian(
    y: &[f64; STATE_DIM],
    r: f64,
    v_r: f64,
    gamma: f64,
    energy: f64,
) -> ([f64; 6], [[f64; 6]; 6]) {
    let [u, v, w, z, _m] = *y;
    let coef = v_r - gamma * w + energy;
    let mut f = [0.0; 6];
    let mut j = [[0.0; 6]; 6];
    f[0] = v;
    j[0][1] = 1.0;
    f[2] = z;
    j[2][3] = 1.0;
    f[4] = u * u * r * r;
    j[4][0] = 2.0 * u * r * r;
    if r > 0.0 {
        f[1] = -2.0 * v / r + coef * u;
        j[1] = [coef, -2.0 / r, -gamma * u, 0.0, 0.0, u];
        f[3] = -2.0 * z / r - u * u;
        j[3] = [-2.0 * u, 0.0, 0.0, -2.0 / r, 0.0, 0.0];
    } else {
        f[1] = coef * u / 3.0;
        j[1] = [coef / 3.0, 0.0, -gamma * u / 3.0, 0.0, 0.0, u / 3.0];
        f[3] = -u * u / 3.0;
        j[3] = [-2.0 * u / 3.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    }
    (f, j)
}

/// Robin coefficient `c` in `v + c u = 0` at `r_max`, from the far field
/// `u ~ e^{-√E r} r^{-1 + Q/(2√E)}` with effective charge `Q = Z + γm`.
pub fn robin_coefficient(energy: f64, r_max: f64, effective_charge: f64) -> f64 {
    let k = energy.sqrt();
    1.0 / r_max + k - effective_charge / (2.0 * r_max * k)
}

/// Boundary conditions: `v(0), z(0), m(0)` on the left; on the right
/// `m(r_max) - target` (fixed mass only), `z + w/r_max` and `v + c u`.
pub fn boundary_residuals(
    left: &[f64; STATE_DIM],
    right: &[f64; STATE_DIM],
    energy: f64,
    constraint: Constraint,
    r_max: f64,
    charge: f64,
    gamma: f64,
) -> Result<Vec<f64>> {
    if !(energy > 0.0) {
        return Err(Error::Domain(format!(
            "Robin condition needs E > 0, got {energy}"
        )));
    }
    let [u, v, w, z, m] = *right;
    let mut res = vec![left[1], left[3], left[4]];
    if let Constraint::FixedMass(target) = constraint {
        res.push(m - target);
    }
    res.push(z + w / r_max);
    res.push(v + robin_coefficient(energy, r_max, charge + gamma * m) * u);
    Ok(res)
}
