use serde::{Deserialize, Serialize};

use crate::bound_states::ode::{rhs_and_jacobian, STATE_DIM};
use crate::error::{Error, Result};
use crate::fem::{count_zero_crossings, AssembledOperators, RadialMesh};
use crate::linear::LinearEigenpair;
use crate::potential::PotentialSpec;

/// A solution of the radial system on the nodes of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub m: Vec<f64>,
    pub energy: f64,
    pub gamma: f64,
    /// Zero-crossing count of `u`.
    pub branch: usize,
    /// Max scaled collocation residual of the last solve.
    pub residual: f64,
}

impl BoundState {
    /// Seeds `(u, v, w, z, m)` from a linear eigenvector scaled to `mass`;
    /// derivatives by nonuniform central differences, `w` from the Robin
    /// Poisson solve and `m` by trapezoidal accumulation.
    pub fn from_linear(pair: &LinearEigenpair, ops: &AssembledOperators, mass: f64) -> Result<Self> {
        let r = ops.mesh().nodes().to_vec();
        let u: Vec<f64> = pair.vector.iter().map(|x| x * mass.sqrt()).collect();
        let w = ops.hartree(&u)?;
        let mut v = nodal_derivative(&r, &u);
        v[0] = 0.0;
        let mut z = nodal_derivative(&r, &w);
        z[0] = 0.0;
        let m = cumulative_mass(&r, &u);
        Ok(Self {
            branch: count_zero_crossings(&u)?,
            r,
            u,
            v,
            w,
            z,
            m,
            energy: pair.energy(),
            gamma: 0.0,
            residual: f64::NAN,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.r.len()
    }

    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    pub fn mesh(&self) -> Result<RadialMesh> {
        RadialMesh::from_nodes(self.r.clone())
    }

    /// `m(r_max)`.
    pub fn mass(&self) -> f64 {
        self.m[self.m.len() - 1]
    }

    pub fn node(&self, i: usize) -> [f64; STATE_DIM] {
        [self.u[i], self.v[i], self.w[i], self.z[i], self.m[i]]
    }

    pub(crate) fn set_node(&mut self, i: usize, y: &[f64]) {
        self.u[i] = y[0];
        self.v[i] = y[1];
        self.w[i] = y[2];
        self.z[i] = y[3];
        self.m[i] = y[4];
    }

    /// `|u(r_max)| / max |u|`.
    pub fn tail_ratio(&self) -> f64 {
        let peak = self.u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        self.u[self.u.len() - 1].abs() / peak
    }

    /// Cubic Hermite interpolation of `u` from nodal `(u, u')`; zero beyond
    /// `r_max`.
    pub fn eval_u(&self, r: f64) -> f64 {
        self.eval_hermite(r).0
    }

    /// `(u, u')` at `r` from the cubic Hermite interpolant.
    pub fn eval_hermite(&self, r: f64) -> (f64, f64) {
        let n = self.r.len() - 1;
        if r > self.r[n] || r < 0.0 {
            return (0.0, 0.0);
        }
        let k = self.r.partition_point(|&x| x <= r).saturating_sub(1).min(n - 1);
        let (a, b) = (self.r[k], self.r[k + 1]);
        let h = b - a;
        let t = (r - a) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let u = h00 * self.u[k] + h10 * h * self.v[k] + h01 * self.u[k + 1] + h11 * h * self.v[k + 1];
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        let du = d00 * self.u[k] + d10 * self.v[k] + d01 * self.u[k + 1] + d11 * self.v[k + 1];
        (u, du)
    }

    /// States at interval midpoints, `y_m = (y_i + y_{i+1})/2 - h/8 (f_{i+1} - f_i)`.
    pub fn midpoints(&self, potential: &PotentialSpec) -> Vec<[f64; STATE_DIM]> {
        let f: Vec<[f64; 6]> = (0..self.n_nodes())
            .map(|i| {
                let vr = potential.value_unchecked(self.r[i]);
                rhs_and_jacobian(&self.node(i), self.r[i], vr, self.gamma, self.energy).0
            })
            .collect();
        (0..self.n_nodes() - 1)
            .map(|i| {
                let h = self.r[i + 1] - self.r[i];
                let (a, b) = (self.node(i), self.node(i + 1));
                let mut y = [0.0; STATE_DIM];
                for k in 0..STATE_DIM {
                    y[k] = 0.5 * (a[k] + b[k]) - h / 8.0 * (f[i + 1][k] - f[i][k]);
                }
                y
            })
            .collect()
    }

    /// Simpson quadrature of `g(r, y)` over `[0, r_max]` using the
    /// collocation midpoints.
    pub fn integrate(
        &self,
        potential: &PotentialSpec,
        g: impl Fn(f64, &[f64; STATE_DIM]) -> f64,
    ) -> f64 {
        let mid = self.midpoints(potential);
        let mut total = 0.0;
        for i in 0..self.n_nodes() - 1 {
            let (a, b) = (self.r[i], self.r[i + 1]);
            let h = b - a;
            total += h / 6.0
                * (g(a, &self.node(i)) + 4.0 * g(0.5 * (a + b), &mid[i]) + g(b, &self.node(i + 1)));
        }
        total
    }

    /// `H = ∫ v² + V u² - ½ w u²` with weight `r²`.
    pub fn hamiltonian(&self, potential: &PotentialSpec) -> f64 {
        self.integrate(potential, |r, y| {
            r * r * (y[1] * y[1] + potential.value_unchecked(r) * y[0] * y[0] - 0.5 * y[2] * y[0] * y[0])
        })
    }

    /// Kinetic term `T = ∫ v² r² dr` and the virial prediction
    /// `(E/3) M + (1/3) ∫ V u² + (2/3) ∫ r V' u²`, all with weight `r²`.
    pub fn pohozaev_terms(&self, potential: &PotentialSpec) -> (f64, f64) {
        let kinetic = self.integrate(potential, |r, y| r * r * y[1] * y[1]);
        let mass = self.integrate(potential, |r, y| r * r * y[0] * y[0]);
        let pv = self.integrate(potential, |r, y| r * r * potential.value_unchecked(r) * y[0] * y[0]);
        let qv = self.integrate(potential, |r, y| r * r * r * potential.derivative(r) * y[0] * y[0]);
        (
            kinetic,
            self.energy / 3.0 * mass + pv / 3.0 + 2.0 / 3.0 * qv,
        )
    }

    /// `|T - prediction| / T`.
    pub fn pohozaev_residual(&self, potential: &PotentialSpec) -> f64 {
        let (t, p) = self.pohozaev_terms(potential);
        (t - p).abs() / t.abs()
    }

    /// `u` on the nodes of `mesh` by Hermite interpolation.
    pub fn sample_u(&self, mesh: &RadialMesh) -> Vec<f64> {
        mesh.nodes().iter().map(|&r| self.eval_u(r)).collect()
    }

    pub(crate) fn check_profile(&self) -> Result<()> {
        if self.u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Evaluation("non-finite profile".into()));
        }
        Ok(())
    }
}

fn nodal_derivative(r: &[f64], f: &[f64]) -> Vec<f64> {
    let n = r.len() - 1;
    let mut d = vec![0.0; n + 1];
    for i in 1..n {
        let (hm, hp) = (r[i] - r[i - 1], r[i + 1] - r[i]);
        d[i] = (hm * hm * (f[i + 1] - f[i]) + hp * hp * (f[i] - f[i - 1])) / (hm * hp * (hm + hp));
    }
    d[0] = (f[1] - f[0]) / (r[1] - r[0]);
    d[n] = (f[n] - f[n - 1]) / (r[n] - r[n - 1]);
    d
}

fn cumulative_mass(r: &[f64], u: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; r.len()];
    for i in 1..r.len() {
        let (a, b) = (u[i - 1] * r[i - 1], u[i] * r[i]);
        m[i] = m[i - 1] + 0.5 * (r[i] - r[i - 1]) * (a * a + b * b);
    }
    m
}
