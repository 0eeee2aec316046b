use crate::error::{Error, Result};
use crate::fem::mesh::RadialMesh;
use crate::linalg::{SymTridiag, TridiagCholesky};
use crate::potential::PotentialSpec;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// Hat-function matrices with weight `r²`.
///
/// Full-size matrices act on all `n + 1` nodes; the Dirichlet variants are
/// their leading `n x n` blocks (the node at `r_max` is dropped).
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    mesh: RadialMesh,
    potential: PotentialSpec,
    pub k_full: SymTridiag,
    pub m_full: SymTridiag,
    pub v_full: SymTridiag,
    /// `k_full` plus the Robin term `r_max` at the last node.
    pub k_rob: SymTridiag,
    k_rob_factor: TridiagCholesky,
}

pub fn assemble(mesh: &RadialMesh, potential: &PotentialSpec) -> Result<AssembledOperators> {
    let n = mesh.n_elements();
    let r = mesh.nodes();
    let mut k = SymTridiag::zeros(n + 1);
    let mut m = SymTridiag::zeros(n + 1);
    let mut v = SymTridiag::zeros(n + 1);
    for e in 0..n {
        let (a, b) = (r[e], r[e + 1]);
        let h = b - a;
        let ke = (b * b * b - a * a * a) / (3.0 * h * h);
        k.diag[e] += ke;
        k.diag[e + 1] += ke;
        k.off[e] -= ke;
        let (mut m00, mut m01, mut m11) = (0.0, 0.0, 0.0);
        let (mut v00, mut v01, mut v11) = (0.0, 0.0, 0.0);
        for (t, wq) in GAUSS3 {
            let x = a + t * h;
            let w = wq * h * x * x;
            let (p0, p1) = (1.0 - t, t);
            m00 += w * p0 * p0;
            m01 += w * p0 * p1;
            m11 += w * p1 * p1;
            let vx = potential.value(x)?;
            v00 += w * vx * p0 * p0;
            v01 += w * vx * p0 * p1;
            v11 += w * vx * p1 * p1;
        }
        m.diag[e] += m00;
        m.diag[e + 1] += m11;
        m.off[e] += m01;
        v.diag[e] += v00;
        v.diag[e + 1] += v11;
        v.off[e] += v01;
    }
    let mut k_rob = k.clone();
    k_rob.diag[n] += mesh.r_max();
    let k_rob_factor = TridiagCholesky::new(&k_rob)?;
    Ok(AssembledOperators {
        mesh: mesh.clone(),
        potential: potential.clone(),
        k_full: k,
        m_full: m,
        v_full: v,
        k_rob,
        k_rob_factor,
    })
}

impl AssembledOperators {
    pub fn mesh(&self) -> &RadialMesh {
        &self.mesh
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    /// Number of interior (Dirichlet) unknowns, `n`.
    pub fn n_dir(&self) -> usize {
        self.mesh.n_elements()
    }

    pub fn k_dir(&self) -> SymTridiag {
        self.k_full.leading(self.n_dir())
    }

    pub fn m_dir(&self) -> SymTridiag {
        self.m_full.leading(self.n_dir())
    }

    pub fn v_dir(&self) -> SymTridiag {
        self.v_full.leading(self.n_dir())
    }

    /// `K_dir + V_dir`.
    pub fn h_dir(&self) -> SymTridiag {
        self.k_full.add_scaled(1.0, &self.v_full).leading(self.n_dir())
    }

    pub fn k_rob_factor(&self) -> &TridiagCholesky {
        &self.k_rob_factor
    }

    /// Solves `K_rob w = M_full source` for nodal `source` on all nodes.
    pub fn poisson_solve_robin(&self, source: &[f64]) -> Result<Vec<f64>> {
        self.check_full(source)?;
        Ok(self.k_rob_factor.solve(&self.m_full.matvec(source)))
    }

    /// Hartree potential of a nodal profile: Robin solve with source `u²`.
    pub fn hartree(&self, u: &[f64]) -> Result<Vec<f64>> {
        let density: Vec<f64> = u.iter().map(|x| x * x).collect();
        self.poisson_solve_robin(&density)
    }

    /// `(U_mat)_ij = ∫ u φ_i φ_j r² dr` with `u` interpolated linearly.
    pub fn weighted_overlap(&self, u: &[f64]) -> Result<SymTridiag> {
        self.check_full(u)?;
        Ok(weighted_overlap(&self.mesh, u))
    }

    /// `uᵀ M u` for a full nodal vector.
    pub fn discrete_mass(&self, u: &[f64]) -> Result<f64> {
        self.check_full(u)?;
        Ok(self.m_full.bilinear(u, u))
    }

    /// `uᵀ(K + V)u − ½ bᵀ K_rob⁻¹ b` with `b = M |u|²`.
    pub fn discrete_energy(&self, u: &[f64]) -> Result<f64> {
        self.check_full(u)?;
        let linear = self.k_full.bilinear(u, u) + self.v_full.bilinear(u, u);
        let density: Vec<f64> = u.iter().map(|x| x * x).collect();
        let b = self.m_full.matvec(&density);
        let w = self.k_rob_factor.solve(&b);
        let hartree: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
        Ok(linear - 0.5 * hartree)
    }

    fn check_full(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.mesh.n_nodes() {
            return Err(Error::Domain(format!(
                "nodal vector has length {}, mesh has {} nodes",
                x.len(),
                self.mesh.n_nodes()
            )));
        }
        Ok(())
    }
}

pub fn weighted_overlap(mesh: &RadialMesh, u: &[f64]) -> SymTridiag {
    let n = mesh.n_elements();
    let r = mesh.nodes();
    let mut out = SymTridiag::zeros(n + 1);
    for e in 0..n {
        let (a, b) = (r[e], r[e + 1]);
        let h = b - a;
        let (mut s00, mut s01, mut s11) = (0.0, 0.0, 0.0);
        for (t, wq) in GAUSS3 {
            let x = a + t * h;
            let (p0, p1) = (1.0 - t, t);
            let w = wq * h * x * x * (u[e] * p0 + u[e + 1] * p1);
            s00 += w * p0 * p0;
            s01 += w * p0 * p1;
            s11 += w * p1 * p1;
        }
        out.diag[e] += s00;
        out.diag[e + 1] += s11;
        out.off[e] += s01;
    }
    out
}

/// Pads an interior (Dirichlet) vector with the zero boundary value.
pub fn with_boundary_zero(interior: &[f64]) -> Vec<f64> {
    let mut v = interior.to_vec();
    v.push(0.0);
    v
}

/// Strict sign changes between nodes, skipping `|u| < 1e-8 max|u|`.
pub fn count_zero_crossings(u: &[f64]) -> Result<usize> {
    let peak = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(peak > 0.0) {
        return Err(Error::UndefinedProfile);
    }
    let floor = 1e-8 * peak;
    let mut last = 0.0f64;
    let mut count = 0;
    for &x in u {
        if x.abs() < floor {
            continue;
        }
        if last != 0.0 && x.signum() != last.signum() {
            count += 1;
        }
        last = x;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::hydrogen_reference;
    use approx::assert_relative_eq;

    fn smoothed(n: usize, r_max: f64) -> AssembledOperators {
        let mesh = RadialMesh::sinh(n, r_max).unwrap();
        assemble(&mesh, &PotentialSpec::smoothed_exponential()).unwrap()
    }

    #[test]
    fn mass_of_constant_is_exact() {
        for (n, r_max) in [(7, 3.0), (400, 100.0), (4000, 100.0)] {
            let ops = smoothed(n, r_max);
            let ones = vec![1.0; n + 1];
            let total = ops.discrete_mass(&ones).unwrap();
            assert_relative_eq!(total, r_max.powi(3) / 3.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn two_element_stiffness() {
        let mesh = RadialMesh::uniform(2, 2.0).unwrap();
        let ops = assemble(&mesh, &PotentialSpec::zero(2.0)).unwrap();
        assert_relative_eq!(ops.k_full.diag[1], 8.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(ops.k_full.diag[0], 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(ops.k_full.off[1], -7.0 / 3.0, max_relative = 1e-15);
        assert_eq!(ops.k_rob.diag[2], ops.k_full.diag[2] + 2.0);
    }

    #[test]
    fn zero_potential_matrix() {
        let mesh = RadialMesh::sinh(50, 30.0).unwrap();
        let ops = assemble(&mesh, &PotentialSpec::zero(30.0)).unwrap();
        assert!(ops.v_full.diag.iter().chain(&ops.v_full.off).all(|&x| x == 0.0));
    }

    #[test]
    fn dirichlet_blocks_are_positive_definite() {
        let ops = smoothed(300, 50.0);
        assert!(TridiagCholesky::new(&ops.k_dir()).is_ok());
        assert!(TridiagCholesky::new(&ops.m_dir()).is_ok());
        assert!(TridiagCholesky::new(&ops.m_full).is_ok());
    }

    #[test]
    fn assembly_is_deterministic() {
        let a = smoothed(500, 100.0);
        let b = smoothed(500, 100.0);
        assert_eq!(a.v_full, b.v_full);
        assert_eq!(a.k_rob, b.k_rob);
    }

    #[test]
    fn overlap_reductions() {
        let ops = smoothed(60, 20.0);
        let n = 60;
        let zero = ops.weighted_overlap(&vec![0.0; n + 1]).unwrap();
        assert!(zero.diag.iter().all(|&x| x == 0.0));
        let one = ops.weighted_overlap(&vec![1.0; n + 1]).unwrap();
        for (a, b) in one.diag.iter().zip(&ops.m_full.diag) {
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
        // u = φ_k: row sum k equals ∫ φ_k² r² dr, row sums of the
        // neighbours equal ∫ φ_k φ_j r² dr summed over j.
        let k = 17;
        let mut hat = vec![0.0; n + 1];
        hat[k] = 1.0;
        let u = ops.weighted_overlap(&hat).unwrap();
        let rowsum = |s: &SymTridiag, i: usize| {
            s.diag[i] + if i > 0 { s.off[i - 1] } else { 0.0 } + s.off.get(i).copied().unwrap_or(0.0)
        };
        let total: f64 = (0..=n).map(|i| rowsum(&u, i)).sum();
        let r = ops.mesh().nodes();
        let (a, b, c) = (r[k - 1], r[k], r[k + 1]);
        // ∫ φ_k r² dr exactly: piecewise linear times r² on both elements.
        let left = (3.0 * b.powi(4) - 4.0 * a * b.powi(3) + a.powi(4)) / (12.0 * (b - a));
        let right = (3.0 * b.powi(4) - 4.0 * c * b.powi(3) + c.powi(4)) / (12.0 * (c - b));
        assert_relative_eq!(total, left + right, max_relative = 1e-12);
    }

    #[test]
    fn overlap_exact_for_linear_profiles() {
        let mesh = RadialMesh::uniform(3, 3.0).unwrap();
        let u: Vec<f64> = mesh.nodes().iter().map(|r| 2.0 - 0.5 * r).collect();
        let s = weighted_overlap(&mesh, &u);
        // Element [1, 2]: ∫ (2 - r/2)(2 - r)(r - 1) r² dr = 7/15.
        assert_relative_eq!(s.off[1], 7.0 / 15.0, max_relative = 1e-12);
        // Only element [0, 1] touches node 0: ∫ (2 - r/2)(1 - r)² r² dr.
        assert_relative_eq!(s.diag[0], 1.0 / 15.0 - 1.0 / 120.0, max_relative = 1e-12);
    }

    #[test]
    fn robin_poisson_is_linear() {
        let ops = smoothed(200, 40.0);
        let f: Vec<f64> = ops.mesh().nodes().iter().map(|r| (-r).exp()).collect();
        let g: Vec<f64> = ops.mesh().nodes().iter().map(|r| r * (-0.5 * r).exp()).collect();
        let fg: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let (wf, wg, wfg) = (
            ops.poisson_solve_robin(&f).unwrap(),
            ops.poisson_solve_robin(&g).unwrap(),
            ops.poisson_solve_robin(&fg).unwrap(),
        );
        for i in 0..wf.len() {
            assert!((wf[i] + wg[i] - wfg[i]).abs() < 1e-13 * (1.0 + wfg[i].abs()));
        }
        let zero = ops.poisson_solve_robin(&vec![0.0; 201]).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
    }

    /// `-w'' - 2w'/r = e^{-2r}` with `r w → m = 1/4` has
    /// `w = (1 - e^{-2r}(1 + r))/(4r)`.
    #[test]
    fn robin_poisson_matches_closed_form() {
        let ops = smoothed(4000, 100.0);
        let r = ops.mesh().nodes();
        let src: Vec<f64> = r.iter().map(|x| (-2.0 * x).exp()).collect();
        let w = ops.poisson_solve_robin(&src).unwrap();
        let exact = |x: f64| {
            if x < 1e-8 {
                0.25
            } else {
                (1.0 - (-2.0 * x).exp() * (1.0 + x)) / (4.0 * x)
            }
        };
        let err = r
            .iter()
            .zip(&w)
            .map(|(x, wx)| (wx - exact(*x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "max error {err:e}");
        let n = r.len() - 1;
        assert_relative_eq!(r[n] * w[n], 0.25, max_relative = 1e-2);
    }

    #[test]
    fn mass_and_energy_of_zero() {
        let ops = smoothed(40, 10.0);
        let z = vec![0.0; 41];
        assert_eq!(ops.discrete_mass(&z).unwrap(), 0.0);
        assert_eq!(ops.discrete_energy(&z).unwrap(), 0.0);
        assert!(ops.discrete_mass(&[0.0; 3]).is_err());
    }

    #[test]
    fn zero_crossings() {
        let mesh = RadialMesh::uniform(2000, 20.0).unwrap();
        let r = mesh.nodes();
        let decay: Vec<f64> = r.iter().map(|x| (-x).exp()).collect();
        assert_eq!(count_zero_crossings(&decay).unwrap(), 0);
        let one: Vec<f64> = r.iter().map(|x| (1.0 - x) * (-x).exp()).collect();
        assert_eq!(count_zero_crossings(&one).unwrap(), 1);
        let h3 = hydrogen_reference(3, 1.0).unwrap();
        let mesh = RadialMesh::uniform(6000, 120.0).unwrap();
        let p: Vec<f64> = mesh.nodes().iter().map(|&x| h3.profile(x)).collect();
        assert_eq!(count_zero_crossings(&p).unwrap(), 2);
        assert!(matches!(count_zero_crossings(&[0.0; 5]), Err(Error::UndefinedProfile)));
    }

    #[test]
    fn tail_noise_is_ignored() {
        let mut u = vec![1.0, 0.5, 0.1, 1e-3, 1e-6];
        u.extend([1e-10, -1e-10, 1e-11, -1e-12]);
        assert_eq!(count_zero_crossings(&u).unwrap(), 0);
    }
}
