use radial_sp::bound_states::{solve_at_energy, BoundState, TraceOptions};
use radial_sp::fem::{assemble, AssembledOperators, DiscreteState, RadialMesh};
use radial_sp::linear::{count_bound_states, solve_linear_states};
use radial_sp::pipeline::{local_d_second, BranchStage};
use radial_sp::potential::{potential_norms, PotentialSpec};
use radial_sp::stability::*;

fn ops(n: usize) -> AssembledOperators {
    assemble(&RadialMesh::sinh(n, 100.0).unwrap(), &PotentialSpec::smoothed_exponential()).unwrap()
}

fn branch_stage() -> BranchStage {
    BranchStage::new(&PotentialSpec::smoothed_exponential(), 2000, 300.0, 2).unwrap()
}

fn state(stage: &BranchStage, branch: usize, energy: f64) -> BoundState {
    stage.state_at_energy(branch, 1.0, 0.05, energy).unwrap()
}

/// Dense Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// `∫ u φ_i φ_j r² dr` by 5-point Gauss–Legendre on each element.
fn overlap_dense(r: &[f64], u: &[f64]) -> Vec<Vec<f64>> {
    let xs = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
    let ws = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
    let n = r.len();
    let mut m = vec![vec![0.0; n]; n];
    for e in 0..n - 1 {
        let h = r[e + 1] - r[e];
        for (x, w) in xs.iter().zip(&ws) {
            let t = 0.5 * (x + 1.0);
            let rr = r[e] + t * h;
            let p = [1.0 - t, t];
            let ue = p[0] * u[e] + p[1] * u[e + 1];
            for a in 0..2 {
                for b in 0..2 {
                    m[e + a][e + b] += 0.5 * w * h * rr * rr * ue * p[a] * p[b];
                }
            }
        }
    }
    m
}

#[test]
fn t_vanishes_for_zero_profile() {
    let o = ops(60);
    let t = assemble_t(&o, &vec![0.0; 61]).unwrap();
    assert!((0..60).all(|i| (0..60).all(|j| t[(i, j)] == 0.0)));
}

#[test]
fn t_is_symmetric_and_matches_two_step_action() {
    let o = ops(60);
    let r = o.mesh().nodes().to_vec();
    let u: Vec<f64> = r.iter().map(|x| (-x / 3.0).exp() * (1.0 - x / 100.0)).collect();
    let t = assemble_t(&o, &u).unwrap();
    assert!(LinearizationMatrices::asymmetry(&t) < 1e-12);
    let x: Vec<f64> = (0..60).map(|i| ((i * 37 % 11) as f64 - 5.0) / 7.0).collect();

    let uu = overlap_dense(&r, &u);
    let mut k = vec![vec![0.0; 61]; 61];
    for i in 0..61 {
        k[i][i] = o.k_rob.diag[i];
        if i < 60 {
            k[i][i + 1] = o.k_rob.off[i];
            k[i + 1][i] = o.k_rob.off[i];
        }
    }
    let mut full = x.clone();
    full.push(0.0);
    let rhs: Vec<f64> = (0..61).map(|i| (0..61).map(|j| uu[i][j] * full[j]).sum()).collect();
    let psi = dense_solve(k, rhs);
    let expected: Vec<f64> = (0..60).map(|i| (0..61).map(|j| uu[i][j] * psi[j]).sum()).collect();

    let tx: Vec<f64> = (0..60).map(|i| (0..60).map(|j| t[(i, j)] * x[j]).sum()).collect();
    let scale = expected.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in tx.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-10 * scale.max(1.0), "{a} vs {b}");
    }
    let direct = apply_t(&o, &u, &x);
    for (a, b) in direct.iter().zip(&tx) {
        assert!((a - b).abs() < 1e-12 * scale.max(1.0));
    }
}

#[test]
fn trivial_state_has_imaginary_spectrum_shifted_by_energy() {
    let o = ops(300);
    let energy = 1.0;
    let zero = DiscreteState {
        energy,
        u: vec![0.0; 301],
        w: vec![0.0; 301],
        residual: 0.0,
        iterations: 0,
    };
    let lin = LinearizationMatrices::assemble(&o, &zero).unwrap();
    let jl = spectrum_jl(&lin, true).unwrap();
    assert_eq!(jl.eigenvalues.len(), 600);
    assert!(jl.eigenvalues.iter().all(|l| l.re.abs() < 1e-8));
    assert!(jl.quartets.is_empty());
    let bound = solve_linear_states(&o, count_bound_states(&o)).unwrap();
    for pair in &bound {
        let target = pair.eigenvalue + energy;
        for sign in [1.0, -1.0] {
            let best = jl
                .eigenvalues
                .iter()
                .map(|l| (l.im - sign * target).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "no eigenvalue near {}", sign * target);
        }
    }
}

#[test]
fn ground_state_spectrum() {
    let stage = branch_stage();
    let st = state(&stage, 0, 1.0);
    let o = ops(400);
    let p = local_d_second(&stage.solver, &st).unwrap().p;
    assert_eq!(p, 1);
    let report = analyze_state(&o, &st, p).unwrap();
    assert_eq!((report.lpm.n_minus, report.lpm.n_plus), (0, 1));
    assert!(report.kernel_residual < 1e-6, "{}", report.kernel_residual);
    assert!(report.jl.sigma_max < 1e-6 * 2.0);
    assert!(!report.jl.has_quartet());
    assert!(report.jl.symmetry_defect < 1e-8);
    assert_eq!(report.verdict, Verdict::OrbitallyStable);

    let fem = polish_on_mesh(&o, &st).unwrap();
    let lin = LinearizationMatrices::assemble(&o, &fem).unwrap();
    assert!(LinearizationMatrices::asymmetry(&lin.l_plus) < 1e-12);
    assert_eq!(negative_counts(&lin).unwrap(), (0, 1));
}

#[test]
fn first_excited_state_is_linearly_unstable_and_bounded() {
    let stage = branch_stage();
    let st = state(&stage, 1, 1.0);
    let o = ops(400);
    let report = analyze_state(&o, &st, 1).unwrap();
    assert_eq!((report.lpm.n_minus, report.lpm.n_plus), (1, 2));
    assert!(report.jl.has_quartet());
    assert!(report.jl.quartets.iter().any(|q| q.iter().any(|l| l.re > 0.0)));
    assert_eq!(report.verdict, Verdict::LinearlyUnstable);

    let norms = potential_norms(stage.potential()).unwrap();
    let b = unstable_bound(&st, stage.potential(), &norms, BoundConstants::default());
    assert!(report.jl.sigma_max <= b.value(), "{} > {}", report.jl.sigma_max, b.value());
}

#[test]
fn first_excited_state_near_threshold_is_inconclusive() {
    let stage = branch_stage();
    let st = state(&stage, 1, 0.08);
    let report = analyze_state(&ops(400), &st, 1).unwrap();
    assert_eq!(report.n_total(), 3);
    assert_eq!(report.verdict, Verdict::Inconclusive, "sigma_max = {}", report.jl.sigma_max);
}

#[test]
fn classifier_rules() {
    assert_eq!(classify(0, 1, Some(1), None, 1.0).unwrap(), Verdict::OrbitallyStable);
    assert_eq!(classify(1, 1, Some(1), None, 1.0).unwrap(), Verdict::OrbitallyUnstable);
    assert_eq!(classify(1, 2, Some(1), Some(0.1), 1.0).unwrap(), Verdict::LinearlyUnstable);
    assert_eq!(classify(1, 2, Some(1), Some(1e-6), 1.0).unwrap(), Verdict::Inconclusive);
    assert!(classify(1, 2, None, Some(0.1), 1.0).is_err());
    assert!(classify(1, 2, Some(1), None, 1.0).is_err());
}

#[test]
fn bound_vanishes_with_mass() {
    let stage = branch_stage();
    let potential = stage.potential().clone();
    let norms = potential_norms(&potential).unwrap();
    let path = stage.continue_gamma(1, 1.0, 0.05).unwrap();
    let curve = stage.trace(&path, TraceOptions::default()).unwrap();
    let (lo, _) = curve.energy_range();
    let bound_at = |e: f64| {
        let s = solve_at_energy(&stage.solver, &path.state, e).unwrap();
        unstable_bound(&s, &potential, &norms, BoundConstants::default()).value()
    };
    let (b_low, b_one) = (bound_at(lo), bound_at(1.0));
    assert!(b_low < 1e-2 * b_one, "{b_low} vs {b_one}");

    let mut zero = path.state.clone();
    zero.u.iter_mut().for_each(|x| *x = 0.0);
    zero.v.iter_mut().for_each(|x| *x = 0.0);
    let b = unstable_bound(&zero, &potential, &norms, BoundConstants::default());
    assert_eq!((b.value(), b.l3, b.gradient), (0.0, 0.0, 0.0));
}
