mod common;

use radial_sp::bound_states::*;
use radial_sp::pipeline::BranchStage;
use radial_sp::potential::PotentialSpec;

fn stage() -> BranchStage {
    BranchStage::new(&PotentialSpec::smoothed_exponential(), 2000, 300.0, 5).unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn linear_seed_satisfies_fixed_mass_conditions() {
    // the seed carries the O(h²) error of the FEM eigenvector, so use the full mesh
    let s = BranchStage::new(&PotentialSpec::smoothed_exponential(), 4000, 300.0, 1).unwrap();
    let seed = BoundState::from_linear(&s.linear[0], &s.ops, 1.0).unwrap();
    let res = s.solver.boundary_residuals(&seed, Constraint::FixedMass(1.0)).unwrap();
    let norm = res.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(norm < 1e-6, "{res:?}");
}

#[test]
fn gamma_zero_solve_reproduces_linear_energy() {
    let s = stage();
    let seed = BoundState::from_linear(&s.linear[0], &s.ops, 1.0).unwrap();
    let st = s.solver.solve(&seed, 0.0, Constraint::FixedMass(1.0)).unwrap();
    let reference = -common::shooting_eigenvalue(common::smoothed_v, 300.0, 0, 1e-3);
    assert!((st.energy - reference).abs() < 1e-8, "{} vs {reference}", st.energy);
    assert!((st.energy - s.linear[0].energy()).abs() < 1e-6);
}

#[test]
fn zero_guess_does_not_converge() {
    let s = stage();
    let mut seed = BoundState::from_linear(&s.linear[0], &s.ops, 1.0).unwrap();
    for f in [&mut seed.u, &mut seed.v, &mut seed.w, &mut seed.z, &mut seed.m] {
        f.iter_mut().for_each(|x| *x = 0.0);
    }
    assert!(s.solver.solve(&seed, 1.0, Constraint::FixedMass(1.0)).is_err());
}

#[test]
fn ground_state_at_full_coupling() {
    let s = stage();
    let path = s.continue_gamma(0, 1.0, 0.05).unwrap();
    let st = &path.state;
    assert_eq!(st.gamma, 1.0);
    assert_eq!(st.branch, 0);
    assert!((st.mass() - 1.0).abs() < 1e-10);
    assert!(st.energy > s.linear[0].energy());
    assert!(path.steps.iter().all(|k| k.nodes == 0));
    assert!(st.pohozaev_residual(s.potential()) < 1e-4);
}

#[test]
fn fourth_excited_state_keeps_its_crossings() {
    let s = stage();
    let path = s.continue_gamma(4, 1.0, 0.05).unwrap();
    assert!(path.steps.iter().all(|k| k.nodes == 4));
    assert_eq!(path.state.branch, 4);
}

#[test]
fn coupling_rescaling_identity() {
    // √γ U solves the γ = 1 problem with mass γ when U solves it at γ with mass 1.
    let s = stage();
    let seed = BoundState::from_linear(&s.linear[0], &s.ops, 1.0).unwrap();
    let quarter = gamma_continuation(&s.solver, &seed, 1.0, 0.05, 0.25).unwrap().state;
    let direct = s.continue_gamma(0, 0.25, 0.05).unwrap().state;
    let scaled: Vec<f64> = quarter.u.iter().map(|x| 0.5 * x).collect();
    assert!(sup_diff(&scaled, &direct.u) < 1e-6);
    assert!((quarter.energy - direct.energy).abs() < 1e-8);
}

#[test]
fn single_point_sweep_is_idempotent() {
    let s = stage();
    let st = s.continue_gamma(0, 1.0, 0.05).unwrap().state;
    let out = sweep_energy(&s.solver, &st, &[st.energy]);
    assert!(out.failure.is_none());
    let again = &out.states[0];
    assert!(sup_diff(&again.u, &st.u) < 1e-10);
    assert!((again.mass() - st.mass()).abs() < 1e-10);
}

#[test]
fn branch_zero_is_monotone_and_vanishes_at_linear_energy() {
    let s = stage();
    let path = s.continue_gamma(0, 1.0, 0.05).unwrap();
    let curve = s.trace(&path, TraceOptions::default()).unwrap();
    let masses = curve.masses();
    assert!(masses.windows(2).all(|w| w[1] > w[0]));
    assert!(masses[0] < 1e-3);
    assert!(curve.samples[0].energy - s.linear[0].energy() < 1e-4);
    let d = d_second_sign(&curve.samples).unwrap();
    assert_eq!(d.p, 1);
    assert!(d.max_relative_error < 1e-3, "{}", d.max_relative_error);
}

#[test]
fn decreasing_mass_gives_p_zero() {
    let samples: Vec<BranchSample> = (0..5)
        .map(|k| BranchSample {
            energy: 1.0 + k as f64,
            mass: 5.0 - k as f64,
            hamiltonian: 0.0,
            nodes: 0,
            residual: 0.0,
        })
        .collect();
    assert_eq!(d_second_sign(&samples).unwrap().p, 0);
    assert!(d_second_sign(&samples[..2]).is_err());
}

#[test]
fn rescaling_round_trip() {
    let s = stage();
    let st = s.continue_gamma(0, 1.0, 0.05).unwrap().state;
    let r: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
    let y: Vec<f64> = r.iter().map(|x| x * st.energy.sqrt()).collect();
    let tilde = rescale_profile(&st, &y);
    let back = unscale_profile(
        |yy| {
            let k = y.iter().position(|v| (v - yy).abs() < 1e-12).unwrap();
            tilde[k]
        },
        st.energy,
        &r,
    );
    let direct: Vec<f64> = r.iter().map(|&x| st.eval_u(x)).collect();
    assert!(sup_diff(&back, &direct) < 1e-15);
}

#[test]
fn far_field_extension() {
    let s = stage();
    let st = s.state_at_energy(0, 1.0, 0.05, 1.0).unwrap();
    let ext = farfield_extend(&st, 2000.0, 1.0).unwrap();
    let rm = st.r_max();
    assert_eq!(ext.eval(rm), st.u[st.n_nodes() - 1]);
    let expected = -1.0 + (1.0 + st.mass()) / 2.0;
    assert!((ext.exponent - expected).abs() < 1e-14);
    let peak = st.u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(ext.eval(2000.0).abs() < 1e-8 * peak);
    assert!(farfield_extend(&st, 100.0, 1.0).is_err());
}
