use rayon::prelude::*;
use serde_json::json;

use crate::bound_states::{d_second_sign, rescale_check, BoundState, TraceOptions};
use crate::cli::config::{EvolutionStart, RunConfig};
use crate::cli::output::{fmt_f64, Cell, RunRecorder};
use crate::cli::Command;
use crate::error::{Error, Result};
use crate::evolution::{
    evolve, perturbed_ic, stationary_state, strang_stationary_state, EvolutionField, StrangIntegrator,
};
use crate::fem::{assemble, RadialMesh, GAUSS3};
use crate::linear::{solve_linear_states, sturm_check};
use crate::pipeline::{local_d_second, BranchStage};
use crate::potential::{potential_norms, PotentialSpec};
use crate::stability::{analyze_state, transition_scan};

pub fn dispatch(command: &Command, cfg: &RunConfig) -> Result<()> {
    match command {
        Command::Linear(_) => linear(cfg),
        Command::ContinueGamma(_) => continue_gamma(cfg),
        Command::SweepE(_) => sweep_e(cfg),
        Command::Spectrum(_) => spectrum(cfg),
        Command::Transition(_) => transition(cfg),
        Command::Evolve(_) => evolve_cmd(cfg),
        Command::RescaleCheck(_) => rescale(cfg),
        Command::Validate => validate(cfg),
    }
}

const PROFILE_HEADER: [&str; 6] = ["r", "u", "v", "w", "z", "m"];
const BRANCH_HEADER: [&str; 6] = ["branch", "gamma", "E", "mass", "n_nodes", "residual"];

fn profile_rows(s: &BoundState) -> Vec<Vec<Cell>> {
    (0..s.n_nodes())
        .map(|i| [s.r[i], s.u[i], s.v[i], s.w[i], s.z[i], s.m[i]].map(Cell::F).to_vec())
        .collect()
}

fn energy_tag(e: f64) -> String {
    format!("{e}").replace('.', "p")
}

fn branch_stage(cfg: &RunConfig, branches: &[usize]) -> Result<(PotentialSpec, BranchStage)> {
    let mesh = cfg.branch_mesh;
    let v = cfg.potential_spec(mesh.r_max)?;
    let count = branches.iter().max().map_or(1, |j| j + 1);
    let stage = BranchStage::new(&v, mesh.n, mesh.r_max, count)?.with_tolerance(cfg.newton_tolerance);
    Ok((v, stage))
}

/// Runs `f` per branch in parallel; keeps input order, fails on the first error
/// after all jobs finished.
fn per_branch<T: Send>(branches: &[usize], f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = branches.par_iter().map(|&j| f(j)).collect();
    results.into_iter().collect()
}

fn linear(cfg: &RunConfig) -> Result<()> {
    let mesh = RadialMesh::sinh(cfg.linear_mesh.n, cfg.linear_mesh.r_max)?;
    let v = cfg.potential_spec(mesh.r_max())?;
    let ops = assemble(&mesh, &v)?;
    let pairs = solve_linear_states(&ops, cfg.linear_count)?;
    sturm_check(&pairs)?;
    let mut rec = RunRecorder::new(cfg, "linear", "linear")?;
    let rows: Vec<Vec<Cell>> = pairs
        .iter()
        .enumerate()
        .map(|(j, p)| vec![j.into(), p.nodes.into(), p.eigenvalue.into(), p.energy().into()])
        .collect();
    rec.csv("linear.csv", "linear", &["j", "nodes", "eigenvalue", "E"], &rows)?;
    println!("{:>3} {:>6} {:>24}", "j", "nodes", "eigenvalue");
    for (j, p) in pairs.iter().enumerate() {
        println!("{j:>3} {:>6} {:>24}", p.nodes, fmt_f64(p.eigenvalue));
        let state = BoundState::from_linear(p, &ops, 1.0)?;
        rec.csv(&format!("profile_linear_j{j}.csv"), "profile", &PROFILE_HEADER, &profile_rows(&state))?;
    }
    let summary = json!({ "eigenvalues": pairs.iter().map(|p| p.eigenvalue).collect::<Vec<_>>() });
    rec.finish(cfg, summary)?;
    Ok(())
}

fn continue_gamma(cfg: &RunConfig) -> Result<()> {
    let (v, stage) = branch_stage(cfg, &cfg.branches)?;
    let paths = per_branch(&cfg.branches, |j| stage.continue_gamma(j, cfg.mass, cfg.gamma_step))?;
    let mut rec = RunRecorder::new(cfg, "continue-gamma", "continue-gamma")?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (j, path) in cfg.branches.iter().zip(&paths) {
        for s in &path.steps {
            rows.push(vec![(*j).into(), s.gamma.into(), s.energy.into(), s.mass.into(), s.nodes.into(), s.residual.into()]);
        }
        let st = &path.state;
        let pohozaev = st.pohozaev_residual(&v);
        if pohozaev > 1e-4 {
            rec.warn(format!("branch {j}: Pohozaev residual {pohozaev:.3e} above 1e-4"));
        }
        println!(
            "branch {j}: E = {}  mass = {}  steps = {}  pohozaev = {pohozaev:.2e}",
            fmt_f64(st.energy),
            fmt_f64(st.mass()),
            path.steps.len()
        );
        rec.csv(&format!("profile_b{j}_gamma1.csv"), "profile", &PROFILE_HEADER, &profile_rows(st))?;
        summary.push(json!({
            "branch": j, "energy": st.energy, "mass": st.mass(), "steps": path.steps.len(),
            "pohozaev_residual": pohozaev, "linear_energy": stage.linear_energy(*j)?,
        }));
    }
    rec.csv("branch_gamma.csv", "branch", &BRANCH_HEADER, &rows)?;
    rec.finish(cfg, json!({ "branches": summary }))?;
    Ok(())
}

fn sweep_e(cfg: &RunConfig) -> Result<()> {
    let (_, stage) = branch_stage(cfg, &cfg.branches)?;
    let options = TraceOptions {
        energy_max: cfg.e_max.unwrap_or(f64::NAN),
        ..TraceOptions::default()
    };
    let curves = per_branch(&cfg.branches, |j| {
        let path = stage.continue_gamma(j, cfg.mass, cfg.gamma_step)?;
        stage.trace(&path, options)
    })?;
    let mut rec = RunRecorder::new(cfg, "sweep-E", "sweep-E")?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for curve in &curves {
        let j = curve.branch;
        for s in &curve.samples {
            rows.push(vec![j.into(), 1.0.into(), s.energy.into(), s.mass.into(), s.nodes.into(), s.residual.into()]);
        }
        let d = d_second_sign(&curve.samples)?;
        if let Some(w) = &d.warning {
            rec.warn(format!("branch {j}: {w}"));
        }
        let (lo, hi) = curve.energy_range();
        println!(
            "branch {j}: {} samples, E in [{lo:.6}, {hi:.6}], p = {}, max |d' - M| / M = {:.2e}",
            curve.samples.len(),
            d.p,
            d.max_relative_error
        );
        summary.push(json!({
            "branch": j, "samples": curve.samples.len(), "energy_range": [lo, hi], "p": d.p,
            "slope_check_max_relative_error": d.max_relative_error,
            "low_stop": curve.low_stop, "high_stop": curve.high_stop,
        }));
    }
    rec.csv("branch.csv", "branch", &BRANCH_HEADER, &rows)?;
    rec.finish(cfg, json!({ "branches": summary }))?;
    Ok(())
}

fn spectrum(cfg: &RunConfig) -> Result<()> {
    let (_, stage) = branch_stage(cfg, &cfg.branches)?;
    let m = cfg.stability_mesh;
    let v = cfg.potential_spec(m.r_max)?;
    let sops = assemble(&RadialMesh::sinh(m.n, m.r_max)?, &v)?;
    let e = cfg.stability_energy;
    let reports = per_branch(&cfg.branches, |j| {
        let state = stage.state_at_energy(j, cfg.mass, cfg.gamma_step, e)?;
        let d = local_d_second(&stage.solver, &state)?;
        analyze_state(&sops, &state, d.p)
    })?;
    let id = format!("spectrum_E{}", energy_tag(e));
    let mut rec = RunRecorder::new(cfg, "spectrum", &id)?;
    let mut summary = Vec::new();
    for r in &reports {
        let j = r.branch;
        let mut rows: Vec<Vec<Cell>> = Vec::new();
        rows.extend(r.lpm.minus.iter().map(|&x| vec!["Lminus".into(), x.into(), 0.0.into()]));
        rows.extend(r.lpm.plus.iter().map(|&x| vec!["Lplus".into(), x.into(), 0.0.into()]));
        rows.extend(r.jl.kernel_pair.iter().chain(&r.jl.eigenvalues).map(|z| vec!["JL".into(), z.re.into(), z.im.into()]));
        rec.csv(&format!("spectrum_b{j}_E{}.csv", energy_tag(e)), "spectrum", &["operator", "re", "im"], &rows)?;
        for w in &r.warnings {
            rec.warn(format!("branch {j}: {w}"));
        }
        println!(
            "branch {j}: n(L-) = {}  n(L+) = {}  p = {}  sigma_max = {:.3e}  quartets = {}  verdict = {}",
            r.lpm.n_minus,
            r.lpm.n_plus,
            r.p,
            r.jl.sigma_max,
            r.jl.quartets.len(),
            r.verdict.as_str()
        );
        summary.push(json!({
            "branch": j, "energy": r.energy, "n_minus": r.lpm.n_minus, "n_plus": r.lpm.n_plus, "p": r.p,
            "sigma_max": r.jl.sigma_max, "quartets": r.jl.quartets.len(), "verdict": r.verdict,
            "kernel_residual": r.kernel_residual, "symmetry_defect": r.jl.symmetry_defect,
            "kernel_pair": r.jl.kernel_pair.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        }));
    }
    rec.finish(cfg, json!({ "branches": summary }))?;
    Ok(())
}

fn transition(cfg: &RunConfig) -> Result<()> {
    let j = cfg.transition_branch;
    let (v, stage) = branch_stage(cfg, &[j])?;
    let e_top = cfg.transition_energies.iter().copied().fold(0.0, f64::max);
    let path = stage.continue_gamma(j, cfg.mass, cfg.gamma_step)?;
    let options = TraceOptions {
        energy_max: e_top.max(path.state.energy * 1.0001),
        ..TraceOptions::default()
    };
    let curve = stage.trace(&path, options)?;
    let m = cfg.stability_mesh;
    let sops = assemble(&RadialMesh::sinh(m.n, m.r_max)?, &cfg.potential_spec(m.r_max)?)?;
    let norms = potential_norms(&v)?;
    let scan = transition_scan(
        &sops,
        &stage.solver,
        &curve,
        &cfg.transition_energies,
        cfg.transition_tolerance,
        &norms,
        cfg.bound_constants,
    )?;
    let mut rec = RunRecorder::new(cfg, "transition", &format!("transition_b{j}"))?;
    let rows: Vec<Vec<Cell>> = scan
        .points
        .iter()
        .map(|p| {
            vec![
                p.energy.into(),
                p.mass.into(),
                p.sigma_max.into(),
                p.bound.value().into(),
                p.bound.l3.into(),
                p.bound.gradient.into(),
                p.n_minus.into(),
            ]
        })
        .collect();
    rec.csv(
        &format!("transition_b{j}.csv"),
        "transition",
        &["E", "mass", "sigma_max", "bound", "bound_l3", "bound_gradient", "n_minus"],
        &rows,
    )?;
    for p in &scan.points {
        println!(
            "E = {:.6}  mass = {:.4e}  sigma_max = {:.4e}  bound = {:.4e}",
            p.energy,
            p.mass,
            p.sigma_max,
            p.bound.value()
        );
        if p.sigma_max > p.bound.value() {
            rec.warn(format!("sigma_max {:.3e} exceeds the bound {:.3e} at E = {}", p.sigma_max, p.bound.value(), p.energy));
        }
    }
    match scan.bracket {
        Some((a, b)) => println!("transition bracket [{a:.6}, {b:.6}], crossing {:.6}", 0.5 * (a + b)),
        None => rec.warn("no stable-to-unstable crossing in the scanned energies"),
    }
    rec.finish(cfg, json!({ "branch": j, "bracket": scan.bracket, "crossing": scan.crossing() }))?;
    Ok(())
}

fn evolve_cmd(cfg: &RunConfig) -> Result<()> {
    let p = cfg.evolution;
    let j = cfg.evolution_branch;
    let (v, stage) = branch_stage(cfg, &[j])?;
    let state = stage.state_at_energy(j, cfg.mass, cfg.gamma_step, cfg.evolution_energy)?;
    let eops = assemble(&RadialMesh::sinh(p.n, p.r_max)?, &cfg.potential_spec(p.r_max)?)?;
    let base = stationary_state(&eops, &state, v.charge())?;
    let integ = StrangIntegrator::new(&eops, p.dt)?;
    let (bump, warning) = perturbed_ic(&eops, &vec![0.0; base.u.len()], p.epsilon)?;
    let start = match cfg.evolution_start {
        EvolutionStart::Nodal => EvolutionField::real(&base.u),
        EvolutionStart::FixedPoint => strang_stationary_state(&integ, &base)?,
    };
    let ic = EvolutionField {
        t: 0.0,
        phi: start.phi.iter().zip(&bump.phi).map(|(a, b)| a + b).collect(),
    };
    let radii = cfg.sample_radii();
    let (_, out) = evolve(&integ, &ic, p.t_final, p.snapshot_stride, &radii, 10.0 * p.epsilon.max(1e-12))?;
    let id = format!("b{j}_E{}_eps{}", energy_tag(cfg.evolution_energy), energy_tag(p.epsilon));
    let mut rec = RunRecorder::new(cfg, "evolve", &format!("evolve_{id}"))?;
    if let Some(w) = warning {
        rec.warn(w);
    }
    for w in &out.warnings {
        rec.warn(w.clone());
    }
    let tr = &out.trace;
    let rows: Vec<Vec<Cell>> = (0..tr.time.len())
        .map(|k| vec![tr.time[k].into(), tr.mass[k].into(), tr.energy[k].into(), tr.boundary[k].into()])
        .collect();
    rec.csv(&format!("trace_{id}.csv"), "trace", &["t", "mass", "energy", "boundary_mag"], &rows)?;
    let mut snap = Vec::with_capacity(out.snapshots.len() * radii.len());
    for (t, row) in out.snapshot_times.iter().zip(&out.snapshots) {
        for (r, m) in radii.iter().zip(row) {
            snap.push(vec![(*t).into(), (*r).into(), f64::from(*m).into()]);
        }
    }
    rec.csv(&format!("snapshots_{id}.csv"), "snapshots", &["t", "r", "modulus"], &snap)?;
    println!(
        "branch {j}, E = {}: max modulus deviation {:.3e}, departure {:?}, mass drift {:.2e}, energy drift {:.2e}",
        cfg.evolution_energy,
        out.max_modulus_deviation,
        out.departure_time,
        tr.mass_drift(),
        tr.energy_drift()
    );
    rec.finish(
        cfg,
        json!({
            "branch": j, "energy": cfg.evolution_energy, "stationary_residual": base.residual,
            "max_modulus_deviation": out.max_modulus_deviation, "departure_level": out.departure_level,
            "departure_time": out.departure_time, "mass_drift": tr.mass_drift(), "energy_drift": tr.energy_drift(),
        }),
    )?;
    Ok(())
}

fn rescale(cfg: &RunConfig) -> Result<()> {
    let j = cfg.branches[0];
    let (_, stage) = branch_stage(cfg, &[j])?;
    let path = stage.continue_gamma(j, cfg.mass, cfg.gamma_step)?;
    let options = TraceOptions {
        energy_max: cfg.rescale_e_max,
        max_down_steps: 0,
        max_up_steps: 400,
        ..TraceOptions::default()
    };
    let curve = stage.trace(&path, options)?;
    let report = rescale_check(&curve)?;
    let mut rec = RunRecorder::new(cfg, "rescale-check", &format!("rescale_b{j}"))?;
    let rows: Vec<Vec<Cell>> = curve
        .samples
        .iter()
        .map(|s| vec![j.into(), 1.0.into(), s.energy.into(), s.mass.into(), s.nodes.into(), s.residual.into()])
        .collect();
    rec.csv(&format!("branch_tail_b{j}.csv"), "branch", &BRANCH_HEADER, &rows)?;
    let mut prof = Vec::new();
    for (e, u) in &report.profiles {
        for (y, val) in report.reference_grid.iter().zip(u) {
            prof.push(vec![(*e).into(), (*y).into(), (*val).into()]);
        }
    }
    rec.csv(&format!("rescaled_b{j}.csv"), "rescaled", &["E", "y", "u_rescaled"], &prof)?;
    println!(
        "branch {j}: log-log slope {:.4} over E in [{:.3}, {:.3}]; successive sup differences {:?}",
        report.slope, report.fit_range.0, report.fit_range.1, report.successive_differences
    );
    rec.finish(
        cfg,
        json!({
            "branch": j, "slope": report.slope, "fit_range": report.fit_range,
            "successive_differences": report.successive_differences, "high_stop": curve.high_stop,
        }),
    )?;
    Ok(())
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
    pass: bool,
}

/// Oracle checks with known answers.
pub fn oracle_checks(cfg: &RunConfig) -> Result<Vec<(String, f64, f64, bool)>> {
    let mut checks = Vec::new();
    let mut push = |c: Check| checks.push((c.name.to_string(), c.value, c.tolerance, c.pass));

    let quad = (0..=5)
        .map(|k| {
            let s: f64 = GAUSS3.iter().map(|(x, w)| w * x.powi(k)).sum();
            (s - 1.0 / (k as f64 + 1.0)).abs()
        })
        .fold(0.0, f64::max);
    push(Check { name: "quadrature_degree5", value: quad, tolerance: 1e-15, pass: quad <= 1e-15 });

    let mesh = RadialMesh::sinh(400, 20.0)?;
    let ops = assemble(&mesh, &PotentialSpec::smoothed_exponential())?;
    let ones = vec![1.0; mesh.n_nodes()];
    let volume = ops.m_full.bilinear(&ones, &ones);
    let rel = (volume - 20f64.powi(3) / 3.0).abs() / (20f64.powi(3) / 3.0);
    push(Check { name: "mass_matrix_volume", value: rel, tolerance: 1e-13, pass: rel <= 1e-13 });
    let kin = ops.k_full.matvec(&ones).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    push(Check { name: "stiffness_constants", value: kin, tolerance: 1e-12, pass: kin <= 1e-12 });

    let h_mesh = RadialMesh::sinh(4000, 200.0)?;
    let coulomb = PotentialSpec::coulomb_table(1.0, 1e-4, 200.0, 4000)?;
    let pairs = solve_linear_states(&assemble(&h_mesh, &coulomb)?, 2)?;
    for (name, k, exact) in [("hydrogen_1s", 0, -0.25), ("hydrogen_2s", 1, -0.0625)] {
        let err = (pairs[k].eigenvalue - exact).abs();
        push(Check { name, value: err, tolerance: 1e-4, pass: err <= 1e-4 });
    }

    let lm = cfg.linear_mesh;
    let v = cfg.potential_spec(lm.r_max)?;
    let lin_ops = assemble(&RadialMesh::sinh(lm.n, lm.r_max)?, &v)?;
    let pairs = solve_linear_states(&lin_ops, cfg.linear_count)?;
    let ordered = sturm_check(&pairs).is_ok() && pairs.iter().enumerate().all(|(j, p)| p.nodes == j);
    push(Check { name: "sturm_ordering", value: pairs.len() as f64, tolerance: 0.0, pass: ordered });

    let (v, stage) = branch_stage(cfg, &[0])?;
    let path = stage.continue_gamma(0, cfg.mass, cfg.gamma_step)?;
    let poh = path.state.pohozaev_residual(&v);
    push(Check { name: "pohozaev_branch0", value: poh, tolerance: 1e-4, pass: poh <= 1e-4 });
    Ok(checks)
}

fn validate(cfg: &RunConfig) -> Result<()> {
    let checks = oracle_checks(cfg)?;
    let mut rec = RunRecorder::new(cfg, "validate", "validate")?;
    let rows: Vec<Vec<Cell>> = checks
        .iter()
        .map(|(n, v, t, p)| vec![n.as_str().into(), (*v).into(), (*t).into(), if *p { "pass" } else { "fail" }.into()])
        .collect();
    rec.csv("validate.csv", "validate", &["check", "value", "tolerance", "status"], &rows)?;
    for (n, v, t, p) in &checks {
        println!("{} {n}: {v:.3e} (tolerance {t:.1e})", if *p { "PASS" } else { "FAIL" });
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.3).map(|c| c.0.as_str()).collect();
    rec.finish(cfg, json!({ "checks": checks.len(), "failed": failed }))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Evaluation(format!("oracle checks failed: {}", failed.join(", "))))
    }
}
