use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::EvolutionParams;
use crate::potential::PotentialSpec;
use crate::stability::BoundConstants;

pub const OUTPUT_DIR_ENV: &str = "RADIAL_SP_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    pub n: usize,
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialConfig {
    SmoothedExponential { charge: f64, scale: f64 },
    /// Tabulated `-Z/r`, constant below `r_min`.
    Coulomb { charge: f64, r_min: f64 },
    /// Two comma-separated columns `r, V`; `#` starts a comment.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolutionStart {
    /// Nodal semi-discrete bound state.
    Nodal,
    /// Fixed point of the Strang map.
    FixedPoint,
}

/// Everything a run needs. Built from defaults, a flat `key = value` file,
/// the output-directory environment override and finally command-line
/// overrides, in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    pub linear_mesh: MeshConfig,
    pub linear_count: usize,
    pub branch_mesh: MeshConfig,
    pub branches: Vec<usize>,
    pub mass: f64,
    pub gamma_step: f64,
    /// Upper end of the E sweep; `None` means twice the mass-one energy.
    pub e_max: Option<f64>,
    pub rescale_e_max: f64,
    pub stability_mesh: MeshConfig,
    pub stability_energy: f64,
    pub transition_branch: usize,
    pub transition_energies: Vec<f64>,
    pub transition_tolerance: f64,
    pub bound_constants: BoundConstants,
    pub evolution: EvolutionParams,
    pub evolution_branch: usize,
    pub evolution_energy: f64,
    pub evolution_start: EvolutionStart,
    pub sample_dr: f64,
    pub sample_r_max: f64,
    pub output_dir: PathBuf,
    /// Worker threads for independent jobs; 0 picks the machine default.
    pub threads: usize,
    pub newton_tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential: PotentialConfig::SmoothedExponential { charge: 1.0, scale: 1.0 },
            linear_mesh: MeshConfig { n: 4000, r_max: 100.0 },
            linear_count: 4,
            branch_mesh: MeshConfig { n: 4000, r_max: 300.0 },
            branches: vec![0, 1, 2, 3],
            mass: 1.0,
            gamma_step: 0.05,
            e_max: None,
            rescale_e_max: 100.0,
            stability_mesh: MeshConfig { n: 2000, r_max: 100.0 },
            stability_energy: 1.0,
            transition_branch: 1,
            transition_energies: vec![0.07, 0.1, 0.13, 0.16, 0.25, 0.5, 1.0],
            transition_tolerance: 0.01,
            bound_constants: BoundConstants::default(),
            evolution: EvolutionParams::desk(),
            evolution_branch: 0,
            evolution_energy: 1.0,
            evolution_start: EvolutionStart::Nodal,
            sample_dr: 0.25,
            sample_r_max: 50.0,
            output_dir: PathBuf::from("out"),
            threads: 0,
            newton_tolerance: 1e-10,
        }
    }
}

pub const KEYS: &[&str] = &[
    "potential",
    "potential.charge",
    "potential.scale",
    "potential.r_min",
    "potential.file",
    "linear.n",
    "linear.r_max",
    "linear.count",
    "branch.n",
    "branch.r_max",
    "branches",
    "mass",
    "gamma_step",
    "e_max",
    "rescale.e_max",
    "stability.n",
    "stability.r_max",
    "stability.energy",
    "transition.branch",
    "transition.energies",
    "transition.tolerance",
    "bound.constants",
    "evolve.profile",
    "evolve.n",
    "evolve.r_max",
    "evolve.dt",
    "evolve.t_final",
    "evolve.epsilon",
    "evolve.stride",
    "evolve.branch",
    "evolve.energy",
    "evolve.start",
    "sample.dr",
    "sample.r_max",
    "output_dir",
    "threads",
    "newton.tolerance",
];

fn field(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| field(key, format!("cannot parse {value:?} ({e})")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect()
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {line:?}", k + 1)))?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "potential" => {
                self.potential = match v {
                    "smoothed-exponential" => PotentialConfig::SmoothedExponential { charge: 1.0, scale: 1.0 },
                    "coulomb" => PotentialConfig::Coulomb { charge: 1.0, r_min: 1e-4 },
                    "file" => PotentialConfig::File { path: PathBuf::new() },
                    _ => return Err(field(key, format!("unknown potential {v:?} (smoothed-exponential, coulomb, file)"))),
                }
            }
            "potential.charge" => {
                let z: f64 = parse(key, v)?;
                match &mut self.potential {
                    PotentialConfig::SmoothedExponential { charge, .. } | PotentialConfig::Coulomb { charge, .. } => *charge = z,
                    PotentialConfig::File { .. } => return Err(field(key, "not used by a file potential")),
                }
            }
            "potential.scale" => match &mut self.potential {
                PotentialConfig::SmoothedExponential { scale, .. } => *scale = parse(key, v)?,
                _ => return Err(field(key, "only used by the smoothed-exponential potential")),
            },
            "potential.r_min" => match &mut self.potential {
                PotentialConfig::Coulomb { r_min, .. } => *r_min = parse(key, v)?,
                _ => return Err(field(key, "only used by the coulomb potential")),
            },
            "potential.file" => match &mut self.potential {
                PotentialConfig::File { path } => *path = PathBuf::from(v),
                _ => return Err(field(key, "set potential = file first")),
            },
            "linear.n" => self.linear_mesh.n = parse(key, v)?,
            "linear.r_max" => self.linear_mesh.r_max = parse(key, v)?,
            "linear.count" => self.linear_count = parse(key, v)?,
            "branch.n" => self.branch_mesh.n = parse(key, v)?,
            "branch.r_max" => self.branch_mesh.r_max = parse(key, v)?,
            "branches" => self.branches = parse_list(key, v)?,
            "mass" => self.mass = parse(key, v)?,
            "gamma_step" => self.gamma_step = parse(key, v)?,
            "e_max" => self.e_max = if v == "auto" { None } else { Some(parse(key, v)?) },
            "rescale.e_max" => self.rescale_e_max = parse(key, v)?,
            "stability.n" => self.stability_mesh.n = parse(key, v)?,
            "stability.r_max" => self.stability_mesh.r_max = parse(key, v)?,
            "stability.energy" => self.stability_energy = parse(key, v)?,
            "transition.branch" => self.transition_branch = parse(key, v)?,
            "transition.energies" => self.transition_energies = parse_list(key, v)?,
            "transition.tolerance" => self.transition_tolerance = parse(key, v)?,
            "bound.constants" => {
                self.bound_constants = match v {
                    "sharp" => BoundConstants::default(),
                    "fallback" => BoundConstants::fallback(),
                    _ => return Err(field(key, format!("expected sharp or fallback, got {v:?}"))),
                }
            }
            "evolve.profile" => {
                self.evolution = match v {
                    "desk" => EvolutionParams::desk(),
                    "long" => EvolutionParams::long(),
                    _ => return Err(field(key, format!("expected desk or long, got {v:?}"))),
                }
            }
            "evolve.n" => self.evolution.n = parse(key, v)?,
            "evolve.r_max" => self.evolution.r_max = parse(key, v)?,
            "evolve.dt" => self.evolution.dt = parse(key, v)?,
            "evolve.t_final" => self.evolution.t_final = parse(key, v)?,
            "evolve.epsilon" => self.evolution.epsilon = parse(key, v)?,
            "evolve.stride" => self.evolution.snapshot_stride = parse(key, v)?,
            "evolve.branch" => self.evolution_branch = parse(key, v)?,
            "evolve.energy" => self.evolution_energy = parse(key, v)?,
            "evolve.start" => {
                self.evolution_start = match v {
                    "nodal" => EvolutionStart::Nodal,
                    "fixed-point" => EvolutionStart::FixedPoint,
                    _ => return Err(field(key, format!("expected nodal or fixed-point, got {v:?}"))),
                }
            }
            "sample.dr" => self.sample_dr = parse(key, v)?,
            "sample.r_max" => self.sample_r_max = parse(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "threads" => self.threads = parse(key, v)?,
            "newton.tolerance" => self.newton_tolerance = parse(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<()> {
        pairs.iter().try_for_each(|(k, v)| self.set(k, v))
    }

    /// Defaults, then `file`, then the environment override, then `overrides`.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply(&parse_pairs(&text)?)?;
        }
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                cfg.output_dir = PathBuf::from(dir);
            }
        }
        cfg.apply(overrides)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mesh = |key: &str, m: &MeshConfig| -> Result<()> {
            if m.n < 2 {
                return Err(field(key, format!("mesh needs n >= 2 elements, got n = {}", m.n)));
            }
            if !(m.r_max > 0.0 && m.r_max.is_finite()) {
                return Err(field(key, format!("mesh needs r_max > 0, got {}", m.r_max)));
            }
            Ok(())
        };
        mesh("linear.n", &self.linear_mesh)?;
        mesh("branch.n", &self.branch_mesh)?;
        mesh("stability.n", &self.stability_mesh)?;
        match &self.potential {
            PotentialConfig::SmoothedExponential { charge, scale } => {
                if !(*charge > 0.0) || !(*scale > 0.0) {
                    return Err(field("potential.charge", "charge and scale must be positive"));
                }
            }
            PotentialConfig::Coulomb { charge, r_min } => {
                if !(*charge > 0.0) || !(*r_min > 0.0) {
                    return Err(field("potential.charge", "charge and r_min must be positive"));
                }
            }
            PotentialConfig::File { path } => {
                if path.as_os_str().is_empty() {
                    return Err(field("potential.file", "path is required"));
                }
            }
        }
        if self.linear_count == 0 {
            return Err(field("linear.count", "must be at least 1"));
        }
        if self.branches.is_empty() {
            return Err(field("branches", "list is empty"));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(field("mass", format!("must be positive, got {}", self.mass)));
        }
        if !(self.gamma_step > 0.0 && self.gamma_step <= 0.2) {
            return Err(field("gamma_step", format!("must lie in (0, 0.2], got {}", self.gamma_step)));
        }
        if let Some(e) = self.e_max {
            if !(e > 0.0 && e.is_finite()) {
                return Err(field("e_max", format!("must be positive, got {e}")));
            }
        }
        if !(self.rescale_e_max > 0.0) {
            return Err(field("rescale.e_max", "must be positive"));
        }
        if !(self.stability_energy > 0.0) {
            return Err(field("stability.energy", "must be positive"));
        }
        if self.transition_energies.is_empty() || self.transition_energies.iter().any(|e| !(*e > 0.0)) {
            return Err(field("transition.energies", "need a non-empty list of positive energies"));
        }
        if !(self.transition_tolerance > 0.0) {
            return Err(field("transition.tolerance", "must be positive"));
        }
        self.evolution
            .validate()
            .map_err(|e| field("evolve", e.to_string().trim_start_matches("invalid configuration: ")))?;
        if !(self.evolution_energy > 0.0) {
            return Err(field("evolve.energy", "must be positive"));
        }
        if !(self.sample_dr > 0.0) || !(self.sample_r_max > 0.0) {
            return Err(field("sample.dr", "sample spacing and range must be positive"));
        }
        if !(self.newton_tolerance > 0.0) {
            return Err(field("newton.tolerance", "must be positive"));
        }
        Ok(())
    }

    /// Resolves the potential; `r_max` bounds the Coulomb table.
    pub fn potential_spec(&self, r_max: f64) -> Result<PotentialSpec> {
        match &self.potential {
            PotentialConfig::SmoothedExponential { charge, scale } => Ok(PotentialSpec::SmoothedExponential {
                charge: *charge,
                scale: *scale,
            }),
            PotentialConfig::Coulomb { charge, r_min } => {
                PotentialSpec::coulomb_table(*charge, *r_min, r_max.max(10.0 * r_min), 4000)
            }
            PotentialConfig::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| field("potential.file", format!("{}: {e}", path.display())))?;
                let mut radii = Vec::new();
                let mut values = Vec::new();
                for line in text.lines() {
                    let line = line.split('#').next().unwrap_or("").trim();
                    if line.is_empty() || line.starts_with(|c: char| c.is_alphabetic()) {
                        continue;
                    }
                    let cols: Vec<&str> = line.split(',').collect();
                    if cols.len() < 2 {
                        return Err(field("potential.file", format!("expected r, V columns in {line:?}")));
                    }
                    radii.push(parse::<f64>("potential.file", cols[0])?);
                    values.push(parse::<f64>("potential.file", cols[1])?);
                }
                PotentialSpec::tabulated(radii, values).map_err(|e| field("potential.file", e))
            }
        }
    }

    /// Canonical `key = value` rendering, hashed into run manifests.
    pub fn canonical(&self) -> String {
        let json = serde_json::to_value(self).expect("config serializes");
        let mut flat = BTreeMap::new();
        flatten("", &json, &mut flat);
        flat.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn sample_radii(&self) -> Vec<f64> {
        let count = (self.sample_r_max / self.sample_dr).round() as usize;
        (0..=count).map(|i| i as f64 * self.sample_dr).collect()
    }
}

fn flatten(prefix: &str, value: &serde_json::Value, out: &mut BTreeMap<String, String>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.to_string());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn every_key_is_settable() {
        for key in KEYS {
            let mut cfg = RunConfig::default();
            let value = match *key {
                "potential" => "coulomb",
                "potential.r_min" => {
                    cfg.set("potential", "coulomb").unwrap();
                    "0.001"
                }
                "potential.file" => {
                    cfg.set("potential", "file").unwrap();
                    "v.csv"
                }
                "branches" | "transition.energies" => "1,2",
                "bound.constants" => "fallback",
                "evolve.profile" => "long",
                "evolve.start" => "fixed-point",
                "output_dir" => "x",
                "e_max" => "auto",
                _ => "3",
            };
            cfg.set(key, value).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }

    #[test]
    fn file_then_override() {
        let pairs = parse_pairs("# comment\nlinear.n = 10\n\nbranches = 0, 2 # trailing\n").unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply(&pairs).unwrap();
        cfg.apply(&[("linear.n".into(), "20".into())]).unwrap();
        assert_eq!(cfg.linear_mesh.n, 20);
        assert_eq!(cfg.branches, vec![0, 2]);
    }

    #[test]
    fn mesh_precondition_is_named() {
        let mut cfg = RunConfig::default();
        cfg.set("linear.n", "1").unwrap();
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("linear.n") && msg.contains("n >= 2"), "{msg}");
    }

    #[test]
    fn bad_lines_and_keys() {
        assert!(parse_pairs("no equals sign").is_err());
        assert!(RunConfig::default().set("nope", "1").is_err());
        assert!(RunConfig::default().set("linear.n", "ten").is_err());
        assert!(RunConfig::default().set("potential.scale", "x").is_err());
    }

    #[test]
    fn canonical_is_stable_and_sensitive() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.canonical(), b.canonical());
        b.set("mass", "2").unwrap();
        assert_ne!(a.canonical(), b.canonical());
    }
}
