use serde::{Deserialize, Serialize};

use crate::bound_states::branch::{BranchCurve, BranchSample};
use crate::bound_states::state::BoundState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeCheck {
    pub energy_mid: f64,
    /// `Δd/ΔE` with `d = H + E M`.
    pub slope: f64,
    /// Trapezoidal mean of `M` over the interval.
    pub mass_mean: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DSecondReport {
    /// 1 if `d'' = M'` is positive along the whole curve, else 0.
    pub p: u8,
    pub warning: Option<String>,
    pub table: Vec<SlopeCheck>,
    pub max_relative_error: f64,
}

/// Sign of `d''(E)` from the monotonicity of `M(E) = d'(E)`, with a
/// finite-difference check of `d' = M`.
pub fn d_second_sign(samples: &[BranchSample]) -> Result<DSecondReport> {
    if samples.len() < 3 {
        return Err(Error::Range(format!(
            "need at least 3 branch samples, got {}",
            samples.len()
        )));
    }
    let increasing = samples.windows(2).all(|w| w[1].mass > w[0].mass);
    let decreasing = samples.windows(2).all(|w| w[1].mass < w[0].mass);
    let warning = (!increasing && !decreasing).then(|| "mass is not monotone in E".to_string());
    let table: Vec<SlopeCheck> = samples
        .windows(2)
        .map(|w| {
            let d = |s: &BranchSample| s.hamiltonian + s.energy * s.mass;
            let slope = (d(&w[1]) - d(&w[0])) / (w[1].energy - w[0].energy);
            let mass_mean = 0.5 * (w[0].mass + w[1].mass);
            SlopeCheck {
                energy_mid: 0.5 * (w[0].energy + w[1].energy),
                slope,
                mass_mean,
                relative_error: (slope - mass_mean).abs() / mass_mean.abs(),
            }
        })
        .collect();
    let max_relative_error = table.iter().fold(0.0f64, |m, c| m.max(c.relative_error));
    Ok(DSecondReport {
        p: u8::from(increasing),
        warning,
        table,
        max_relative_error,
    })
}

/// `ũ(y) = u(y/√E)/E` sampled at `y`.
pub fn rescale_profile(state: &BoundState, y: &[f64]) -> Vec<f64> {
    let k = state.energy.sqrt();
    y.iter().map(|&s| state.eval_u(s / k) / state.energy).collect()
}

/// Inverse of [`rescale_profile`]: `u(r) = E ũ(√E r)`.
pub fn unscale_profile(rescaled: impl Fn(f64) -> f64, energy: f64, r: &[f64]) -> Vec<f64> {
    let k = energy.sqrt();
    r.iter().map(|&x| energy * rescaled(k * x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaleReport {
    /// Least-squares slope of `log M` against `log E` over the top decade.
    pub slope: f64,
    pub fit_range: (f64, f64),
    pub reference_grid: Vec<f64>,
    /// `(E, ũ)` for the compared states, increasing `E`.
    pub profiles: Vec<(f64, Vec<f64>)>,
    /// Relative sup-distance between consecutive compared profiles.
    pub successive_differences: Vec<f64>,
}

/// Large-`E` scaling diagnostics of a branch spanning at least one decade.
pub fn rescale_check(curve: &BranchCurve) -> Result<RescaleReport> {
    let e = curve.energies();
    let (lo, hi) = (e[0], e[e.len() - 1]);
    if hi < 10.0 * lo * (1.0 - 1e-12) {
        return Err(Error::Range(format!(
            "E range [{lo}, {hi}] spans less than a decade"
        )));
    }
    let cut = hi / 10.0;
    let pts: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .filter(|s| s.energy >= cut * (1.0 - 1e-12))
        .map(|s| (s.energy.ln(), s.mass.ln()))
        .collect();
    let slope = least_squares_slope(&pts);

    let reference_grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.025).collect();
    let mut targets = vec![hi / 8.0, hi / 4.0, hi / 2.0, hi];
    targets.retain(|&t| t >= lo);
    let mut profiles: Vec<(f64, Vec<f64>)> = Vec::new();
    for t in targets {
        let s = curve.nearest(t);
        if profiles.last().map(|p| p.0) != Some(s.energy) {
            profiles.push((s.energy, rescale_profile(s, &reference_grid)));
        }
    }
    let successive_differences = profiles
        .windows(2)
        .map(|w| {
            let peak = w[1].1.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let diff = w[0].1.iter().zip(&w[1].1).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            diff / peak
        })
        .collect();
    Ok(RescaleReport {
        slope,
        fit_range: (cut.max(lo), hi),
        reference_grid,
        profiles,
        successive_differences,
    })
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// A bound state continued past its `r_max` by the matched asymptotic form
/// `u(r_max) e^{-√E (r - r_max)} (r / r_max)^β`, `β = -1 + (Z + m)/(2√E)`.
#[derive(Debug, Clone)]
pub struct ExtendedProfile {
    state: BoundState,
    pub decay: f64,
    pub exponent: f64,
    pub r_match: f64,
    pub u_match: f64,
    pub r_max_new: f64,
}

pub fn farfield_extend(state: &BoundState, r_max_new: f64, charge: f64) -> Result<ExtendedProfile> {
    let r_match = state.r_max();
    if !(r_max_new > r_match) {
        return Err(Error::Domain(format!(
            "extension radius {r_max_new} must exceed r_max = {r_match}"
        )));
    }
    if !(state.energy > 0.0) {
        return Err(Error::Domain("far-field extension needs E > 0".into()));
    }
    let u_match = state.u[state.n_nodes() - 1];
    if u_match == 0.0 || !u_match.is_finite() {
        return Err(Error::Matching(format!(
            "cannot match a vanishing tail value u(r_max) = {u_match:e}"
        )));
    }
    let decay = state.energy.sqrt();
    let exponent = -1.0 + (charge + state.gamma * state.mass()) / (2.0 * decay);
    Ok(ExtendedProfile {
        state: state.clone(),
        decay,
        exponent,
        r_match,
        u_match,
        r_max_new,
    })
}

impl ExtendedProfile {
    pub fn eval(&self, r: f64) -> f64 {
        if r <= self.r_match {
            self.state.eval_u(r)
        } else {
            self.u_match * (-self.decay * (r - self.r_match)).exp() * (r / self.r_match).powf(self.exponent)
        }
    }

    pub fn sample(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&r| self.eval(r)).collect()
    }
}
