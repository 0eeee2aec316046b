//! External potentials and the analytic hydrogen reference.
//!
//! The smoothed-exponential potential solves `ΔV = ρ` for the exponential
//! density `ρ(r) = Z/(2a³) e^{-r/a}`, so that
//! `V(r) = Z [ e^{-r/a}/(2a) - (1 - e^{-r/a})/r ]` with `r V(r) → -Z`.
//! Tabulated potentials interpolate linearly between samples, stay constant
//! below the first sample and continue with a Coulomb tail past the last.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this scaled radius the smoothed potential uses its Taylor series.
const SERIES_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialSpec {
    /// Field of an exponential charge cloud of total charge `charge` and
    /// decay length `scale`.
    SmoothedExponential { charge: f64, scale: f64 },
    /// Linear interpolation of `(radius, value)` samples; strictly increasing
    /// radii.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self::smoothed_exponential()
    }
}

impl PotentialSpec {
    /// The unit-charge, unit-length smoothed Coulomb potential.
    pub fn smoothed_exponential() -> Self {
        Self::SmoothedExponential {
            charge: 1.0,
            scale: 1.0,
        }
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(Error::Domain(
                "tabulated potential needs at least two (r, V) samples of equal length".into(),
            ));
        }
        if radii[0] < 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "tabulated radii must be non-negative and strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("tabulated potential has non-finite values".into()));
        }
        Ok(Self::Tabulated { radii, values })
    }

    /// `V ≡ 0` sampled on `[0, r_max]`.
    pub fn zero(r_max: f64) -> Self {
        Self::Tabulated {
            radii: vec![0.0, r_max.max(1.0)],
            values: vec![0.0, 0.0],
        }
    }

    /// Tabulated `-Z/r` on a log-spaced grid; constant below `r_min`, which
    /// regularizes the origin.
    pub fn coulomb_table(charge: f64, r_min: f64, r_max: f64, samples: usize) -> Result<Self> {
        if !(charge > 0.0) || !(r_min > 0.0) || !(r_max > r_min) || samples < 2 {
            return Err(Error::Domain("invalid Coulomb table parameters".into()));
        }
        let ratio = (r_max / r_min).ln() / (samples - 1) as f64;
        let radii: Vec<f64> = (0..samples)
            .map(|k| {
                if k + 1 == samples {
                    r_max
                } else {
                    r_min * (ratio * k as f64).exp()
                }
            })
            .collect();
        let values = radii.iter().map(|r| -charge / r).collect();
        Self::tabulated(radii, values)
    }

    /// Coulomb charge `Z` with `r V(r) → -Z`.
    pub fn charge(&self) -> f64 {
        match self {
            Self::SmoothedExponential { charge, .. } => *charge,
            Self::Tabulated { radii, values } => {
                let last = radii.len() - 1;
                -radii[last] * values[last]
            }
        }
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::Domain(format!("potential evaluated at r = {r}")));
        }
        Ok(self.value_unchecked(r))
    }

    /// `V(r)` for `r >= 0`; no domain check.
    pub fn value_unchecked(&self, r: f64) -> f64 {
        match self {
            Self::SmoothedExponential { charge, scale } => {
                charge / scale * smoothed_profile(r / scale)
            }
            Self::Tabulated { radii, values } => {
                let last = radii.len() - 1;
                if r <= radii[0] {
                    values[0]
                } else if r >= radii[last] {
                    values[last] * radii[last] / r
                } else {
                    let k = radii.partition_point(|&x| x <= r) - 1;
                    let t = (r - radii[k]) / (radii[k + 1] - radii[k]);
                    values[k] + t * (values[k + 1] - values[k])
                }
            }
        }
    }

    /// `dV/dr`.
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            Self::SmoothedExponential { charge, scale } => {
                charge / (scale * scale) * smoothed_profile_derivative(r / scale)
            }
            Self::Tabulated { radii, values } => {
                let last = radii.len() - 1;
                if r < radii[0] {
                    0.0
                } else if r >= radii[last] {
                    -values[last] * radii[last] / (r * r)
                } else {
                    let k = (radii.partition_point(|&x| x <= r) - 1).min(last - 1);
                    (values[k + 1] - values[k]) / (radii[k + 1] - radii[k])
                }
            }
        }
    }
}

/// `f(s) = e^{-s}/2 - (1 - e^{-s})/s`, the unit smoothed potential.
fn smoothed_profile(s: f64) -> f64 {
    if s < SERIES_RADIUS {
        -0.5 + s * s / 12.0
    } else {
        0.5 * (-s).exp() + (-s).exp_m1() / s
    }
}

/// `f'(s) = -e^{-s}/2 + (1 - e^{-s}(1 + s))/s²`.
fn smoothed_profile_derivative(s: f64) -> f64 {
    if s < 1e-3 {
        // 1 - e^{-s}(1+s) = s²/2 - s³/3 + s⁴/8 - s⁵/30 + ...
        let bracket = 0.5 - s / 3.0 + s * s / 8.0 - s * s * s / 30.0;
        -0.5 * (-s).exp() + bracket
    } else {
        -0.5 * (-s).exp() + (1.0 - (-s).exp() * (1.0 + s)) / (s * s)
    }
}

/// Convenience wrapper for the unit smoothed potential.
pub fn smoothed_coulomb_v(r: f64) -> Result<f64> {
    PotentialSpec::smoothed_exponential().value(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialNorms {
    /// `sup |V|`
    pub sup_abs: f64,
    /// `sup |r V'(r)|`
    pub sup_radial_derivative: f64,
    /// Radius where `|r V'|` peaks.
    pub argmax_radial_derivative: f64,
}

/// Suprema of `|V|` and `|r V'|` over a log grid of `10⁵` points on
/// `[10⁻⁶, 10⁴]`, plus the limits at `r = 0` and `r → ∞`.
pub fn potential_norms(spec: &PotentialSpec) -> Result<PotentialNorms> {
    const SAMPLES: usize = 100_000;
    let (lo, hi) = (1e-6f64, 1e4f64);
    let step = (hi / lo).ln() / (SAMPLES - 1) as f64;
    // r = 0 limit: V(0) finite, r V'(r) -> 0; r -> oo: both -> 0.
    let mut sup_abs = spec.value_unchecked(0.0).abs();
    let mut sup_rd = 0.0f64;
    let mut arg = 0.0;
    for k in 0..SAMPLES {
        let r = lo * (step * k as f64).exp();
        let v = spec.value_unchecked(r);
        let rd = r * spec.derivative(r);
        if !v.is_finite() || !rd.is_finite() {
            return Err(Error::Evaluation(format!(
                "potential not finite at r = {r:e}"
            )));
        }
        sup_abs = sup_abs.max(v.abs());
        if rd.abs() > sup_rd {
            sup_rd = rd.abs();
            arg = r;
        }
    }
    Ok(PotentialNorms {
        sup_abs,
        sup_radial_derivative: sup_rd,
        argmax_radial_derivative: arg,
    })
}

/// Exact radial `s`-state of `-Δ - Z/r`, eigenvalue `-E` with
/// `E = Z²/(4n²)` and profile `e^{-Zr/(2n)} L^{(1)}_{n-1}(Zr/n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydrogenState {
    pub n: usize,
    pub charge: f64,
    /// Binding energy `E > 0`.
    pub energy: f64,
}

impl HydrogenState {
    pub fn eigenvalue(&self) -> f64 {
        -self.energy
    }

    pub fn profile(&self, r: f64) -> f64 {
        self.profile_derivatives(r).0
    }

    /// `(u, u', u'')` at `r`.
    pub fn profile_derivatives(&self, r: f64) -> (f64, f64, f64) {
        let k = self.n - 1;
        let c = self.charge / self.n as f64;
        let x = c * r;
        let l0 = laguerre(k, 1.0, x);
        let l1 = if k >= 1 { -laguerre(k - 1, 2.0, x) } else { 0.0 };
        let l2 = if k >= 2 { laguerre(k - 2, 3.0, x) } else { 0.0 };
        let a = 0.5 * c;
        let e = (-a * r).exp();
        let u = e * l0;
        let du = e * (c * l1 - a * l0);
        let d2u = e * (c * c * l2 - 2.0 * a * c * l1 + a * a * l0);
        (u, du, d2u)
    }
}

pub fn hydrogen_reference(n: usize, charge: f64) -> Result<HydrogenState> {
    if n == 0 || !(charge > 0.0) {
        return Err(Error::Domain(format!(
            "hydrogen reference needs n >= 1 and Z > 0 (got n = {n}, Z = {charge})"
        )));
    }
    Ok(HydrogenState {
        n,
        charge,
        energy: charge * charge / (4.0 * (n * n) as f64),
    })
}

/// Generalized Laguerre polynomial `L_k^{(α)}(x)` by the three-term recurrence.
pub fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smoothed_values() {
        assert_eq!(smoothed_coulomb_v(0.0).unwrap(), -0.5);
        let direct = 0.5 * (-1.0f64).exp() - (1.0 - (-1.0f64).exp());
        assert_relative_eq!(smoothed_coulomb_v(1.0).unwrap(), direct, max_relative = 1e-15);
        assert_relative_eq!(smoothed_coulomb_v(1.0).unwrap(), -0.448181, epsilon = 5e-7);
        assert!(smoothed_coulomb_v(-1e-3).is_err());
    }

    #[test]
    fn smoothed_is_negative_and_bounded() {
        let v = PotentialSpec::smoothed_exponential();
        for k in 0..2000 {
            let r = 1e-8 * 1.02f64.powi(k);
            let x = v.value(r).unwrap();
            assert!(x < 0.0 && x.is_finite());
            assert!(x.abs() <= 0.5 + 1e-15);
        }
    }

    #[test]
    fn coulomb_tail() {
        let v = PotentialSpec::smoothed_exponential();
        for r in [1e3, 1e4] {
            assert_relative_eq!(r * v.value(r).unwrap(), -1.0, max_relative = 1e-3);
        }
    }

    #[test]
    fn series_branch_is_continuous() {
        let below = smoothed_profile(SERIES_RADIUS * 0.999_999);
        let above = smoothed_profile(SERIES_RADIUS * 1.000_001);
        assert!((below - above).abs() < 1e-12);
        let s = 1e-3f64;
        let direct = -0.5 * (-s).exp() + (1.0 - (-s).exp() * (1.0 + s)) / (s * s);
        assert!((smoothed_profile_derivative(s * 0.999_999) - direct).abs() < 1e-9);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let v = PotentialSpec::smoothed_exponential();
        for r in [1e-4, 0.01, 0.3, 1.0, 2.5, 10.0, 80.0] {
            let h = 1e-5 * (1.0 + r);
            let fd = (v.value(r + h).unwrap() - v.value(r - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(v.derivative(r), fd, max_relative = 1e-6, epsilon = 1e-10);
        }
    }

    /// The radial Laplacian of V reproduces the source density e^{-r}/2.
    #[test]
    fn laplacian_recovers_density() {
        let v = PotentialSpec::smoothed_exponential();
        for k in 1..200 {
            let r = 0.05 * k as f64;
            let h = 1e-3;
            let f = |x: f64| v.value(x).unwrap();
            let d2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
            let d1 = (f(r + h) - f(r - h)) / (2.0 * h);
            let lap = d2 + 2.0 / r * d1;
            assert!((lap - 0.5 * (-r).exp()).abs() < 2e-6, "r = {r}: {lap}");
        }
    }

    #[test]
    fn norms_of_smoothed_potential() {
        let n = potential_norms(&PotentialSpec::smoothed_exponential()).unwrap();
        assert_relative_eq!(n.sup_abs, 0.5, max_relative = 1e-12);
        assert!(n.sup_radial_derivative.is_finite() && n.sup_radial_derivative > 0.0);
        assert!(n.argmax_radial_derivative > 1e-3 && n.argmax_radial_derivative < 1e3);
    }

    #[test]
    fn norms_of_zero_potential() {
        let n = potential_norms(&PotentialSpec::zero(100.0)).unwrap();
        assert_eq!(n.sup_abs, 0.0);
        assert_eq!(n.sup_radial_derivative, 0.0);
    }

    #[test]
    fn tabulated_interpolation_and_tail() {
        let t = PotentialSpec::tabulated(vec![0.0, 1.0, 2.0], vec![-2.0, -1.0, -0.5]).unwrap();
        assert_eq!(t.value(0.5).unwrap(), -1.5);
        assert_eq!(t.value(4.0).unwrap(), -0.25);
        assert_eq!(t.charge(), 1.0);
        assert!(PotentialSpec::tabulated(vec![1.0, 0.5], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn hydrogen_energies() {
        assert_eq!(hydrogen_reference(1, 1.0).unwrap().energy, 0.25);
        assert_eq!(hydrogen_reference(2, 1.0).unwrap().energy, 0.0625);
        assert_eq!(hydrogen_reference(1, 2.0).unwrap().energy, 1.0);
        assert!(hydrogen_reference(0, 1.0).is_err());
        assert!(hydrogen_reference(1, 0.0).is_err());
        let e: Vec<f64> = (1..8).map(|n| hydrogen_reference(n, 1.0).unwrap().energy).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }

    #[test]
    fn hydrogen_ground_profile() {
        let h = hydrogen_reference(1, 1.0).unwrap();
        for r in [0.0, 0.5, 3.0] {
            assert_relative_eq!(h.profile(r), (-r / 2.0).exp(), max_relative = 1e-15);
        }
    }

    #[test]
    fn hydrogen_profiles_solve_radial_equation() {
        for n in 1..=4 {
            for z in [1.0, 2.0] {
                let h = hydrogen_reference(n, z).unwrap();
                for k in 0..=3000 {
                    let r = 0.01 + k as f64 * (30.0 - 0.01) / 3000.0;
                    let (u, du, d2u) = h.profile_derivatives(r);
                    let res = -d2u - 2.0 / r * du - z / r * u + h.energy * u;
                    assert!(res.abs() < 1e-10, "n={n} Z={z} r={r}: {res:e}");
                }
            }
        }
    }

    #[test]
    fn hydrogen_zero_crossings() {
        for n in 1..=4 {
            let h = hydrogen_reference(n, 1.0).unwrap();
            let samples: Vec<f64> = (0..20_000).map(|k| h.profile(k as f64 * 0.01)).collect();
            let crossings = samples
                .windows(2)
                .filter(|w| w[0].signum() != w[1].signum())
                .count();
            assert_eq!(crossings, n - 1);
        }
    }

    #[test]
    fn laguerre_closed_forms() {
        let x = 0.7;
        assert_relative_eq!(laguerre(1, 1.0, x), 2.0 - x);
        assert_relative_eq!(laguerre(2, 1.0, x), 0.5 * (x * x - 6.0 * x + 6.0), max_relative = 1e-14);
    }
}
