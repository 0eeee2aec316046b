use serde::{Deserialize, Serialize};

use crate::bound_states::BoundState;
use crate::potential::{PotentialNorms, PotentialSpec};

/// Sharp Hardy–Littlewood–Sobolev constant for the kernel `|x|⁻¹` in 3D,
/// `(4/3)(4/√π)^{2/3}`.
pub const C_HLS_SHARP: f64 = 2.294_010_703_541_599;
/// Sharp Sobolev constant of `‖f‖_6 ≤ C ‖∇f‖_2` in 3D,
/// `(3π)^{-1/2} (4/√π)^{1/3}`.
pub const C_GN_SHARP: f64 = 0.427_260_542_862_526_7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub c_hls: f64,
    pub c_gn: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants {
            c_hls: C_HLS_SHARP,
            c_gn: C_GN_SHARP,
        }
    }
}

impl BoundConstants {
    pub fn fallback() -> Self {
        BoundConstants { c_hls: 1.0, c_gn: 1.0 }
    }
}

/// Upper bounds on `|Re λ|` for the JL spectrum about a bound state.
///
/// Norms are taken in `ℝ³`; with the Hartree potential normalized by
/// `−Δw = u²` the convolution kernel is `(4π|x|)⁻¹`, so in radial
/// integrals `m = ∫u² r² dr`, `T = ∫u'² r² dr`:
///
/// * `l3 = C_HLS (4π)^{-1/3} (∫|u|³ r² dr)^{2/3}`
/// * `gradient = C_HLS C_GN √(T m)`
/// * `mass_energy = C_HLS C_GN m √(E/3 + ‖V‖∞/3 + 2‖rV'‖∞/3)`
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct UnstableBound {
    pub constants: BoundConstants,
    pub l3: f64,
    pub gradient: f64,
    pub mass_energy: f64,
}

impl UnstableBound {
    pub fn value(&self) -> f64 {
        self.mass_energy
    }
}

pub fn unstable_bound(
    state: &BoundState,
    potential: &PotentialSpec,
    norms: &PotentialNorms,
    constants: BoundConstants,
) -> UnstableBound {
    let mass = state.integrate(potential, |r, y| r * r * y[0] * y[0]);
    let kinetic = state.integrate(potential, |r, y| r * r * y[1] * y[1]);
    let cubic = state.integrate(potential, |r, y| r * r * y[0].abs().powi(3));
    let e = state.energy;
    let root = (e / 3.0 + norms.sup_abs / 3.0 + 2.0 * norms.sup_radial_derivative / 3.0).max(0.0).sqrt();
    let four_pi = 4.0 * std::f64::consts::PI;
    UnstableBound {
        constants,
        l3: constants.c_hls * four_pi.powf(-1.0 / 3.0) * cubic.powf(2.0 / 3.0),
        gradient: constants.c_hls * constants.c_gn * (kinetic * mass).sqrt(),
        mass_energy: constants.c_hls * constants.c_gn * mass * root,
    }
}
