//! Nonlinear bound states `-Δu + Vu - γ w u = -E u`, `-Δw = u²`, by
//! collocation of the first-order radial system, γ-homotopy from linear
//! eigenstates and warm-started sweeps in `E`.

mod analysis;
mod branch;
mod collocation;
mod ode;
mod state;

pub use analysis::{
    d_second_sign, farfield_extend, least_squares_slope, rescale_check, rescale_profile,
    unscale_profile, DSecondReport, ExtendedProfile, RescaleReport, SlopeCheck,
};
pub use branch::{
    gamma_continuation, solve_at_energy, sweep_energy, trace_branch, BranchCurve, BranchSample,
    GammaPath, GammaStep, StopReason, SweepOutcome, TraceOptions, GRID_RATIO,
};
pub use collocation::{BvpSolver, NewtonOptions};
pub use ode::{boundary_residuals, first_order_rhs, robin_coefficient, Constraint, STATE_DIM};
pub use state::BoundState;
