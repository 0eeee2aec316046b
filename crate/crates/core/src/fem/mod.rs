//! Piecewise-linear finite elements on a radial mesh with weight `r²`.

mod mesh;
mod operators;
mod stationary;

pub use mesh::{MeshKind, RadialMesh};
pub use operators::{
    assemble, count_zero_crossings, weighted_overlap, with_boundary_zero, AssembledOperators, GAUSS3,
};
pub use stationary::{solve_stationary, DiscreteState, Nonlinearity};
