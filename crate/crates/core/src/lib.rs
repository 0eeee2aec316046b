pub mod bound_states;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod fem;
pub mod linalg;
pub mod linear;
pub mod pipeline;
pub mod potential;
pub mod stability;

pub use error::{Error, Result};
