//! Low-depth Hadamard-test circuits, a state-vector and density-matrix
//! simulator, device transpilation and a variational solver for the 1D
//! viscous Burgers' equation.

pub mod ansatz;
pub mod burgers;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod hadamard;
pub mod lowdepth;
pub mod matrix;
pub mod noise;
pub mod rng;
pub mod sgeo;
pub mod sim;
pub mod transpile;

pub use error::{Error, Result};
