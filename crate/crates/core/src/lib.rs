//! Simulation and trainability analysis for rotationally equivariant quantum
//! classifiers built on a polygon-sampled amplitude encoding and a
//! Fourier-transformed orbital register.

pub mod analysis;
pub mod cli;
pub mod data;
pub mod encoding;
pub mod error;
pub mod model;
pub mod pauli;
pub mod sim;
pub mod trainer;

pub use error::{Error, Result};
