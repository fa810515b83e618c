//! Dense statevector simulation.
//!
//! Rotations follow `R_P(θ) = exp(−iθP/2)`, which makes the two-term
//! parameter-shift rule exact.

mod circuit;
mod state;

pub use circuit::{
    adjoint_grad, apply_gate, finite_diff_grad, parameter_shift_component, parameter_shift_grad, run, Circuit,
    Gate, GateKind,
};
pub use state::{StateVector, IMAG_TOL};
