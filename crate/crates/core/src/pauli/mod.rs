//! Pauli-string algebra, Lie closures and the reductive decomposition of the
//! equivariant ansatz.

mod dla;
mod purity;
mod span;
mod sum;
mod term;
pub mod text;

pub use dla::{
    center_basis, cz_generator, dla_dimension_formula, dla_generators, equivariant_generators,
    ideal_bases, semisimple_basis, verify_dla, verify_dla_with_cap, DlaReport, MAX_VERIFY_NRAD,
};
pub use purity::{
    predicted_moments, projected_pairing, purity, variance_prefactor, HsOperand, LossMoments,
};
pub use span::{lie_closure, Closure, OperatorSpan, RANK_TOL};
pub use sum::{commutator, PauliSum, PRUNE_TOL};
pub(crate) use term::i_pow;
pub use term::{pauli_multiply, Pauli, PauliString, PauliTerm, MAX_QUBITS};
