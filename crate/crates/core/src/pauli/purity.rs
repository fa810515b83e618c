use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dla::{center_basis, ideal_bases};
use super::span::OperatorSpan;
use super::sum::PauliSum;
use super::term::Pauli;
use crate::error::{Error, Result};
use crate::sim::StateVector;

/// Operand of a Hilbert-Schmidt projection: an operator, or a pure state
/// standing in for its density matrix.
pub trait HsOperand {
    fn n_qubits(&self) -> usize;

    /// `tr(B† X)` for a basis operator `B` and this operand `X`.
    fn hs_against(&self, b: &PauliSum) -> Complex64;
}

impl HsOperand for PauliSum {
    fn n_qubits(&self) -> usize {
        PauliSum::n_qubits(self)
    }

    fn hs_against(&self, b: &PauliSum) -> Complex64 {
        b.hs_inner(self).expect("sizes checked by caller")
    }
}

/// `tr(B† |ψ⟩⟨ψ|) = ⟨ψ|B†|ψ⟩`, evaluated string by string on the amplitudes.
impl HsOperand for StateVector {
    fn n_qubits(&self) -> usize {
        StateVector::n_qubits(self)
    }

    fn hs_against(&self, b: &PauliSum) -> Complex64 {
        b.terms()
            .map(|(s, c)| c.conj() * s.expectation(self.amplitudes()))
            .sum()
    }
}

fn coords<T: HsOperand + ?Sized>(x: &T, span: &OperatorSpan) -> Result<Vec<Complex64>> {
    if x.n_qubits() != span.n_qubits() {
        return Err(Error::dim(span.n_qubits(), x.n_qubits()));
    }
    Ok(span.basis().iter().map(|b| x.hs_against(b)).collect())
}

/// `g`-purity `tr[(X_g)²]`: squared norm of the projection onto the span.
pub fn purity<T: HsOperand + ?Sized>(x: &T, span: &OperatorSpan) -> Result<f64> {
    Ok(coords(x, span)?.iter().map(|c| c.norm_sqr()).sum())
}

/// `tr[X_g Y_g]` for Hermitian `X`, `Y` projected onto an anti-Hermitian span.
pub fn projected_pairing<A, B>(x: &A, y: &B, span: &OperatorSpan) -> Result<f64>
where
    A: HsOperand + ?Sized,
    B: HsOperand + ?Sized,
{
    let cx = coords(x, span)?;
    let cy = coords(y, span)?;
    Ok(cx.iter().zip(&cy).map(|(a, b)| (a.conj() * b).re).sum())
}

/// `2^{n−1} / (4^{n_rad} − 1)`: loss variance per unit of semisimple purity for
/// a `Z` observable on a radial qubit.
pub fn variance_prefactor(n_rad: usize, n_orb: usize) -> f64 {
    let n = (n_rad + n_orb) as f64;
    (n - 1.0).exp2() / ((2.0 * n_rad as f64).exp2() - 1.0)
}

/// Closed-form mean and variance of `−tr[U ρ U† Z_y]` over the DLA group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Predicted loss moments for the state `rho` entering the trainable layers
/// and class `y` (1-based, measured as `Z` on radial qubit `y − 1`).
///
/// The mean pairs the centre projections of `ρ` and `−Z_y`. The variance sums
/// `P_j(ρ) P_j(O) / dim g_j` over the two simple ideals, each of dimension
/// `4^{n_rad} − 1`.
pub fn predicted_moments(
    rho: &StateVector,
    y: usize,
    n_rad: usize,
    n_orb: usize,
) -> Result<LossMoments> {
    if y == 0 || y > n_rad {
        return Err(Error::UnsupportedObservable(format!(
            "class {y} is not measured on a radial qubit (n_rad={n_rad})"
        )));
    }
    let n = n_rad + n_orb;
    if rho.n_qubits() != n {
        return Err(Error::dim(n, rho.n_qubits()));
    }
    let observable = PauliSum::single(n, y - 1, Pauli::Z)?.scale(Complex64::new(-1.0, 0.0));

    let mean = projected_pairing(rho, &observable, &center_basis(n_rad, n_orb)?)?;
    let (plus, minus) = ideal_bases(n_rad, n_orb)?;
    let mut variance = 0.0;
    for ideal in [&plus, &minus] {
        variance += purity(rho, ideal)? * purity(&observable, ideal)? / ideal.dim() as f64;
    }
    Ok(LossMoments { mean, variance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::semisimple_basis;

    #[test]
    fn z_purity_on_each_ideal() {
        for (r, o) in [(1, 1), (2, 1), (2, 3)] {
            let n = r + o;
            let (plus, minus) = ideal_bases(r, o).unwrap();
            for y in 0..r {
                let z = PauliSum::single(n, y, Pauli::Z).unwrap();
                for ideal in [&plus, &minus] {
                    let p = purity(&z, ideal).unwrap();
                    assert!((p - ((n - 1) as f64).exp2()).abs() < 1e-9, "{p}");
                }
            }
        }
    }

    #[test]
    fn maximally_mixed_has_zero_semisimple_purity() {
        let mixed = PauliSum::identity(3).scale(Complex64::new(0.125, 0.0));
        assert!(purity(&mixed, &semisimple_basis(1, 2).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn zero_state_purity_closed_form() {
        for (r, o) in [(1, 1), (2, 2), (3, 1)] {
            let n = r + o;
            let psi = StateVector::zero(n);
            let p = purity(&psi, &semisimple_basis(r, o).unwrap()).unwrap();
            let expected = ((1 << r) - 1) as f64 * (1.0 - n as f64).exp2();
            assert!((p - expected).abs() < 1e-12, "{p} vs {expected}");
        }
    }

    #[test]
    fn moments_of_zero_state() {
        let m = predicted_moments(&StateVector::zero(2), 1, 1, 1).unwrap();
        assert!(m.mean.abs() < 1e-15);
        // P_+(ρ) = 1/2, P_+(Z) = 2, dim = 3
        assert!((m.variance - 1.0 / 3.0).abs() < 1e-12);
        let closed = variance_prefactor(1, 1) * 0.5;
        assert!((m.variance - closed).abs() < 1e-12);
    }

    #[test]
    fn orbital_observable_is_rejected() {
        assert!(matches!(
            predicted_moments(&StateVector::zero(3), 2, 1, 2),
            Err(Error::UnsupportedObservable(_))
        ));
    }
}
