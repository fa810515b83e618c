use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::term::{i_pow, Pauli, PauliString, PauliTerm, MAX_QUBITS};
use crate::error::{Error, Result};

/// Coefficients smaller than this are dropped from every [`PauliSum`].
pub const PRUNE_TOL: f64 = 1e-12;

/// Linear combination of Pauli strings on a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        assert!(
            (1..=MAX_QUBITS).contains(&n_qubits),
            "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
        );
        PauliSum {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliSum::from_string(n_qubits, PauliString::IDENTITY, Complex64::new(1.0, 0.0))
    }

    pub fn from_string(n_qubits: usize, string: PauliString, coeff: Complex64) -> Self {
        let mut s = PauliSum::zero(n_qubits);
        s.add_term(string, coeff);
        s
    }

    /// Single-qubit Pauli `p` on `qubit` (0-based).
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self> {
        let t = PauliTerm::single(n_qubits, qubit, p)?;
        Ok(PauliSum::from_string(n_qubits, t.string(), t.coeff()))
    }

    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        let mut s = PauliSum::zero(n_qubits);
        for t in terms {
            if t.n_qubits() != n_qubits {
                return Err(Error::dim(n_qubits, t.n_qubits()));
            }
            s.add_term(t.string(), t.coeff());
        }
        Ok(s)
    }

    /// Parses `coeff*STRING` tokens, see [`super::text`].
    pub fn parse(text: &str) -> Result<Self> {
        super::text::parse_operator(text)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (PauliString, Complex64)> + '_ {
        self.terms.iter().map(|(s, c)| (*s, *c))
    }

    pub fn coeff(&self, s: PauliString) -> Complex64 {
        self.terms.get(&s).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, s: PauliString, c: Complex64) {
        let entry = self.terms.entry(s).or_default();
        *entry += c;
        if entry.norm() < PRUNE_TOL {
            self.terms.remove(&s);
        }
    }

    fn check(&self, other: &PauliSum) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::dim(self.n_qubits, other.n_qubits));
        }
        Ok(())
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check(other)?;
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), other);
        Ok(out)
    }

    pub fn sub(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check(other)?;
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other);
        Ok(out)
    }

    /// `self += alpha * other`; panics on a size mismatch.
    pub fn axpy(&mut self, alpha: Complex64, other: &PauliSum) {
        assert_eq!(self.n_qubits, other.n_qubits);
        for (s, c) in other.terms() {
            self.add_term(s, alpha * c);
        }
    }

    pub fn scale(&self, alpha: Complex64) -> PauliSum {
        let mut out = PauliSum::zero(self.n_qubits);
        for (s, c) in self.terms() {
            out.add_term(s, alpha * c);
        }
        out
    }

    pub fn dagger(&self) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(s, c)| (*s, c.conj())).collect(),
        }
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check(other)?;
        let mut out = PauliSum::zero(self.n_qubits);
        for (sa, ca) in self.terms() {
            for (sb, cb) in other.terms() {
                let (k, s) = sa.mul(sb);
                out.add_term(s, ca * cb * i_pow(k));
            }
        }
        Ok(out)
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    /// Hilbert-Schmidt inner product `tr(self† other)`.
    pub fn hs_inner(&self, other: &PauliSum) -> Result<Complex64> {
        self.check(other)?;
        let (small, large, swap) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, c) in small.terms() {
            if let Some(d) = large.terms.get(&s) {
                acc += if swap { d.conj() * c } else { c.conj() * d };
            }
        }
        Ok(acc * dim_f64(self.n_qubits))
    }

    /// Hilbert-Schmidt norm `sqrt(tr(A† A))`.
    pub fn hs_norm(&self) -> f64 {
        let sq: f64 = self.terms.values().map(|c| c.norm_sqr()).sum();
        (sq * dim_f64(self.n_qubits)).sqrt()
    }

    /// Trace of the operator.
    pub fn trace(&self) -> Complex64 {
        self.coeff(PauliString::IDENTITY) * dim_f64(self.n_qubits)
    }
}

/// `2^n` as a float.
pub(crate) fn dim_f64(n_qubits: usize) -> f64 {
    (n_qubits as f64).exp2()
}

/// `ab - ba`, pruned of vanishing terms.
///
/// Only anticommuting string pairs contribute, each as `2 a_i b_j P_i P_j`.
pub fn commutator(a: &PauliSum, b: &PauliSum) -> Result<PauliSum> {
    a.check(b)?;
    let mut out = PauliSum::zero(a.n_qubits);
    for (sa, ca) in a.terms() {
        for (sb, cb) in b.terms() {
            if sa.commutes_with(sb) {
                continue;
            }
            let (k, s) = sa.mul(sb);
            out.add_term(s, 2.0 * ca * cb * i_pow(k));
        }
    }
    Ok(out)
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::text::format_operator(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(s: &str) -> PauliSum {
        PauliSum::parse(s).unwrap()
    }

    #[test]
    fn commutator_of_x_with_cz_block() {
        // [X_1, I - Z_1 - Z_2 + Z_1 Z_2] = 2i (Y_1 - Y_1 Z_2)
        let c = commutator(&op("1*XI"), &op("1*II -1*ZI -1*IZ 1*ZZ")).unwrap();
        let expected = op("2i*YI -2i*YZ");
        let diff = c.sub(&expected).unwrap();
        assert!(diff.is_zero(), "{c}");
    }

    #[test]
    fn commuting_diagonals_vanish() {
        let c = commutator(&op("1*ZI"), &op("1*ZZ")).unwrap();
        assert!(c.is_zero());
    }

    #[test]
    fn pruning_drops_cancelled_terms() {
        let mut s = op("1*XX 1*ZZ");
        s.add_term(op("1*XX").terms().next().unwrap().0, Complex64::new(-1.0, 1e-14));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn hs_inner_counts_dimension() {
        let a = op("1*XZ");
        assert!((a.hs_inner(&a).unwrap().re - 4.0).abs() < 1e-15);
        assert!((a.hs_norm() - 2.0).abs() < 1e-15);
        assert_eq!(a.hs_inner(&op("1*ZX")).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn products_and_trace() {
        let xz = op("1*XZ");
        let sq = xz.mul(&xz).unwrap();
        assert_eq!(sq, PauliSum::identity(2));
        assert_eq!(sq.trace(), Complex64::new(4.0, 0.0));
    }

    #[test]
    fn mismatched_sizes() {
        assert!(commutator(&op("1*X"), &op("1*XX")).is_err());
        assert!(op("1*X").add(&op("1*XX")).is_err());
    }
}
