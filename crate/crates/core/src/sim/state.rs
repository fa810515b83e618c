use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{i_pow, PauliSum};

/// Imaginary residue tolerated in an expectation value before it is dropped.
pub const IMAG_TOL: f64 = 1e-10;

/// Dense amplitude vector over `2^n` computational basis states.
///
/// Qubit 0 is the most significant bit of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        StateVector::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    /// Uniform superposition `|+…+⟩`.
    pub fn uniform(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        StateVector {
            n_qubits,
            amps: vec![a; dim],
        }
    }

    /// Wraps raw amplitudes; the length must be a power of two. No
    /// normalization is applied, so linear combinations can be represented.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        Ok(StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        StateVector::from_amplitudes(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Encoding("cannot normalize a zero vector".into()));
        }
        self.amps.iter_mut().for_each(|a| *a /= n);
        Ok(self)
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::IndexOutOfRange {
                index: q,
                limit: self.n_qubits,
            });
        }
        Ok(())
    }

    #[inline]
    fn stride(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    /// Applies a 2×2 matrix `[[m00, m01], [m10, m11]]` to qubit `q`.
    pub fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        self.check_qubit(q)?;
        let stride = self.stride(q);
        for block in (0..self.amps.len()).step_by(2 * stride) {
            for i in block..block + stride {
                let a0 = self.amps[i];
                let a1 = self.amps[i + stride];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i + stride] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    /// `RZ(θ) = diag(e^{−iθ/2}, e^{iθ/2})`.
    pub fn apply_rz(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        let stride = self.stride(q);
        let lo = Complex64::from_polar(1.0, -theta / 2.0);
        let hi = lo.conj();
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & stride == 0 { lo } else { hi };
        }
        Ok(())
    }

    /// `RY(θ) = exp(−iθY/2)`.
    pub fn apply_ry(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        let (s, c) = (theta / 2.0).sin_cos();
        let stride = self.stride(q);
        for block in (0..self.amps.len()).step_by(2 * stride) {
            for i in block..block + stride {
                let a0 = self.amps[i];
                let a1 = self.amps[i + stride];
                self.amps[i] = a0 * c - a1 * s;
                self.amps[i + stride] = a0 * s + a1 * c;
            }
        }
        Ok(())
    }

    /// `RX(θ) = exp(−iθX/2)`.
    pub fn apply_rx(&mut self, q: usize, theta: f64) -> Result<()> {
        let (s, c) = (theta / 2.0).sin_cos();
        let c = Complex64::new(c, 0.0);
        let mis = Complex64::new(0.0, -s);
        self.apply_single(q, [[c, mis], [mis, c]])
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::InvalidArgument("CZ needs two distinct qubits".into()));
        }
        let mask = self.stride(a) | self.stride(b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// Discrete Fourier transform on qubits `first..first + count`, read
    /// MSB-first as a sub-register index `k`. The forward transform has
    /// entries `ω^{jk}/√m`, `ω = e^{2πi/m}`, `m = 2^count`; `inverse` applies
    /// its adjoint.
    pub fn apply_qft(&mut self, first: usize, count: usize, inverse: bool) -> Result<()> {
        if count == 0 || first + count > self.n_qubits {
            return Err(Error::InvalidArgument(format!(
                "QFT range {first}..{} outside {} qubits",
                first + count,
                self.n_qubits
            )));
        }
        let m = 1usize << count;
        let shift = self.n_qubits - first - count;
        let sign = if inverse { -1.0 } else { 1.0 };
        let scale = 1.0 / (m as f64).sqrt();
        let twiddle: Vec<Complex64> = (0..m)
            .map(|t| Complex64::from_polar(scale, sign * 2.0 * PI * t as f64 / m as f64))
            .collect();
        let sub_mask = (m - 1) << shift;
        let mut fiber = vec![Complex64::new(0.0, 0.0); m];
        for base in 0..self.amps.len() {
            if base & sub_mask != 0 {
                continue;
            }
            for (k, f) in fiber.iter_mut().enumerate() {
                *f = self.amps[base | (k << shift)];
            }
            for j in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, f) in fiber.iter().enumerate() {
                    acc += twiddle[(j * k) % m] * f;
                }
                self.amps[base | (j << shift)] = acc;
            }
        }
        Ok(())
    }

    /// Applies a dense `2^k × 2^k` row-major unitary to `targets`, the first
    /// target being the most significant bit of the local index.
    pub fn apply_dense(&mut self, targets: &[usize], matrix: &[Complex64]) -> Result<()> {
        let k = targets.len();
        let m = 1usize << k;
        if matrix.len() != m * m {
            return Err(Error::dim(m * m, matrix.len()));
        }
        for (i, &t) in targets.iter().enumerate() {
            self.check_qubit(t)?;
            if targets[..i].contains(&t) {
                return Err(Error::InvalidArgument("repeated target".into()));
            }
        }
        let strides: Vec<usize> = targets.iter().map(|&t| self.stride(t)).collect();
        let all: usize = strides.iter().sum();
        let offset = |local: usize| -> usize {
            strides
                .iter()
                .enumerate()
                .filter(|(i, _)| local >> (k - 1 - i) & 1 == 1)
                .map(|(_, s)| s)
                .sum()
        };
        let offsets: Vec<usize> = (0..m).map(offset).collect();
        let mut fiber = vec![Complex64::new(0.0, 0.0); m];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (l, f) in fiber.iter_mut().enumerate() {
                *f = self.amps[base + offsets[l]];
            }
            for r in 0..m {
                let row = &matrix[r * m..(r + 1) * m];
                self.amps[base + offsets[r]] = row.iter().zip(&fiber).map(|(a, b)| a * b).sum();
            }
        }
        Ok(())
    }

    /// `⟨ψ|O|ψ⟩` for a Hermitian Pauli sum.
    pub fn expectation(&self, observable: &PauliSum) -> Result<f64> {
        if observable.n_qubits() != self.n_qubits {
            return Err(Error::dim(self.n_qubits, observable.n_qubits()));
        }
        let im = observable.max_imag();
        if im > IMAG_TOL {
            return Err(Error::NonHermitian(im));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, c) in observable.terms() {
            // diagonal strings only need the probabilities
            if s.x == 0 {
                let mut e = 0.0;
                for (b, a) in self.amps.iter().enumerate() {
                    let sign = if (s.z & b as u64).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                    e += sign * a.norm_sqr();
                }
                acc += c * e;
            } else {
                acc += c * s.expectation(&self.amps);
            }
        }
        Ok(acc.re)
    }

    /// `O|ψ⟩` (not normalized).
    pub fn apply_operator(&self, op: &PauliSum) -> Result<StateVector> {
        if op.n_qubits() != self.n_qubits {
            return Err(Error::dim(self.n_qubits, op.n_qubits()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (s, c) in op.terms() {
            for (b, &a) in self.amps.iter().enumerate() {
                let k = s.basis_phase(b as u64);
                out[b ^ s.x as usize] += c * i_pow(k) * a;
            }
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }

    /// `⟨Z_q⟩`.
    pub fn z_expectation(&self, q: usize) -> Result<f64> {
        self.check_qubit(q)?;
        let stride = self.stride(q);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & stride == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rz_zero_is_identity() {
        let mut s = StateVector::uniform(2);
        s.apply_rz(1, 0.0).unwrap();
        assert_eq!(s, StateVector::uniform(2));
    }

    #[test]
    fn cz_flips_only_11() {
        let mut s = StateVector::basis(2, 3);
        s.apply_cz(0, 1).unwrap();
        assert_eq!(s.amplitudes()[3], c(-1.0, 0.0));
        let mut t = StateVector::basis(2, 2);
        t.apply_cz(0, 1).unwrap();
        assert_eq!(t.amplitudes()[2], c(1.0, 0.0));
    }

    #[test]
    fn rx_pi_on_zero() {
        let mut s = StateVector::zero(1);
        s.apply_rx(0, PI).unwrap();
        assert!((s.amplitudes()[0]).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn one_qubit_qft_is_hadamard() {
        let mut s = StateVector::basis(1, 1);
        s.apply_qft(0, 1, false).unwrap();
        assert!((s.amplitudes()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn qft_round_trip() {
        let amps: Vec<Complex64> = (0..16).map(|i| c(i as f64, (i * i) as f64 * 0.1)).collect();
        let orig = StateVector::from_amplitudes(amps).unwrap();
        let mut s = orig.clone();
        s.apply_qft(1, 3, false).unwrap();
        s.apply_qft(1, 3, true).unwrap();
        for (a, b) in s.amplitudes().iter().zip(orig.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(s.apply_qft(2, 3, false).is_err());
    }

    #[test]
    fn z_expectations() {
        let s = StateVector::zero(3);
        let z0 = PauliSum::parse("1*ZII").unwrap();
        assert_eq!(s.expectation(&z0).unwrap(), 1.0);
        let plus = StateVector::uniform(1);
        assert!(plus.expectation(&PauliSum::parse("1*Z").unwrap()).unwrap().abs() < 1e-15);
        assert!((plus.expectation(&PauliSum::parse("1*X").unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(StateVector::basis(2, 2).z_expectation(0).unwrap(), -1.0);
    }

    #[test]
    fn non_hermitian_rejected() {
        let s = StateVector::zero(1);
        assert!(matches!(
            s.expectation(&PauliSum::parse("1i*Z").unwrap()),
            Err(Error::NonHermitian(_))
        ));
    }

    #[test]
    fn dense_matches_builtin_cz() {
        let mut cz = vec![c(0.0, 0.0); 16];
        for i in 0..4 {
            cz[i * 4 + i] = c(if i == 3 { -1.0 } else { 1.0 }, 0.0);
        }
        let amps: Vec<Complex64> = (0..8).map(|i| c(1.0 + i as f64, -(i as f64))).collect();
        let mut a = StateVector::from_amplitudes(amps).unwrap();
        let mut b = a.clone();
        a.apply_dense(&[2, 0], &cz).unwrap();
        b.apply_cz(0, 2).unwrap();
        assert_eq!(a, b);
    }
}
