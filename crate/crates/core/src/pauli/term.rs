use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the 64-bit symplectic masks can hold.
pub const MAX_QUBITS: usize = 63;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Phase-free Hermitian Pauli string in symplectic form.
///
/// Qubit `q` (the `q`-th character of the printed string, counting from 0)
/// lives at mask bit `n - 1 - q`, so the masks line up with computational
/// basis indices whose most significant bit is qubit 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Self {
        let bit = 1u64 << (n_qubits - 1 - qubit);
        let (x, z) = p.bits();
        PauliString {
            x: if x { bit } else { 0 },
            z: if z { bit } else { 0 },
        }
    }

    pub fn is_identity(self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn commutes_with(self, other: PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2)
    }

    pub fn letter(self, n_qubits: usize, qubit: usize) -> Pauli {
        let bit = 1u64 << (n_qubits - 1 - qubit);
        Pauli::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    /// Number of Y factors, i.e. the exponent of `i` in `P = i^{|x&z|} X^x Z^z`.
    fn y_count(self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Product `self * other` as `(i^k, string)`.
    pub fn mul(self, other: PauliString) -> (u32, PauliString) {
        let out = PauliString {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        let k = self.y_count() + other.y_count() + 2 * (self.z & other.x).count_ones()
            + 4 * 64
            - out.y_count();
        (k % 4, out)
    }

    /// `P|b> = phase * |b ^ x>`; returns the phase as a power of `i`.
    #[inline]
    pub fn basis_phase(self, b: u64) -> u32 {
        (self.y_count() + 2 * (self.z & b).count_ones()) % 4
    }

    /// `<psi|P|psi>` on a dense amplitude vector.
    pub fn expectation(self, amps: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let y = self.y_count();
        for (b, &a) in amps.iter().enumerate() {
            let b = b as u64;
            let k = (y + 2 * (self.z & b).count_ones()) % 4;
            acc += amps[(b ^ self.x) as usize].conj() * i_pow(k) * a;
        }
        acc
    }

    pub fn to_string_n(self, n_qubits: usize) -> String {
        (0..n_qubits).map(|q| self.letter(n_qubits, q).letter()).collect()
    }

    pub fn parse(s: &str) -> Result<(usize, PauliString)> {
        let n = s.chars().count();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "pauli string length {n} outside 1..={MAX_QUBITS}"
            )));
        }
        let mut out = PauliString::IDENTITY;
        for (q, c) in s.chars().enumerate() {
            let p = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "invalid pauli letter {other:?}"
                    )))
                }
            };
            let s = PauliString::single(n, q, p);
            out.x |= s.x;
            out.z |= s.z;
        }
        Ok((n, out))
    }
}

#[inline]
pub(crate) fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Pauli string with a complex coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    n_qubits: usize,
    string: PauliString,
    coeff: Complex64,
}

impl PauliTerm {
    pub fn new(n_qubits: usize, string: PauliString, coeff: Complex64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let mask = if n_qubits == 64 { u64::MAX } else { (1u64 << n_qubits) - 1 };
        if (string.x | string.z) & !mask != 0 {
            return Err(Error::InvalidArgument(
                "pauli string has support outside the register".into(),
            ));
        }
        Ok(PauliTerm {
            n_qubits,
            string,
            coeff,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliTerm {
            n_qubits,
            string: PauliString::IDENTITY,
            coeff: Complex64::new(1.0, 0.0),
        }
    }

    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(Error::IndexOutOfRange {
                index: qubit,
                limit: n_qubits,
            });
        }
        PauliTerm::new(
            n_qubits,
            PauliString::single(n_qubits, qubit, p),
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn string(&self) -> PauliString {
        self.string
    }

    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    pub fn with_coeff(mut self, coeff: Complex64) -> Self {
        self.coeff = coeff;
        self
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n_qubits)
            .map(|q| self.string.letter(self.n_qubits, q))
            .collect()
    }
}

/// Product of two Pauli terms with exact phase tracking.
pub fn pauli_multiply(a: &PauliTerm, b: &PauliTerm) -> Result<PauliTerm> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::dim(a.n_qubits, b.n_qubits));
    }
    let (k, string) = a.string.mul(b.string);
    Ok(PauliTerm {
        n_qubits: a.n_qubits,
        string,
        coeff: a.coeff * b.coeff * i_pow(k),
    })
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}*{}",
            super::text::format_coeff(self.coeff),
            self.string.to_string_n(self.n_qubits)
        )
    }
}

impl FromStr for PauliTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (coeff, string) = match s.split_once('*') {
            Some((c, p)) => (super::text::parse_coeff(c)?, p),
            None => (Complex64::new(1.0, 0.0), s),
        };
        let (n, string) = PauliString::parse(string.trim())?;
        PauliTerm::new(n, string, coeff)
    }
}
