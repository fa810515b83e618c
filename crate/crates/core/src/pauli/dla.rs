//! Generators, Lie closure and reductive decomposition of the equivariant
//! ansatz on `n_rad` radial and `n_orb` orbital qubits.
//!
//! Qubit indices are 0-based: radial qubits are `0..n_rad`, orbital qubits
//! `n_rad..n_rad + n_orb`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::span::{lie_closure, OperatorSpan};
use super::sum::PauliSum;
use super::term::{Pauli, PauliString};
use crate::error::{Error, Result};

/// Closure verification is limited to this many radial qubits unless a cap is
/// given explicitly (dimension at most 130).
pub const MAX_VERIFY_NRAD: usize = 3;

/// `dim g = 2·4^{n_rad} + n_orb − 1`.
pub fn dla_dimension_formula(n_rad: usize, n_orb: usize) -> usize {
    2 * 4usize.pow(n_rad as u32) + n_orb - 1
}

fn check_registers(n_rad: usize, n_orb: usize) -> Result<usize> {
    if n_rad == 0 || n_orb == 0 {
        return Err(Error::InvalidArgument(format!(
            "registers must be nonempty (n_rad={n_rad}, n_orb={n_orb})"
        )));
    }
    let n = n_rad + n_orb;
    if n > super::term::MAX_QUBITS {
        return Err(Error::InvalidArgument(format!("{n} qubits is too many")));
    }
    Ok(n)
}

/// Hermitian generator `cz` with `exp(-i·cz) = CZ` on qubits `(first, first + 1)`:
/// `-(π/4)(I − Z_a − Z_b + Z_a Z_b)`.
pub fn cz_generator(first: usize, n_qubits: usize) -> Result<PauliSum> {
    if first + 1 >= n_qubits {
        return Err(Error::IndexOutOfRange {
            index: first,
            limit: n_qubits.saturating_sub(1),
        });
    }
    let za = PauliString::single(n_qubits, first, Pauli::Z);
    let zb = PauliString::single(n_qubits, first + 1, Pauli::Z);
    let zz = PauliString {
        x: 0,
        z: za.z | zb.z,
    };
    let c = Complex64::new(-FRAC_PI_4, 0.0);
    let mut s = PauliSum::zero(n_qubits);
    s.add_term(PauliString::IDENTITY, c);
    s.add_term(za, -c);
    s.add_term(zb, -c);
    s.add_term(zz, c);
    Ok(s)
}

/// `X_q, Y_q, Z_q` for every radial qubit followed by the CZ generators of
/// every nearest-neighbour pair `(i, i+1)`, `0 ≤ i < n − 1`.
pub fn equivariant_generators(n_rad: usize, n_orb: usize) -> Result<Vec<PauliSum>> {
    let n = check_registers(n_rad, n_orb)?;
    let mut gens = Vec::with_capacity(3 * n_rad + n - 1);
    for q in 0..n_rad {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            gens.push(PauliSum::single(n, q, p)?);
        }
    }
    for i in 0..n - 1 {
        gens.push(cz_generator(i, n)?);
    }
    Ok(gens)
}

/// [`equivariant_generators`] plus the identity.
///
/// Circuit generators are only defined up to multiples of the identity (a
/// global phase). Adjoining it makes the closure contain `I^{⊗n}` for every
/// register size; for `n_rad ≥ 2` it is already generated by the radial CZ
/// terms.
pub fn dla_generators(n_rad: usize, n_orb: usize) -> Result<Vec<PauliSum>> {
    let mut gens = equivariant_generators(n_rad, n_orb)?;
    gens.push(PauliSum::identity(n_rad + n_orb));
    Ok(gens)
}

/// Outcome of checking the closure dimension against `2·4^{n_rad} + n_orb − 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DlaReport {
    pub n_rad: usize,
    pub n_orb: usize,
    pub computed_dim: usize,
    pub formula_dim: usize,
    pub iterations: usize,
    pub matched: bool,
}

pub fn verify_dla(n_rad: usize, n_orb: usize) -> Result<DlaReport> {
    if n_rad > MAX_VERIFY_NRAD {
        return Err(Error::InvalidArgument(format!(
            "closure with n_rad={n_rad} exceeds the default limit {MAX_VERIFY_NRAD}; \
             use verify_dla_with_cap"
        )));
    }
    let n = check_registers(n_rad, n_orb)?;
    verify_dla_with_cap(n_rad, n_orb, 4usize.pow(n as u32))
}

pub fn verify_dla_with_cap(n_rad: usize, n_orb: usize, dim_cap: usize) -> Result<DlaReport> {
    let gens = dla_generators(n_rad, n_orb)?;
    let closure = lie_closure(&gens, dim_cap)?;
    if closure.capped {
        return Err(Error::InvalidArgument(format!(
            "closure exceeded dim_cap={dim_cap}"
        )));
    }
    let formula_dim = dla_dimension_formula(n_rad, n_orb);
    let computed_dim = closure.span.dim();
    Ok(DlaReport {
        n_rad,
        n_orb,
        computed_dim,
        formula_dim,
        iterations: closure.iterations,
        matched: computed_dim == formula_dim,
    })
}

/// Non-identity Pauli strings on the radial register, lexicographic in `IXYZ`.
fn radial_strings(n_rad: usize, n: usize) -> impl Iterator<Item = PauliString> {
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    (1..4usize.pow(n_rad as u32)).map(move |mut code| {
        let mut s = PauliString::IDENTITY;
        for q in (0..n_rad).rev() {
            let p = PauliString::single(n, q, letters[code % 4]);
            s.x |= p.x;
            s.z |= p.z;
            code /= 4;
        }
        s
    })
}

/// Orthonormal bases of the two simple ideals `g_+` and `g_−`:
/// `i·2^{−n/2} P ⊗ (I ± Z)/√2 ⊗ I^{⊗(n_orb−1)}` for every non-identity
/// radial string `P`.
pub fn ideal_bases(n_rad: usize, n_orb: usize) -> Result<(OperatorSpan, OperatorSpan)> {
    let n = check_registers(n_rad, n_orb)?;
    let z_first = PauliString::single(n, n_rad, Pauli::Z);
    let c = (-(n as f64) / 2.0).exp2() * FRAC_1_SQRT_2;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for p in radial_strings(n_rad, n) {
        let pz = PauliString {
            x: p.x,
            z: p.z | z_first.z,
        };
        for (sign, out) in [(1.0, &mut plus), (-1.0, &mut minus)] {
            let mut b = PauliSum::zero(n);
            b.add_term(p, Complex64::new(0.0, c));
            b.add_term(pz, Complex64::new(0.0, sign * c));
            out.push(b);
        }
    }
    Ok((
        OperatorSpan::from_orthonormal(n, plus),
        OperatorSpan::from_orthonormal(n, minus),
    ))
}

/// Basis of the semisimple part `g_+ ⊕ g_−`, with `2·(4^{n_rad} − 1)` elements.
pub fn semisimple_basis(n_rad: usize, n_orb: usize) -> Result<OperatorSpan> {
    let (plus, minus) = ideal_bases(n_rad, n_orb)?;
    let n = plus.n_qubits();
    let all = plus
        .basis()
        .iter()
        .chain(minus.basis())
        .cloned()
        .collect();
    Ok(OperatorSpan::from_orthonormal(n, all))
}

/// Orthonormalized centre: `I`, `Z` on the first orbital qubit, and the
/// `n_orb − 1` CZ generators inside the orbital register.
pub fn center_basis(n_rad: usize, n_orb: usize) -> Result<OperatorSpan> {
    let n = check_registers(n_rad, n_orb)?;
    let i = Complex64::new(0.0, 1.0);
    let mut ops = vec![
        PauliSum::identity(n).scale(i),
        PauliSum::single(n, n_rad, Pauli::Z)?.scale(i),
    ];
    for a in n_rad..n - 1 {
        ops.push(cz_generator(a, n)?.scale(i));
    }
    OperatorSpan::from_operators(n, &ops)
}
