use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;

use super::sum::{commutator, dim_f64, PauliSum};
use super::term::PauliString;
use crate::error::{Error, Result};

/// Relative residual below which a candidate is treated as already in the span.
pub const RANK_TOL: f64 = 1e-9;

/// Real span of anti-Hermitian operators, stored as a Hilbert-Schmidt
/// orthonormal basis.
///
/// The basis is kept alongside an inverted index from Pauli string to
/// `(basis position, coefficient)` so projecting a sparse operator only
/// touches the strings it actually contains.
#[derive(Clone, Debug)]
pub struct OperatorSpan {
    n_qubits: usize,
    basis: Vec<PauliSum>,
    index: HashMap<PauliString, Vec<(usize, Complex64)>>,
}

impl OperatorSpan {
    pub fn new(n_qubits: usize) -> Self {
        OperatorSpan {
            n_qubits,
            basis: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Orthonormalizes `ops` in order, skipping linearly dependent entries.
    pub fn from_operators(n_qubits: usize, ops: &[PauliSum]) -> Result<Self> {
        let mut span = OperatorSpan::new(n_qubits);
        for op in ops {
            span.try_insert(op)?;
        }
        Ok(span)
    }

    /// Wraps a basis the caller already knows to be orthonormal.
    pub(crate) fn from_orthonormal(n_qubits: usize, basis: Vec<PauliSum>) -> Self {
        let mut span = OperatorSpan::new(n_qubits);
        for b in basis {
            span.push(b);
        }
        span
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[PauliSum] {
        &self.basis
    }

    /// Real inner products `Re tr(B_j† op)` for every basis element.
    fn real_coords(&self, op: &PauliSum) -> Vec<f64> {
        let scale = dim_f64(self.n_qubits);
        let mut coords = vec![0.0; self.basis.len()];
        for (s, c) in op.terms() {
            if let Some(postings) = self.index.get(&s) {
                for &(j, b) in postings {
                    coords[j] += (b.conj() * c).re * scale;
                }
            }
        }
        coords
    }

    /// `op` minus its orthogonal projection onto the span (two Gram-Schmidt
    /// passes).
    pub fn residual(&self, op: &PauliSum) -> Result<PauliSum> {
        if op.n_qubits() != self.n_qubits {
            return Err(Error::dim(self.n_qubits, op.n_qubits()));
        }
        let mut r = op.clone();
        for _ in 0..2 {
            let coords = self.real_coords(&r);
            for (j, a) in coords.into_iter().enumerate() {
                if a != 0.0 {
                    r.axpy(Complex64::new(-a, 0.0), &self.basis[j]);
                }
            }
        }
        Ok(r)
    }

    /// Adds the normalized residual of `op` if it is not already in the span.
    /// Returns whether the dimension grew.
    pub fn try_insert(&mut self, op: &PauliSum) -> Result<bool> {
        let norm = op.hs_norm();
        if norm == 0.0 {
            return Ok(false);
        }
        let r = self.residual(op)?;
        let rn = r.hs_norm();
        if rn <= RANK_TOL * norm.max(1.0) {
            return Ok(false);
        }
        self.push(r.scale(Complex64::new(1.0 / rn, 0.0)));
        Ok(true)
    }

    fn push(&mut self, b: PauliSum) {
        let j = self.basis.len();
        for (s, c) in b.terms() {
            self.index.entry(s).or_default().push((j, c));
        }
        self.basis.push(b);
    }

    /// Whether `op` lies in the span up to [`RANK_TOL`].
    pub fn contains(&self, op: &PauliSum) -> Result<bool> {
        let r = self.residual(op)?;
        Ok(r.hs_norm() <= RANK_TOL * op.hs_norm().max(1.0))
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate().skip(i) {
                let g = a.hs_inner(b).map(|v| v.re).unwrap_or(f64::NAN);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }
}

/// Result of a Lie-closure computation.
#[derive(Clone, Debug)]
pub struct Closure {
    pub span: OperatorSpan,
    /// Longest chain of nested commutators needed to reach a basis element.
    pub iterations: usize,
    /// The dimension cap was hit before a fixed point was reached.
    pub capped: bool,
}

/// Orthonormal basis of `span <i·H_1, ..., i·H_k>_Lie` for Hermitian
/// generators `H_j`.
///
/// New elements are processed in insertion order and commuted against every
/// earlier element, so each pair is evaluated once.
pub fn lie_closure(generators: &[PauliSum], dim_cap: usize) -> Result<Closure> {
    let first = generators
        .first()
        .ok_or_else(|| Error::InvalidArgument("no generators".into()))?;
    let n = first.n_qubits();
    let i = Complex64::new(0.0, 1.0);

    let mut span = OperatorSpan::new(n);
    let mut depth = Vec::new();
    for g in generators {
        if g.n_qubits() != n {
            return Err(Error::dim(n, g.n_qubits()));
        }
        if span.try_insert(&g.scale(i))? {
            depth.push(0usize);
        }
    }
    if span.dim() == 0 {
        return Err(Error::EmptySpan);
    }

    let mut capped = span.dim() > dim_cap;
    let mut queue: VecDeque<usize> = (0..span.dim()).collect();
    'outer: while let Some(k) = queue.pop_front() {
        if capped {
            break;
        }
        for j in 0..k {
            let c = commutator(&span.basis[k], &span.basis[j])?;
            if c.is_zero() {
                continue;
            }
            if span.try_insert(&c)? {
                depth.push(depth[k].max(depth[j]) + 1);
                queue.push_back(span.dim() - 1);
                if span.dim() > dim_cap {
                    capped = true;
                    break 'outer;
                }
            }
        }
    }

    Ok(Closure {
        span,
        iterations: depth.into_iter().max().unwrap_or(0),
        capped,
    })
}
