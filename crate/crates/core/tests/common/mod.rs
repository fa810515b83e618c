//! Dense-matrix reference implementations shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotiq::pauli::PauliSum;
use rotiq::pauli::PauliString;
use rotiq::sim::{Circuit, Gate, GateKind, StateVector};

/// Square complex matrix, row-major.
#[derive(Clone, Debug)]
pub struct Mat {
    pub dim: usize,
    pub data: Vec<C>,
}

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

impl Mat {
    pub fn zeros(dim: usize) -> Mat {
        Mat {
            dim,
            data: vec![c(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Mat {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = c(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[C]]) -> Mat {
        let dim = rows.len();
        Mat {
            dim,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    pub fn at(&self, r: usize, col: usize) -> C {
        self.data[r * self.dim + col]
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let n = self.dim;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * o.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Mat) -> Mat {
        Mat {
            dim: self.dim,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        Mat {
            dim: self.dim,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: C) -> Mat {
        Mat {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn dagger(&self) -> Mat {
        let n = self.dim;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn kron(&self, o: &Mat) -> Mat {
        let (a, b) = (self.dim, o.dim);
        let mut out = Mat::zeros(a * b);
        for i in 0..a {
            for j in 0..a {
                for k in 0..b {
                    for l in 0..b {
                        out.data[(i * b + k) * a * b + j * b + l] = self.at(i, j) * o.at(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn frob(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn dist(&self, o: &Mat) -> f64 {
        self.sub(o).frob()
    }

    pub fn apply(&self, v: &[C]) -> Vec<C> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect()
    }

    pub fn commutator(&self, o: &Mat) -> Mat {
        self.mul(o).sub(&o.mul(self))
    }
}

pub fn pauli_1q(letter: char) -> Mat {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match letter {
        'I' => Mat::from_rows(&[&[o, z], &[z, o]]),
        'X' => Mat::from_rows(&[&[z, o], &[o, z]]),
        'Y' => Mat::from_rows(&[&[z, -i], &[i, z]]),
        'Z' => Mat::from_rows(&[&[o, z], &[z, -o]]),
        _ => panic!("bad letter {letter}"),
    }
}

/// Kronecker product with the first letter as the most significant factor.
pub fn pauli_string_matrix(letters: &str) -> Mat {
    letters
        .chars()
        .map(pauli_1q)
        .reduce(|a, b| a.kron(&b))
        .expect("nonempty string")
}

pub fn sum_matrix(op: &PauliSum) -> Mat {
    let n = op.n_qubits();
    let mut m = Mat::zeros(1 << n);
    for (s, coef) in op.terms() {
        m = m.add(&pauli_string_matrix(&s.to_string_n(n)).scale(coef));
    }
    m
}

/// `exp(−iθP/2) = cos(θ/2)·I − i·sin(θ/2)·P` for a Pauli matrix `P`.
pub fn rotation(p: &Mat, theta: f64) -> Mat {
    let (s, co) = (theta / 2.0).sin_cos();
    Mat::identity(p.dim).scale(c(co, 0.0)).add(&p.scale(c(0.0, -s)))
}

pub fn dft(m: usize, inverse: bool) -> Mat {
    let sign = if inverse { -1.0 } else { 1.0 };
    let mut out = Mat::zeros(m);
    for j in 0..m {
        for k in 0..m {
            let ang = sign * std::f64::consts::TAU * (j * k) as f64 / m as f64;
            out.data[j * m + k] = C::from_polar(1.0 / (m as f64).sqrt(), ang);
        }
    }
    out
}

/// Lifts a matrix on `targets` (first target = most significant) to `n`
/// qubits, qubit 0 being the most significant bit of the basis index.
pub fn embed(u: &Mat, targets: &[usize], n: usize) -> Mat {
    let dim = 1usize << n;
    let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
    let sub = |idx: usize| targets.iter().fold(0, |acc, &q| (acc << 1) | bit(idx, q));
    let mask: usize = targets.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    let mut out = Mat::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            if i & !mask == j & !mask {
                out.data[i * dim + j] = u.at(sub(i), sub(j));
            }
        }
    }
    out
}

pub fn gate_matrix(g: &Gate, n: usize, params: &[f64]) -> Mat {
    let theta = g.slot.map_or(0.0, |s| params[s]);
    let local = match g.kind {
        GateKind::Rx => rotation(&pauli_1q('X'), theta),
        GateKind::Ry => rotation(&pauli_1q('Y'), theta),
        GateKind::Rz => rotation(&pauli_1q('Z'), theta),
        GateKind::Cz => {
            let mut m = Mat::identity(4);
            m.data[15] = c(-1.0, 0.0);
            m
        }
        GateKind::Qft => dft(1 << g.targets.len(), false),
        GateKind::QftDag => dft(1 << g.targets.len(), true),
        GateKind::FixedUnitary => {
            let raw = g.matrix.as_ref().expect("matrix");
            let dim = 1 << g.targets.len();
            Mat {
                dim,
                data: raw.iter().map(|&[re, im]| c(re, im)).collect(),
            }
        }
    };
    embed(&local, &g.targets, n)
}

pub fn circuit_unitary(circuit: &Circuit, params: &[f64]) -> Mat {
    let n = circuit.n_qubits();
    circuit
        .gates()
        .iter()
        .fold(Mat::identity(1 << n), |acc, g| gate_matrix(g, n, params).mul(&acc))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
    let amps: Vec<C> = (0..1 << n)
        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    StateVector::from_amplitudes(amps).unwrap().normalized().unwrap()
}

/// Haar-ish random unitary via Gram-Schmidt on a random complex matrix.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> Mat {
    let mut cols: Vec<Vec<C>> = Vec::new();
    while cols.len() < dim {
        let mut v: Vec<C> = (0..dim)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        for u in &cols {
            let p: C = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= p * y;
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    let mut m = Mat::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, &a) in col.iter().enumerate() {
            m.data[i * dim + j] = a;
        }
    }
    m
}

pub fn vec_dist(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨ψ|M|ψ⟩`.
pub fn expect(m: &Mat, psi: &[C]) -> C {
    psi.iter().zip(m.apply(psi)).map(|(a, b)| a.conj() * b).sum()
}

/// Random circuit over every gate kind on `n` qubits.
pub fn random_circuit<R: Rng>(n: usize, n_gates: usize, r: &mut R) -> (Circuit, Vec<f64>) {
    let mut gates = Vec::new();
    let mut slots = 0;
    for _ in 0..n_gates {
        let q = r.random_range(0..n);
        match r.random_range(0..6) {
            0 => gates.push(Gate::rx(q, slots)),
            1 => gates.push(Gate::ry(q, slots)),
            2 => gates.push(Gate::rz(q, slots)),
            3 if n > 1 => {
                let b = (q + 1 + r.random_range(0..n - 1)) % n;
                gates.push(Gate::cz(q, b));
                continue;
            }
            4 if n > 1 => {
                let count = r.random_range(1..=n - q);
                gates.push(Gate::qft(q, count, r.random()));
                continue;
            }
            _ => {
                let u = random_unitary(2, r);
                gates.push(Gate::fixed(vec![q], &u.data));
                continue;
            }
        }
        slots += 1;
    }
    if slots == 0 {
        gates.push(Gate::ry(0, 0));
        slots = 1;
    }
    let params = (0..slots).map(|_| r.random_range(-3.0..3.0)).collect();
    (Circuit::new(n, gates, slots).unwrap(), params)
}

/// Sum of three random Pauli strings with real coefficients.
pub fn random_observable<R: Rng>(n: usize, r: &mut R) -> PauliSum {
    let mut s = PauliSum::zero(n);
    for _ in 0..3 {
        let code: u64 = r.random_range(0..1u64 << (2 * n));
        let l: String = (0..n).map(|q| ['I', 'X', 'Y', 'Z'][((code >> (2 * q)) & 3) as usize]).collect();
        let (_, p) = PauliString::parse(&l).unwrap();
        s.add_term(p, c(r.random_range(-1.0..1.0), 0.0));
    }
    s
}
