use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::pauli::PauliSum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cz,
    Qft,
    QftDag,
    FixedUnitary,
}

impl GateKind {
    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub slot: Option<usize>,
    /// Row-major `[re, im]` entries, only for `FIXED_UNITARY`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
}

impl Gate {
    pub fn rx(q: usize, slot: usize) -> Self {
        Gate::rotation(GateKind::Rx, q, slot)
    }

    pub fn ry(q: usize, slot: usize) -> Self {
        Gate::rotation(GateKind::Ry, q, slot)
    }

    pub fn rz(q: usize, slot: usize) -> Self {
        Gate::rotation(GateKind::Rz, q, slot)
    }

    fn rotation(kind: GateKind, q: usize, slot: usize) -> Self {
        Gate {
            kind,
            targets: vec![q],
            slot: Some(slot),
            matrix: None,
        }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Gate {
            kind: GateKind::Cz,
            targets: vec![a, b],
            slot: None,
            matrix: None,
        }
    }

    pub fn qft(first: usize, count: usize, inverse: bool) -> Self {
        Gate {
            kind: if inverse { GateKind::QftDag } else { GateKind::Qft },
            targets: (first..first + count).collect(),
            slot: None,
            matrix: None,
        }
    }

    pub fn fixed(targets: Vec<usize>, matrix: &[Complex64]) -> Self {
        Gate {
            kind: GateKind::FixedUnitary,
            targets,
            slot: None,
            matrix: Some(matrix.iter().map(|c| [c.re, c.im]).collect()),
        }
    }

    fn validate(&self, n_qubits: usize, n_params: usize) -> Result<()> {
        for &t in &self.targets {
            if t >= n_qubits {
                return Err(Error::IndexOutOfRange {
                    index: t,
                    limit: n_qubits,
                });
            }
        }
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("{:?}: {msg}", self.kind)));
        match self.kind {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => {
                if self.targets.len() != 1 {
                    return bad("rotation needs exactly one target");
                }
                match self.slot {
                    Some(s) if s < n_params => {}
                    Some(s) => {
                        return Err(Error::IndexOutOfRange {
                            index: s,
                            limit: n_params,
                        })
                    }
                    None => return bad("rotation needs a parameter slot"),
                }
            }
            GateKind::Cz => {
                if self.targets.len() != 2 || self.targets[0] == self.targets[1] {
                    return bad("CZ needs two distinct targets");
                }
            }
            GateKind::Qft | GateKind::QftDag => {
                if self.targets.is_empty()
                    || self.targets.windows(2).any(|w| w[1] != w[0] + 1)
                {
                    return bad("QFT needs a contiguous ascending target range");
                }
            }
            GateKind::FixedUnitary => {
                let m = 1usize << self.targets.len();
                match &self.matrix {
                    Some(mat) if mat.len() == m * m => {}
                    _ => return bad("matrix size does not match targets"),
                }
            }
        }
        if !self.kind.is_rotation() && self.slot.is_some() {
            return bad("fixed gate cannot carry a parameter slot");
        }
        Ok(())
    }

    /// Applies the gate with the angle `theta` (ignored for fixed gates).
    pub fn apply_with(&self, state: &mut StateVector, theta: f64) -> Result<()> {
        match self.kind {
            GateKind::Rx => state.apply_rx(self.targets[0], theta),
            GateKind::Ry => state.apply_ry(self.targets[0], theta),
            GateKind::Rz => state.apply_rz(self.targets[0], theta),
            GateKind::Cz => state.apply_cz(self.targets[0], self.targets[1]),
            GateKind::Qft | GateKind::QftDag => state.apply_qft(
                self.targets[0],
                self.targets.len(),
                self.kind == GateKind::QftDag,
            ),
            GateKind::FixedUnitary => {
                let m: Vec<Complex64> = self
                    .matrix
                    .as_deref()
                    .unwrap_or_default()
                    .iter()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect();
                state.apply_dense(&self.targets, &m)
            }
        }
    }
}

impl Gate {
    /// Applies the inverse of the gate at angle `theta`.
    pub fn apply_inverse(&self, state: &mut StateVector, theta: f64) -> Result<()> {
        match self.kind {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Cz => {
                self.apply_with(state, -theta)
            }
            GateKind::Qft | GateKind::QftDag => state.apply_qft(
                self.targets[0],
                self.targets.len(),
                self.kind == GateKind::Qft,
            ),
            GateKind::FixedUnitary => {
                let raw = self.matrix.as_deref().unwrap_or_default();
                let m = 1usize << self.targets.len();
                let mut adj = vec![Complex64::new(0.0, 0.0); m * m];
                for r in 0..m {
                    for c in 0..m {
                        let [re, im] = raw[c * m + r];
                        adj[r * m + c] = Complex64::new(re, -im);
                    }
                }
                state.apply_dense(&self.targets, &adj)
            }
        }
    }
}

/// Applies one gate, reading its angle from `params`.
pub fn apply_gate(state: &mut StateVector, gate: &Gate, params: &[f64]) -> Result<()> {
    let theta = match gate.slot {
        Some(s) => *params.get(s).ok_or(Error::IndexOutOfRange {
            index: s,
            limit: params.len(),
        })?,
        None => 0.0,
    };
    gate.apply_with(state, theta)
}

/// Ordered gate list over a parameter vector of length `n_params`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
}

#[derive(Deserialize)]
struct RawCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCircuit::deserialize(d)?;
        Circuit::new(raw.n_qubits, raw.gates, raw.n_params).map_err(serde::de::Error::custom)
    }
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>, n_params: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 30 {
            return Err(Error::InvalidArgument(format!(
                "unsupported register size {n_qubits}"
            )));
        }
        let mut used = vec![false; n_params];
        for g in &gates {
            g.validate(n_qubits, n_params)?;
            if let Some(s) = g.slot {
                used[s] = true;
            }
        }
        if let Some(s) = used.iter().position(|u| !u) {
            return Err(Error::InvalidArgument(format!(
                "parameter slot {s} is never used"
            )));
        }
        Ok(Circuit {
            n_qubits,
            gates,
            n_params,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn check_inputs(&self, input: &StateVector, params: &[f64]) -> Result<()> {
        if input.n_qubits() != self.n_qubits {
            return Err(Error::dim(self.n_qubits, input.n_qubits()));
        }
        if params.len() != self.n_params {
            return Err(Error::dim(self.n_params, params.len()));
        }
        Ok(())
    }
}

/// Applies every gate of `circuit` in order.
pub fn run(circuit: &Circuit, input: &StateVector, params: &[f64]) -> Result<StateVector> {
    circuit.check_inputs(input, params)?;
    let mut state = input.clone();
    for g in &circuit.gates {
        apply_gate(&mut state, g, params)?;
    }
    Ok(state)
}

fn expectation_from(
    circuit: &Circuit,
    start: usize,
    mut state: StateVector,
    params: &[f64],
    observable: &PauliSum,
) -> Result<f64> {
    for g in &circuit.gates[start..] {
        apply_gate(&mut state, g, params)?;
    }
    state.expectation(observable)
}

/// `⟨λ|P_q|φ⟩` for the single-qubit generator of a rotation gate.
fn generator_overlap(lambda: &StateVector, phi: &StateVector, kind: GateKind, q: usize) -> Complex64 {
    let stride = 1usize << (phi.n_qubits() - 1 - q);
    let (l, p) = (lambda.amplitudes(), phi.amplitudes());
    let mut acc = Complex64::new(0.0, 0.0);
    for b in 0..p.len() {
        let up = b & stride == 0;
        acc += match kind {
            GateKind::Rx => l[b ^ stride].conj() * p[b],
            GateKind::Ry => {
                let v = l[b ^ stride].conj() * p[b];
                if up {
                    Complex64::new(-v.im, v.re)
                } else {
                    Complex64::new(v.im, -v.re)
                }
            }
            _ => {
                let v = l[b].conj() * p[b];
                if up {
                    v
                } else {
                    -v
                }
            }
        };
    }
    acc
}

/// Exact gradient of `⟨O⟩` by one forward and one backward sweep.
///
/// Agrees with [`parameter_shift_grad`] to rounding, at `O(gates)` cost
/// instead of `O(gates²)`.
pub fn adjoint_grad(
    circuit: &Circuit,
    input: &StateVector,
    params: &[f64],
    observable: &PauliSum,
) -> Result<(f64, Vec<f64>)> {
    check_shiftable(circuit)?;
    let mut phi = run(circuit, input, params)?;
    let value = phi.expectation(observable)?;
    let mut lambda = phi.apply_operator(observable)?;
    let mut grad = vec![0.0; circuit.n_params];
    for g in circuit.gates.iter().rev() {
        let theta = g.slot.map_or(0.0, |s| params[s]);
        if let Some(slot) = g.slot {
            // d/dθ exp(−iθP/2) = (−iP/2)·R, so the term is Im⟨λ|P|φ⟩
            grad[slot] += generator_overlap(&lambda, &phi, g.kind, g.targets[0]).im;
        }
        g.apply_inverse(&mut phi, theta)?;
        g.apply_inverse(&mut lambda, theta)?;
    }
    Ok((value, grad))
}

/// `(E(θ_k + π/2) − E(θ_k − π/2)) / 2` for the single gate at `gate_index`.
fn shift_term(
    circuit: &Circuit,
    gate_index: usize,
    before: &StateVector,
    params: &[f64],
    observable: &PauliSum,
) -> Result<f64> {
    let g = &circuit.gates[gate_index];
    let slot = g.slot.expect("rotation gates carry a slot");
    let mut e = [0.0; 2];
    for (out, shift) in e.iter_mut().zip([FRAC_PI_2, -FRAC_PI_2]) {
        let mut s = before.clone();
        g.apply_with(&mut s, params[slot] + shift)?;
        *out = expectation_from(circuit, gate_index + 1, s, params, observable)?;
    }
    Ok((e[0] - e[1]) / 2.0)
}

fn check_shiftable(circuit: &Circuit) -> Result<()> {
    for g in &circuit.gates {
        if g.slot.is_some() && !g.kind.is_rotation() {
            return Err(Error::InvalidArgument(format!(
                "{:?} has no two-term shift rule",
                g.kind
            )));
        }
    }
    Ok(())
}

/// Parameter-shift gradient of `⟨O⟩` with respect to every slot.
///
/// The state in front of each rotation is cached from one forward pass, so a
/// shifted evaluation only replays the remaining gates. Gates sharing a slot
/// add their contributions.
pub fn parameter_shift_grad(
    circuit: &Circuit,
    input: &StateVector,
    params: &[f64],
    observable: &PauliSum,
) -> Result<Vec<f64>> {
    circuit.check_inputs(input, params)?;
    check_shiftable(circuit)?;
    let mut grad = vec![0.0; circuit.n_params];
    let mut state = input.clone();
    let mut cached = Vec::new();
    for (i, g) in circuit.gates.iter().enumerate() {
        if g.slot.is_some() {
            cached.push((i, state.clone()));
        }
        apply_gate(&mut state, g, params)?;
    }
    for (i, before) in &cached {
        let slot = circuit.gates[*i].slot.expect("cached gates carry a slot");
        grad[slot] += shift_term(circuit, *i, before, params, observable)?;
    }
    Ok(grad)
}

/// Parameter-shift derivative with respect to one slot only.
pub fn parameter_shift_component(
    circuit: &Circuit,
    input: &StateVector,
    params: &[f64],
    observable: &PauliSum,
    slot: usize,
) -> Result<f64> {
    circuit.check_inputs(input, params)?;
    check_shiftable(circuit)?;
    if slot >= circuit.n_params {
        return Err(Error::IndexOutOfRange {
            index: slot,
            limit: circuit.n_params,
        });
    }
    let mut state = input.clone();
    let mut total = 0.0;
    for (i, g) in circuit.gates.iter().enumerate() {
        if g.slot == Some(slot) {
            total += shift_term(circuit, i, &state, params, observable)?;
        }
        apply_gate(&mut state, g, params)?;
    }
    Ok(total)
}

/// Central finite differences with step `h`.
pub fn finite_diff_grad(
    circuit: &Circuit,
    input: &StateVector,
    params: &[f64],
    observable: &PauliSum,
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step {h} must be positive")));
    }
    circuit.check_inputs(input, params)?;
    let mut p = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        p[k] = params[k] + h;
        let plus = run(circuit, input, &p)?.expectation(observable)?;
        p[k] = params[k] - h;
        let minus = run(circuit, input, &p)?.expectation(observable)?;
        p[k] = params[k];
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}
