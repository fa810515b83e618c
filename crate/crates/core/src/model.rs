//! Equivariant and generic layered classifiers, prediction and loss.
//!
//! Class `y` (1-based) is read out as `⟨Z⟩` on qubit `y − 1`, and the
//! per-example loss is `−⟨Z_y⟩` after the circuit.

use std::f64::consts::{FRAC_PI_4, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{build_sampling, encode, encode_samples, ImageGrid};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::sim::{adjoint_grad, parameter_shift_grad, run, Circuit, Gate, GateKind, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Architecture {
    Equivariant,
    Generic,
}

/// How an image becomes the model's input state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InputEncoding {
    /// Polygon-vertex sampling on `n_rad + n_orb` qubits.
    #[default]
    Polygon,
    /// Row-major amplitude encoding of the whole image, average-pooled by a
    /// power of two until it has exactly `2^n` pixels.
    Flattened,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_rad: usize,
    pub n_orb: usize,
    pub layers: usize,
    pub architecture: Architecture,
    pub n_classes: usize,
    pub seed: u64,
    /// Trainable `RZ` on every orbital qubit in each equivariant layer.
    #[serde(default)]
    pub orbital_rotations: bool,
    #[serde(default)]
    pub input_encoding: InputEncoding,
}

impl ModelConfig {
    pub fn equivariant(n_rad: usize, n_orb: usize, layers: usize, n_classes: usize) -> Self {
        ModelConfig {
            n_rad,
            n_orb,
            layers,
            architecture: Architecture::Equivariant,
            n_classes,
            seed: 0,
            orbital_rotations: false,
            input_encoding: InputEncoding::Polygon,
        }
    }

    pub fn generic(n_rad: usize, n_orb: usize, layers: usize, n_classes: usize) -> Self {
        ModelConfig {
            architecture: Architecture::Generic,
            ..ModelConfig::equivariant(n_rad, n_orb, layers, n_classes)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_rad + self.n_orb
    }

    pub fn n_params(&self) -> usize {
        match self.architecture {
            Architecture::Equivariant => {
                let orb = if self.orbital_rotations { self.n_orb } else { 0 };
                (3 * self.n_rad + orb) * self.layers
            }
            Architecture::Generic => 3 * self.n_qubits() * self.layers,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_rad == 0 || self.n_orb == 0 {
            return bad(format!(
                "registers must be nonempty (n_rad={}, n_orb={})",
                self.n_rad, self.n_orb
            ));
        }
        if self.n_qubits() > 24 {
            return bad(format!("{} qubits exceeds the simulator limit", self.n_qubits()));
        }
        if self.layers == 0 {
            return bad("at least one layer is required".into());
        }
        if self.n_classes == 0 {
            return bad("at least one class is required".into());
        }
        match self.architecture {
            Architecture::Equivariant => {
                if self.n_classes > self.n_rad {
                    return bad(format!(
                        "equivariant model measures radial qubits only: {} classes > n_rad={}",
                        self.n_classes, self.n_rad
                    ));
                }
                if self.input_encoding != InputEncoding::Polygon {
                    return bad("equivariant model requires the polygon encoding".into());
                }
            }
            Architecture::Generic => {
                if self.n_classes > self.n_qubits() {
                    return bad(format!(
                        "{} classes > {} qubits",
                        self.n_classes,
                        self.n_qubits()
                    ));
                }
                if self.orbital_rotations {
                    return bad("orbital rotations only apply to the equivariant model".into());
                }
            }
        }
        Ok(())
    }
}

fn push_rotation_layer(gates: &mut Vec<Gate>, qubits: std::ops::Range<usize>, slot: &mut usize) {
    for q in qubits {
        gates.push(Gate::rz(q, *slot));
        gates.push(Gate::ry(q, *slot + 1));
        gates.push(Gate::rz(q, *slot + 2));
        *slot += 3;
    }
}

/// `QFT†` on the orbital register, then `layers` × (RZ·RY·RZ on each radial
/// qubit, CZ on every nearest-neighbour pair).
pub fn build_equivariant(config: &ModelConfig) -> Result<Circuit> {
    config.validate()?;
    if config.architecture != Architecture::Equivariant {
        return Err(Error::InvalidArgument("config is not equivariant".into()));
    }
    let n = config.n_qubits();
    let mut gates = vec![Gate::qft(config.n_rad, config.n_orb, true)];
    let mut slot = 0;
    for _ in 0..config.layers {
        push_rotation_layer(&mut gates, 0..config.n_rad, &mut slot);
        if config.orbital_rotations {
            for q in config.n_rad..n {
                gates.push(Gate::rz(q, slot));
                slot += 1;
            }
        }
        for a in 0..n - 1 {
            gates.push(Gate::cz(a, a + 1));
        }
    }
    Circuit::new(n, gates, slot)
}

/// The same layer recipe on every qubit, without the Fourier block.
pub fn build_generic(config: &ModelConfig) -> Result<Circuit> {
    config.validate()?;
    if config.architecture != Architecture::Generic {
        return Err(Error::InvalidArgument("config is not generic".into()));
    }
    let n = config.n_qubits();
    let mut gates = Vec::new();
    let mut slot = 0;
    for _ in 0..config.layers {
        push_rotation_layer(&mut gates, 0..n, &mut slot);
        for a in 0..n - 1 {
            gates.push(Gate::cz(a, a + 1));
        }
    }
    Circuit::new(n, gates, slot)
}

pub fn build_circuit(config: &ModelConfig) -> Result<Circuit> {
    match config.architecture {
        Architecture::Equivariant => build_equivariant(config),
        Architecture::Generic => build_generic(config),
    }
}

/// `[Z_1, …, Z_{n_classes}]`.
pub fn class_observables(config: &ModelConfig) -> Result<Vec<PauliSum>> {
    config.validate()?;
    (0..config.n_classes)
        .map(|q| PauliSum::single(config.n_qubits(), q, Pauli::Z))
        .collect()
}

/// Hermitian generators of the trainable and entangling gates (the Fourier
/// block is a fixed input transform and is skipped).
pub fn gate_generators(circuit: &Circuit) -> Result<Vec<PauliSum>> {
    let n = circuit.n_qubits();
    let mut out: Vec<PauliSum> = Vec::new();
    for g in circuit.gates() {
        let op = match g.kind {
            GateKind::Rx => PauliSum::single(n, g.targets[0], Pauli::X)?,
            GateKind::Ry => PauliSum::single(n, g.targets[0], Pauli::Y)?,
            GateKind::Rz => PauliSum::single(n, g.targets[0], Pauli::Z)?,
            GateKind::Cz => {
                let za = PauliString::single(n, g.targets[0], Pauli::Z);
                let zb = PauliString::single(n, g.targets[1], Pauli::Z);
                let c = Complex64::new(-FRAC_PI_4, 0.0);
                let mut s = PauliSum::zero(n);
                s.add_term(PauliString::IDENTITY, c);
                s.add_term(za, -c);
                s.add_term(zb, -c);
                s.add_term(PauliString { x: 0, z: za.z | zb.z }, c);
                s
            }
            GateKind::Qft | GateKind::QftDag => continue,
            GateKind::FixedUnitary => {
                return Err(Error::InvalidArgument(
                    "dense gates have no Pauli generator".into(),
                ))
            }
        };
        if !out.contains(&op) {
            out.push(op);
        }
    }
    Ok(out)
}

/// Independent uniform angles on `[0, 2π)`.
pub fn init_params<R: Rng + ?Sized>(n_params: usize, rng: &mut R) -> Vec<f64> {
    (0..n_params).map(|_| rng.random::<f64>() * TAU).collect()
}

/// Whole-image amplitude encoding on `n_qubits`.
pub fn flatten_encode(image: &ImageGrid, n_qubits: usize) -> Result<StateVector> {
    let target = 1usize << n_qubits;
    let mut img = image.clone();
    while img.width() * img.height() > target
        && img.width().is_multiple_of(2)
        && img.height().is_multiple_of(2)
    {
        img = img.downsample(2)?;
    }
    if img.width() * img.height() != target {
        return Err(Error::Encoding(format!(
            "{}x{} image cannot be pooled to {target} pixels",
            image.width(),
            image.height()
        )));
    }
    encode_samples(img.pixels())
}

/// Input state for `config` built from `image`.
pub fn encode_input(config: &ModelConfig, image: &ImageGrid) -> Result<StateVector> {
    match config.input_encoding {
        InputEncoding::Polygon => {
            let s = build_sampling(config.n_rad, config.n_orb, image.width(), image.height())?;
            encode(image, &s)
        }
        InputEncoding::Flattened => flatten_encode(image, config.n_qubits()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    /// 1-based class index.
    pub class: usize,
    pub expectations: Vec<f64>,
}

/// Runs the circuit once and returns the argmax class (ties go to the lowest
/// index).
pub fn predict(
    circuit: &Circuit,
    input: &StateVector,
    params: &[f64],
    observables: &[PauliSum],
) -> Result<Prediction> {
    if observables.is_empty() {
        return Err(Error::InvalidArgument("no observables".into()));
    }
    let out = run(circuit, input, params)?;
    let expectations = observables
        .iter()
        .map(|o| out.expectation(o))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (j, &e) in expectations.iter().enumerate() {
        if e > expectations[best] {
            best = j;
        }
    }
    Ok(Prediction {
        class: best + 1,
        expectations,
    })
}

fn z_observable(n: usize, y: usize) -> Result<PauliSum> {
    if y == 0 || y > n {
        return Err(Error::IndexOutOfRange { index: y, limit: n });
    }
    PauliSum::single(n, y - 1, Pauli::Z)
}

/// `−⟨Z_y⟩` after the circuit, `y` 1-based.
pub fn loss(circuit: &Circuit, input: &StateVector, params: &[f64], y: usize) -> Result<f64> {
    z_observable(circuit.n_qubits(), y)?;
    let out = run(circuit, input, params)?;
    Ok(-out.z_expectation(y - 1)?)
}

/// Gradient estimator for the loss.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GradMethod {
    #[default]
    ParameterShift,
    /// Reverse sweep; same values as parameter shift up to rounding.
    Adjoint,
}

/// Loss and its gradient.
pub fn loss_and_grad(
    circuit: &Circuit,
    input: &StateVector,
    params: &[f64],
    y: usize,
    method: GradMethod,
) -> Result<(f64, Vec<f64>)> {
    let obs = z_observable(circuit.n_qubits(), y)?.scale(Complex64::new(-1.0, 0.0));
    match method {
        GradMethod::ParameterShift => {
            let value = run(circuit, input, params)?.expectation(&obs)?;
            let grad = parameter_shift_grad(circuit, input, params, &obs)?;
            Ok((value, grad))
        }
        GradMethod::Adjoint => adjoint_grad(circuit, input, params, &obs),
    }
}

/// Config, circuit and readout bundled together.
#[derive(Clone, Debug)]
pub struct Model {
    pub config: ModelConfig,
    pub circuit: Circuit,
    pub observables: Vec<PauliSum>,
}

impl Model {
    pub fn new(config: ModelConfig) -> Result<Self> {
        let circuit = build_circuit(&config)?;
        let observables = class_observables(&config)?;
        Ok(Model {
            config,
            circuit,
            observables,
        })
    }

    pub fn n_params(&self) -> usize {
        self.circuit.n_params()
    }

    pub fn encode(&self, image: &ImageGrid) -> Result<StateVector> {
        encode_input(&self.config, image)
    }

    pub fn predict(&self, input: &StateVector, params: &[f64]) -> Result<Prediction> {
        predict(&self.circuit, input, params, &self.observables)
    }

    pub fn check_label(&self, y: usize) -> Result<()> {
        if y == 0 || y > self.config.n_classes {
            return Err(Error::IndexOutOfRange {
                index: y,
                limit: self.config.n_classes,
            });
        }
        Ok(())
    }

    pub fn loss(&self, input: &StateVector, params: &[f64], y: usize) -> Result<f64> {
        self.check_label(y)?;
        loss(&self.circuit, input, params, y)
    }

    pub fn loss_and_grad(
        &self,
        input: &StateVector,
        params: &[f64],
        y: usize,
        method: GradMethod,
    ) -> Result<(f64, Vec<f64>)> {
        self.check_label(y)?;
        loss_and_grad(&self.circuit, input, params, y, method)
    }
}
