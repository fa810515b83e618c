mod common;

use common::{c, circuit_unitary, dft, embed, random_circuit, random_observable, random_state, rng, sum_matrix, vec_dist, Mat};
use num_complex::Complex64;
use rotiq::pauli::{Pauli, PauliSum};
use rotiq::sim::*;

#[test]
fn circuits_match_dense_oracle() {
    let mut r = rng(1);
    for trial in 0..40 {
        let n = 1 + trial % 5;
        let (circ, params) = random_circuit(n, 12, &mut r);
        let psi = random_state(n, &mut r);
        let ours = run(&circ, &psi, &params).unwrap();
        let dense = circuit_unitary(&circ, &params).apply(psi.amplitudes());
        assert!(vec_dist(ours.amplitudes(), &dense) < 1e-10, "trial {trial}");
    }
}

#[test]
fn unitarity_preserves_norm() {
    let mut r = rng(2);
    for _ in 0..20 {
        let (circ, params) = random_circuit(5, 30, &mut r);
        let out = run(&circ, &random_state(5, &mut r), &params).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn linearity() {
    let mut r = rng(3);
    let (circ, params) = random_circuit(4, 20, &mut r);
    let a = random_state(4, &mut r);
    let b = random_state(4, &mut r);
    let (alpha, beta) = (c(0.3, -0.2), c(-0.7, 0.5));
    let mix: Vec<Complex64> = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| alpha * x + beta * y).collect();
    let mix = StateVector::from_amplitudes(mix).unwrap();
    let lhs = run(&circ, &mix, &params).unwrap();
    let ra = run(&circ, &a, &params).unwrap();
    let rb = run(&circ, &b, &params).unwrap();
    let rhs: Vec<Complex64> = ra.amplitudes().iter().zip(rb.amplitudes()).map(|(x, y)| alpha * x + beta * y).collect();
    assert!(vec_dist(lhs.amplitudes(), &rhs) < 1e-12);
}

#[test]
fn qft_diagonalizes_cyclic_shift() {
    for m_bits in 1..=4 {
        let m = 1usize << m_bits;
        let mut shift = Mat::zeros(m);
        for k in 0..m {
            shift.data[((k + 1) % m) * m + k] = c(1.0, 0.0);
        }
        // circuit order: QFT†, then shift, then QFT
        let d = dft(m, false).mul(&shift).mul(&dft(m, true));
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    assert!(d.at(i, j).norm() < 1e-12);
                }
            }
            let want = Complex64::from_polar(1.0, std::f64::consts::TAU * i as f64 / m as f64);
            assert!((d.at(i, i) - want).norm() < 1e-12);
        }
        // and the simulator's QFT kernel agrees with the dense DFT
        let psi = random_state(m_bits + 1, &mut rng(m as u64));
        let mut s = psi.clone();
        s.apply_qft(1, m_bits, false).unwrap();
        let dense = embed(&dft(m, false), &(1..=m_bits).collect::<Vec<_>>(), m_bits + 1).apply(psi.amplitudes());
        assert!(vec_dist(s.amplitudes(), &dense) < 1e-12);
    }
    // the 2-qubit example: QFT† · S · QFT = diag(1, i, −1, −i)
    let mut shift = Mat::zeros(4);
    for k in 0..4 {
        shift.data[((k + 1) % 4) * 4 + k] = c(1.0, 0.0);
    }
    let d = dft(4, false).mul(&shift).mul(&dft(4, true));
    let want = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
    for (k, w) in want.iter().enumerate() {
        assert!((d.at(k, k) - w).norm() < 1e-12);
    }
}

#[test]
fn expectation_matches_dense() {
    let mut r = rng(4);
    for _ in 0..20 {
        let psi = random_state(3, &mut r);
        let obs = random_observable(3, &mut r);
        let dense = common::expect(&sum_matrix(&obs), psi.amplitudes());
        assert!((psi.expectation(&obs).unwrap() - dense.re).abs() < 1e-12);
        let applied = psi.apply_operator(&obs).unwrap();
        assert!(vec_dist(applied.amplitudes(), &sum_matrix(&obs).apply(psi.amplitudes())) < 1e-12);
    }
    let bad = PauliSum::single(3, 0, Pauli::X).unwrap().scale(c(0.0, 1.0));
    assert!(random_state(3, &mut r).expectation(&bad).is_err());
}

#[test]
fn parameter_shift_matches_finite_differences() {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let n = 1 + trial % 6;
        let (circ, params) = random_circuit(n, 15, &mut r);
        let psi = random_state(n, &mut r);
        let obs = random_observable(n, &mut r);
        let ps = parameter_shift_grad(&circ, &psi, &params, &obs).unwrap();
        let fd = finite_diff_grad(&circ, &psi, &params, &obs, 1e-5).unwrap();
        for (a, b) in ps.iter().zip(&fd) {
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst < 1e-6, "worst deviation {worst}");
}

#[test]
fn adjoint_matches_parameter_shift() {
    let mut r = rng(6);
    for trial in 0..30 {
        let n = 1 + trial % 5;
        let (circ, params) = random_circuit(n, 20, &mut r);
        let psi = random_state(n, &mut r);
        let obs = random_observable(n, &mut r);
        let ps = parameter_shift_grad(&circ, &psi, &params, &obs).unwrap();
        let (v, adj) = adjoint_grad(&circ, &psi, &params, &obs).unwrap();
        assert!((v - run(&circ, &psi, &params).unwrap().expectation(&obs).unwrap()).abs() < 1e-12);
        for (a, b) in ps.iter().zip(&adj) {
            assert!((a - b).abs() < 1e-10, "trial {trial}: {a} vs {b}");
        }
    }
}

#[test]
fn single_component_matches_full_gradient() {
    let mut r = rng(7);
    let (circ, params) = random_circuit(4, 20, &mut r);
    let psi = random_state(4, &mut r);
    let obs = random_observable(4, &mut r);
    let full = parameter_shift_grad(&circ, &psi, &params, &obs).unwrap();
    for (k, g) in full.iter().enumerate() {
        let one = parameter_shift_component(&circ, &psi, &params, &obs, k).unwrap();
        assert!((one - g).abs() < 1e-12);
    }
}

#[test]
fn circuit_json_round_trip() {
    let mut r = rng(8);
    let (circ, _) = random_circuit(4, 25, &mut r);
    let back = Circuit::from_json(&circ.to_json().unwrap()).unwrap();
    assert_eq!(back, circ);
    // deserialisation validates
    let bad = r#"{"n_qubits": 2, "gates": [{"kind": "RX", "targets": [5], "slot": 0}], "n_params": 1}"#;
    assert!(Circuit::from_json(bad).is_err());
}

#[test]
fn size_mismatches_are_errors() {
    let circ = Circuit::new(2, vec![Gate::rx(0, 0)], 1).unwrap();
    assert!(run(&circ, &StateVector::zero(3), &[0.1]).is_err());
    assert!(run(&circ, &StateVector::zero(2), &[0.1, 0.2]).is_err());
    let z3 = PauliSum::single(3, 0, Pauli::Z).unwrap();
    assert!(parameter_shift_grad(&circ, &StateVector::zero(2), &[0.1], &z3).is_err());
}
