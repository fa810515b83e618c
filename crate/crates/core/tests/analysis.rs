use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotiq::analysis::*;
use rotiq::model::{Model, ModelConfig};
use rotiq::sim::StateVector;
use rotiq::Error;

fn scan(samples: usize, seed: u64) -> BPScanConfig {
    BPScanConfig {
        qubits: vec![3, 4, 5],
        rule: AssignmentRule::FixedNrad(1),
        layers: 4,
        samples,
        input: InputRule::Image,
        seed,
    }
}

/// `(|0⟩|00⟩ + |1⟩|01⟩)/√2` in the trainable frame, brought back to the raw
/// frame with a forward QFT on the orbital pair.
fn entangled_raw_input() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    amps[0b000] = Complex64::new(h, 0.0);
    amps[0b101] = Complex64::new(h, 0.0);
    let mut s = StateVector::from_amplitudes(amps).unwrap();
    s.apply_qft(1, 2, false).unwrap();
    s
}

#[test]
fn scans_are_deterministic_and_thread_independent() {
    let a = gradient_variance_scan(&scan(200, 3)).unwrap();
    let b = gradient_variance_scan(&scan(200, 3)).unwrap();
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = pool.install(|| gradient_variance_scan(&scan(200, 3)).unwrap());
    assert_eq!(a.to_csv(), c.to_csv());
    let d = gradient_variance_scan(&scan(200, 4)).unwrap();
    assert_ne!(a, d);
}

#[test]
fn standard_error_shrinks_with_samples() {
    let small = gradient_variance_scan(&scan(250, 5)).unwrap();
    let large = gradient_variance_scan(&scan(1000, 5)).unwrap();
    for (s, l) in small.rows.iter().zip(&large.rows) {
        let ratio = s.variance_se / l.variance_se;
        assert!((1.4..3.0).contains(&ratio), "n={} ratio {ratio}", s.n);
        assert!(l.mean.abs() < 4.0 * l.mean_se + 1e-12);
    }
}

#[test]
fn sample_moments_match_direct_formulas() {
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let xs: Vec<f64> = (0..500).map(|_| r.random_range(-2.0..3.0)).collect();
    let m = sample_moments(&xs).unwrap();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((m.mean - mean).abs() < 1e-12);
    assert!((m.variance - var).abs() < 1e-12);
    assert!((m.mean_se - (var / n).sqrt()).abs() < 1e-12);
    // uniform on an interval of width 5: variance 25/12
    assert!((m.variance - 25.0 / 12.0).abs() < 5.0 * m.variance_se);
}

#[test]
fn deep_circuits_reach_predicted_moments() {
    let input = scan_input(InputRule::Image, 1, 2, 0).unwrap();
    let rho = trainable_frame(&input, 1, 2).unwrap();
    let predicted = rotiq::pauli::predicted_moments(&rho, 1, 1, 2).unwrap();
    let model = Model::new(ModelConfig::equivariant(1, 2, 40, 1)).unwrap();
    let est = estimate_loss_moments(&model, &input, 1, 4000, 1).unwrap();
    assert!((est.mean - predicted.mean).abs() < 4.0 * est.mean_se, "{est:?} {predicted:?}");
    assert!(
        (est.variance - predicted.variance).abs() < 4.0 * est.variance_se,
        "{est:?} {predicted:?}"
    );
}

#[test]
fn zero_purity_input_has_zero_variance() {
    let input = entangled_raw_input();
    let rows = variance_formula_report(1, 2, &[("bell".into(), input.clone())]).unwrap();
    assert!(rows[0].purity.abs() < 1e-12);
    assert!(rows[0].predicted_variance.abs() < 1e-12);
    assert!(rows[0].admissible);
    // the loss really is constant over parameters
    let model = Model::new(ModelConfig::equivariant(1, 2, 6, 1)).unwrap();
    let est = estimate_loss_moments(&model, &input, 1, 200, 2).unwrap();
    assert!(est.variance < 1e-20, "{est:?}");
}

#[test]
fn admissibility_flag() {
    let z = |nr, no| scan_input(InputRule::Zero, nr, no, 0).unwrap();
    assert!(variance_formula_report(2, 2, &[("z".into(), z(2, 2))]).unwrap()[0].admissible);
    assert!(!variance_formula_report(3, 2, &[("z".into(), z(3, 2))]).unwrap()[0].admissible);
}

#[test]
fn zero_state_purity_respects_the_bound() {
    let points: Vec<(usize, f64)> = formula_scan(&[4, 5, 6, 7, 8], AssignmentRule::FixedNrad(2), InputRule::Zero, 0)
        .unwrap()
        .rows
        .iter()
        .map(|r| (r.n, r.purity))
        .collect();
    assert!(bound_check_purity(&points).unwrap());
    let faster: Vec<(usize, f64)> = points.iter().map(|&(n, p)| (n, p * (-(n as f64)).exp2())).collect();
    assert!(!bound_check_purity(&faster).unwrap());
    assert!(matches!(bound_check_purity(&points[..2]), Err(Error::Insufficient(_))));
}

#[test]
fn fixed_radial_register_has_no_plateau() {
    let fixed = formula_scan(&[4, 5, 6, 7, 8], AssignmentRule::FixedNrad(2), InputRule::Image, 7).unwrap();
    assert!(!fixed.barren_plateau);
    assert!(fixed.slope.unwrap().abs() < 0.05);
    let prop = formula_scan(&[4, 6, 8], AssignmentRule::Proportional(0.5), InputRule::Image, 7).unwrap();
    assert!(prop.barren_plateau);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(matches!(gradient_variance_scan(&scan(1, 0)), Err(Error::Insufficient(_))));
    let mut bad = scan(10, 0);
    bad.qubits.clear();
    assert!(gradient_variance_scan(&bad).is_err());
    assert!(formula_scan(&[4], AssignmentRule::FixedNrad(4), InputRule::Zero, 0).is_err());
    assert!(fit_slope(&[1.0, 2.0], &[1.0]).is_err());
}
