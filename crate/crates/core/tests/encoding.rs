mod common;

use std::f64::consts::{FRAC_PI_2, TAU};

use common::{rng, vec_dist};
use proptest::prelude::*;
use rand::Rng;
use rotiq::data::rotate_raster;
use rotiq::encoding::*;

fn random_image<R: Rng>(w: usize, h: usize, r: &mut R) -> ImageGrid {
    let px = (0..w * h).map(|_| r.random::<f64>()).collect();
    ImageGrid::new(w, h, px).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn exact_rotations_act_as_shifts(seed in 0u64..10_000, n_rad in 1usize..4, n_orb in 1usize..4) {
        let mut r = rng(seed);
        let img = random_image(24, 20, &mut r);
        let s = build_sampling(n_rad, n_orb, 24, 20).unwrap();
        let base = encode(&img, &s).unwrap();
        let m = 1usize << n_orb;
        let g = r.random_range(0..m);
        let rotated = encode_rotated(&img, &s, TAU * g as f64 / m as f64).unwrap();
        let shifted = rotation_rep(&base, n_orb, g).unwrap();
        prop_assert!(vec_dist(rotated.amplitudes(), shifted.amplitudes()) < 1e-10);
    }

    #[test]
    fn encoded_states_are_unit_norm(seed in 0u64..10_000) {
        let img = random_image(16, 16, &mut rng(seed));
        let s = build_sampling(3, 3, 16, 16).unwrap();
        prop_assert!((encode(&img, &s).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn quarter_turn_raster_matches_shift() {
    let mut r = rng(11);
    let img = random_image(32, 32, &mut r);
    for n_orb in 2..=4 {
        let s = build_sampling(3, n_orb, 32, 32).unwrap();
        let m = 1usize << n_orb;
        let turned = encode(&rotate_raster(&img, FRAC_PI_2).unwrap(), &s).unwrap();
        let shifted = rotation_rep(&encode(&img, &s).unwrap(), n_orb, m / 4).unwrap();
        assert!(vec_dist(turned.amplitudes(), shifted.amplitudes()) < 1e-10, "n_orb={n_orb}");
    }
}

#[test]
fn rotation_rep_is_a_group_action() {
    let psi = common::random_state(5, &mut rng(3));
    let m = 8;
    for a in 0..m {
        for b in 0..m {
            let ab = rotation_rep(&rotation_rep(&psi, 3, a).unwrap(), 3, b).unwrap();
            let direct = rotation_rep(&psi, 3, (a + b) % m).unwrap();
            assert!(vec_dist(ab.amplitudes(), direct.amplitudes()) == 0.0);
        }
    }
    assert!(rotation_rep(&psi, 3, 8).is_err());
}

#[test]
fn fourier_frame_turns_rotations_into_phases() {
    // after QFT† on the orbital register, R(g) is diagonal: |⟨k|ψ⟩| unchanged
    let img = random_image(20, 20, &mut rng(4));
    let s = build_sampling(2, 3, 20, 20).unwrap();
    let a = equivariant_prepare(&img, &s).unwrap();
    let mut b = rotation_rep(&encode(&img, &s).unwrap(), 3, 3).unwrap();
    b.apply_qft(2, 3, true).unwrap();
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        assert!((x.norm() - y.norm()).abs() < 1e-12);
    }
}

#[test]
fn sampling_geometry() {
    let s = build_sampling(2, 2, 32, 32).unwrap();
    assert_eq!(s.vertices.len(), 16);
    assert_eq!(s.r_max, 15.0);
    assert_eq!(s.radius(3), 15.0);
    // vertex (r=0, k=1) is a quarter turn counter-clockwise: straight up
    let (x, y) = s.vertices[1];
    assert!((x - 15.5).abs() < 1e-12 && (y - (15.5 - 3.75)).abs() < 1e-12);
    assert!(build_sampling(0, 2, 32, 32).is_err());
    assert!(build_sampling(2, 2, 2, 2).is_err());
}

#[test]
fn zero_image_cannot_be_encoded() {
    let img = ImageGrid::filled(16, 16, 0.0).unwrap();
    let s = build_sampling(2, 2, 16, 16).unwrap();
    assert!(matches!(encode(&img, &s), Err(rotiq::Error::Encoding(_))));
}

#[test]
fn reconstruction_round_trip_on_vertices() {
    // an image constant on each polygon is reproduced at the vertices
    let s = build_sampling(2, 3, 33, 33).unwrap();
    let samples: Vec<f64> = (0..32).map(|i| (i / 8) as f64 + 1.0).collect();
    let recon = reconstruct_image(&samples, &s, 33, 33).unwrap();
    let back = sample(&recon, &s).unwrap();
    for (a, b) in samples.iter().zip(&back) {
        assert!((a - b).abs() < 1e-9, "{a} {b}");
    }
    assert_eq!(recon.get(0, 0), 0.0);
}
