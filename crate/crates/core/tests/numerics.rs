use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use barenco::numerics::{avg_gate_fidelity, expm, propagate, CMatrix, SpectralData};
use barenco::units::two_pi_khz;

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
    let mut h = CMatrix::zeros(n);
    for i in 0..n {
        h[(i, i)] = Complex64::new(scale * rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

fn to_nalgebra(m: &CMatrix) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(m.dim(), m.dim(), m.entries())
}

#[test]
fn propagate_is_unitary_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for k in 0..10_000 {
        let n = [2, 3, 4, 8, 12][k % 5];
        let h = random_hermitian(&mut rng, n, 10.0);
        let t = rng.random_range(0.0..5.0);
        worst = worst.max(propagate(&h, t).unwrap().unitarity_defect());
    }
    assert!(worst <= 1e-10, "worst unitarity defect {worst:e}");
}

#[test]
fn propagate_matches_nalgebra_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [2, 4, 12] {
        for _ in 0..20 {
            let h = random_hermitian(&mut rng, n, 3.0);
            let t = rng.random_range(0.0..2.0);
            let ours = propagate(&h, t).unwrap();
            let theirs = (to_nalgebra(&h) * Complex64::new(0.0, -t)).exp();
            let diff = (to_nalgebra(&ours) - theirs).camax();
            assert!(diff < 1e-10, "n = {n}: {diff:e}");
        }
    }
}

#[test]
fn expm_matches_nalgebra_for_non_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let mut a = CMatrix::zeros(6);
        for i in 0..6 {
            for j in 0..6 {
                a[(i, j)] = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            }
        }
        let diff = (to_nalgebra(&expm(&a)) - to_nalgebra(&a).exp()).camax();
        assert!(diff < 1e-9, "{diff:e}");
    }
}

#[test]
fn two_level_block_matches_spectral_closed_form() {
    let (v1, v2, ve) = (two_pi_khz(200.5), two_pi_khz(200.5), two_pi_khz(357.5));
    for beta0 in [0.0, 0.7, -2.0] {
        let s = SpectralData::from_parts(v1, v2, ve, beta0);
        let t = 0.5;
        let (p, m) = s.eigenvectors();
        let mut closed = CMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                closed[(i, j)] = p[i] * p[j].conj() * Complex64::from_polar(1.0, -s.lambda_plus * t)
                    + m[i] * m[j].conj() * Complex64::from_polar(1.0, -s.lambda_minus * t);
            }
        }
        let u = propagate(&s.reconstruct(), t).unwrap();
        assert!(u.max_abs_diff(&closed) < 1e-10);
    }
}

#[test]
fn fidelity_of_self_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = propagate(&random_hermitian(&mut rng, 4, 1.0), 1.0).unwrap();
    let f = avg_gate_fidelity(&u, &u, &[0, 1, 2, 3]).unwrap();
    assert!((f - 1.0).abs() < 1e-14);
}

proptest! {
    #[test]
    fn propagate_composes(seed in any::<u64>(), t1 in 0.0..3.0f64, t2 in 0.0..3.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(&mut rng, 4, 2.0);
        let whole = propagate(&h, t1 + t2).unwrap();
        let parts = &propagate(&h, t1).unwrap() * &propagate(&h, t2).unwrap();
        prop_assert!(whole.max_abs_diff(&parts) < 1e-10);
    }

    #[test]
    fn fidelity_is_symmetric_for_unitaries(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = propagate(&random_hermitian(&mut rng, 4, 1.0), 1.0).unwrap();
        let b = propagate(&random_hermitian(&mut rng, 4, 1.0), 1.0).unwrap();
        let sub = [0, 1, 2, 3];
        let fab = avg_gate_fidelity(&a, &b, &sub).unwrap();
        let fba = avg_gate_fidelity(&b, &a, &sub).unwrap();
        prop_assert!((fab - fba).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&fab));
    }

    #[test]
    fn global_phase_does_not_change_fidelity(seed in any::<u64>(), g in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = propagate(&random_hermitian(&mut rng, 4, 1.0), 1.0).unwrap();
        let f = avg_gate_fidelity(&a.scale(Complex64::from_polar(1.0, g)), &a, &[0, 1, 2, 3]).unwrap();
        prop_assert!((f - 1.0).abs() < 1e-12);
    }
}
