use almostflat::fixtures::{random_hermitian, random_unitary};
use almostflat::matrixcore::*;
use almostflat::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_matrix(rng: &mut impl Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_skew(rng: &mut impl Rng, n: usize, norm: f64) -> CMatrix {
    random_hermitian(rng, n, norm).scale_complex(c(0.0, 1.0))
}

#[test]
fn norms() {
    assert!((op_norm(&CMatrix::identity(3)) - 1.0).abs() < 1e-12);
    let d = CMatrix::from_diagonal(&[c(3.0, 0.0), c(1.0, 0.0)]);
    assert!((op_norm(&d) - 3.0).abs() < 1e-12);
}

#[test]
fn norm_against_sampling_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = random_matrix(&mut rng, 4);
    let a = m.as_dmatrix();
    let unit = |x: nalgebra::DVector<Complex64>| &x / Complex64::from(x.norm());
    let mut best = unit(nalgebra::DVector::from_element(4, c(1.0, 0.0)));
    let mut value = (a * &best).norm();
    for _ in 0..100_000 {
        let x = unit(nalgebra::DVector::from_fn(4, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
        let v = (a * &x).norm();
        if v > value {
            (best, value) = (x, v);
        }
    }
    // random-walk refinement of the best sample with a shrinking step
    let mut step = 0.1;
    for _ in 0..20_000 {
        let dx = nalgebra::DVector::from_fn(4, |_, _| c(rng.gen_range(-step..step), rng.gen_range(-step..step)));
        let x = unit(&best + dx);
        let v = (a * &x).norm();
        if v > value {
            (best, value) = (x, v);
        } else {
            step = (step * 0.999).max(1e-6);
        }
    }
    let n = op_norm(&m);
    assert!(value <= n + 1e-12);
    assert!(n - value < 1e-6, "sampled {value}, computed {n}");
}

#[test]
fn norm_large_matrix_relative_accuracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let m = random_matrix(&mut rng, 48);
    let svd = m.as_dmatrix().clone().svd(false, false);
    let reference = svd.singular_values.max();
    assert!((op_norm(&m) - reference).abs() <= 1e-10 * reference);
}

#[test]
fn skew_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = random_hermitian(&mut rng, 3, 1.0);
    assert!(skew_project(&h).frobenius_norm() < 1e-15);
    let s = random_skew(&mut rng, 3, 1.0);
    assert!((&skew_project(&s) - &s).frobenius_norm() < 1e-15);
    let a = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
    let expected = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]]).unwrap();
    assert!((&skew_project(&a) - &expected).frobenius_norm() < 1e-15);
}

#[test]
fn square_root_examples() {
    let w = sqrt_one_plus_vsq(&CMatrix::zeros(2), 1e-12).unwrap();
    assert!(w.distance_to_identity() < 1e-15);

    let j = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]]).unwrap();
    let w = sqrt_one_plus_vsq(&j.scale(0.3), 1e-12).unwrap();
    let expected = CMatrix::identity(2).scale(0.91f64.sqrt());
    assert!((&w - &expected).frobenius_norm() < 1e-10);
    assert!((0.91f64.sqrt() - 0.953_939_2).abs() < 1e-7);

    let w = sqrt_one_plus_vsq(&CMatrix::scalar(c(0.0, 0.4)), 1e-12).unwrap();
    assert!((w.get(0, 0).re - 0.84f64.sqrt()).abs() < 1e-10);
}

#[test]
fn square_root_preconditions() {
    let big = CMatrix::scalar(c(0.0, 0.6));
    assert!(matches!(sqrt_one_plus_vsq(&big, 1e-12), Err(Error::Threshold { .. })));
    let hermitian = CMatrix::scalar(c(0.2, 0.0));
    assert!(matches!(sqrt_one_plus_vsq(&hermitian, 1e-12), Err(Error::Precondition(_))));
}

#[test]
fn square_root_is_hermitian_and_commutes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let v = random_skew(&mut rng, 4, 0.45);
        let w = sqrt_one_plus_vsq(&v, 1e-12).unwrap();
        assert!(w.hermitian_residual() < 1e-12);
        let sq = &w * &w;
        let target = &CMatrix::identity(4) + &(&v * &v);
        assert!(op_norm(&(&sq - &target)) < 1e-10);
        assert!(op_norm(&(&(&w * &v) - &(&v * &w))) < 1e-10);
    }
}

#[test]
fn unitarize_examples() {
    assert!(unitarize_g(&CMatrix::zeros(3)).unwrap().distance_to_identity() < 1e-15);
    let g = unitarize_g(&CMatrix::scalar(c(0.0, 0.3))).unwrap().get(0, 0);
    let expected = Complex64::from_polar(1.0, 0.3f64.asin());
    assert!((g - expected).norm() < 1e-12);
    assert!((g.re - 0.953_939_2).abs() < 1e-7 && (g.im - 0.3).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let v = random_skew(&mut rng, 5, 0.45);
    assert!(unitarize_g(&v).unwrap().unitarity_residual() <= 1e-9);
}

/// `(xx*)^{−1/2}x` through nalgebra's Hermitian eigendecomposition.
fn polar_oracle(x: &CMatrix) -> DMatrix<Complex64> {
    let a = x.as_dmatrix();
    let gram = a * a.adjoint();
    let eig = gram.symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from(1.0 / l.sqrt())));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint() * a
}

#[test]
fn polar_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_unitary(&mut rng, 3);
    assert!((&polar_project(&u).unwrap() - &u).frobenius_norm() < 1e-12);
    assert!((&polar_project(&u.scale(1.1)).unwrap() - &u).frobenius_norm() < 1e-12);
    for _ in 0..20 {
        let u = random_unitary(&mut rng, 4);
        let p = random_matrix(&mut rng, 4);
        let x = &u + &p.scale(0.2 / op_norm(&p));
        let y = polar_project(&x).unwrap();
        assert!(y.unitarity_residual() <= 1e-10);
        assert!((y.as_dmatrix() - polar_oracle(&x)).norm() < 1e-8);
    }
    assert!(matches!(polar_project(&CMatrix::identity(2).scale(0.3)), Err(Error::Threshold { .. })));
}

#[test]
fn polar_lipschitz_does_not_grow_with_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ratios = Vec::new();
    for n in [1usize, 2, 4, 8] {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let u = random_unitary(&mut rng, n);
            let p = random_matrix(&mut rng, n);
            let q = random_matrix(&mut rng, n);
            let x = &u + &p.scale(0.1 / op_norm(&p));
            let y = &x + &q.scale(0.01 / op_norm(&q));
            let num = op_norm(&(&polar_project(&x).unwrap() - &polar_project(&y).unwrap()));
            worst = worst.max(num / op_norm(&(&x - &y)));
        }
        ratios.push(worst);
    }
    let small = ratios[..3].iter().cloned().fold(0.0, f64::max);
    assert!(ratios[3] <= 1.1 * small, "{ratios:?}");
    assert!(ratios.iter().all(|&r| r < 3.0), "{ratios:?}");
}

#[test]
fn exponentials_and_powers() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = random_hermitian(&mut rng, 4, 1.0);
    let u = exp_i_hermitian(&h).unwrap();
    assert!(u.unitarity_residual() < 1e-12);
    let mut angles = unitary_eigen_angles(&u);
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!((angles[3] - 1.0).abs() < 1e-10 || (angles[0] + 1.0).abs() < 1e-10);
    let r = unitary_power(&u, 1.0 / 3.0).unwrap();
    let cube = &(&r * &r) * &r;
    assert!((&cube - &u).frobenius_norm() < 1e-10);
    let minus = CMatrix::identity(2).scale(-1.0);
    assert!(unitary_power(&minus, 0.5).is_err());
}

#[test]
fn eigen_angles_of_clustered_spectra() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spectra: [&[f64]; 4] = [
        &[0.3, 0.3, -0.3, 1e-9, 0.0, 2.0],
        &[1e-5, 2e-5, -1e-5, 0.0],
        &[0.5, -0.5, 0.5000001, 3.1, -3.1],
        &[0.0; 12],
    ];
    for spectrum in spectra {
        let w = random_unitary(&mut rng, spectrum.len());
        let d = CMatrix::from_diagonal(&spectrum.iter().map(|t| Complex64::from_polar(1.0, *t)).collect::<Vec<_>>());
        let u = &(&w.adjoint() * &d) * &w;
        let mut got = unitary_eigen_angles(&u);
        let mut want = spectrum.to_vec();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, t) in got.iter().zip(&want) {
            assert!((g - t).abs() < 1e-10, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn padding_and_sums() {
    let a = CMatrix::scalar(c(0.0, 1.0));
    let p = a.pad_identity(3).unwrap();
    assert_eq!(p.get(0, 0), c(0.0, 1.0));
    assert_eq!(p.get(2, 2), c(1.0, 0.0));
    assert!(CMatrix::identity(3).pad_identity(2).is_err());
    let s = a.direct_sum(&CMatrix::identity(2));
    assert_eq!(s.dim(), 3);
    assert_eq!(s, p);
}

#[test]
fn matrix_json_is_rows_of_pairs() {
    let m = CMatrix::from_rows(&[vec![c(1.0, 2.0), c(0.0, 0.0)], vec![c(0.0, -1.0), c(3.0, 0.0)]]).unwrap();
    let text = serde_json::to_string(&m).unwrap();
    assert_eq!(text, "[[[1.0,2.0],[0.0,0.0]],[[0.0,-1.0],[3.0,0.0]]]");
    let back: CMatrix = serde_json::from_str(&text).unwrap();
    assert_eq!(back, m);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_matches_spectral_root(seed in any::<u64>(), n in 1usize..6, scale in 0.0f64..0.45) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_skew(&mut rng, n, scale);
        let a = sqrt_one_plus_vsq(&v, 1e-13).unwrap();
        let b = spectral_sqrt_one_plus_vsq(&v).unwrap();
        prop_assert!(op_norm(&(&a - &b)) < 1e-9);
    }

    #[test]
    fn lemma_products_stay_close(seed in any::<u64>(), n in 1usize..7, eps in 0.0f64..0.05) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rank = 3;
        let mut a: Vec<CMatrix> = (0..n - 1).map(|_| random_unitary(&mut rng, rank)).collect();
        let mut prod = CMatrix::identity(rank);
        for x in &a {
            prod = x * &prod;
        }
        a.push(prod.adjoint());
        let mut p = CMatrix::identity(rank);
        for x in &a {
            let b = exp_i_hermitian(&random_hermitian(&mut rng, rank, 0.999 * eps)).unwrap();
            p = &(x * &b) * &p;
        }
        prop_assert!(p.distance_to_identity() <= ((1u64 << n) - 1) as f64 * eps + 1e-12);
    }

    #[test]
    fn skew_part_is_bounded_by_distance_to_identity(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = exp_i_hermitian(&random_hermitian(&mut rng, n, 0.5)).unwrap();
        prop_assert!(op_norm(&skew_project(&u)) <= u.distance_to_identity() + 1e-12);
    }
}
