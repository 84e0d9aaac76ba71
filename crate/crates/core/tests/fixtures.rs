use almostflat::bundle::CocycleBundle;
use almostflat::fixtures::*;
use almostflat::simplicial::{maximal_tree, presentation_from_tree};
use almostflat::transport::{loop_defect, path_transport};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const OCTANT: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[test]
fn torus_counts() {
    let x = torus_complex();
    assert_eq!((x.count_dim(0), x.count_dim(1), x.count_dim(2)), (7, 21, 14));
    assert_eq!(x.euler_characteristic(), 0);
    x.check_closed_surface().unwrap();
    let tree = maximal_tree(&x).unwrap();
    let p = presentation_from_tree(&x, &tree, 0).unwrap();
    assert_eq!((p.generators.len(), p.relations.len()), (15, 14));
}

#[test]
fn torus_covers() {
    for d in 1..=3 {
        let x = torus_cover(d).unwrap();
        assert_eq!((x.count_dim(0), x.count_dim(1), x.count_dim(2)), (7 * d, 21 * d, 14 * d));
        x.check_closed_surface().unwrap();
        assert_eq!(torus_covering_map(d).len(), 7 * d);
    }
    assert!(torus_cover(0).is_err());
}

#[test]
fn sphere_counts() {
    let s = sphere_complex(0);
    assert_eq!((s.complex.count_dim(0), s.complex.count_dim(1), s.complex.count_dim(2)), (6, 12, 8));
    let s = sphere_complex(1);
    assert_eq!((s.complex.count_dim(0), s.complex.count_dim(1), s.complex.count_dim(2)), (18, 48, 32));
    for d in 0..=4 {
        let s = sphere_complex(d);
        assert_eq!(s.complex.euler_characteristic(), 2);
        assert_eq!(s.complex.count_dim(2), 8 * 4usize.pow(d as u32));
        s.complex.check_closed_surface().unwrap();
        for &v in s.complex.vertices() {
            let p = s.position(v);
            assert!(((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn octant_oracle() {
    let [a, b, c] = OCTANT;
    assert!((girard_area(a, b, c).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    assert!((holonomy_oracle(OCTANT, 2).unwrap() - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    assert_eq!(holonomy_oracle(OCTANT, 0).unwrap(), Complex64::new(1.0, 0.0));
    assert!(holonomy_oracle([a, a, c], 1).is_err());
}

#[test]
fn spherical_areas_sum_to_the_sphere() {
    for d in 0..=3 {
        let s = sphere_complex(d);
        let total: f64 = s
            .complex
            .of_dim(2)
            .map(|f| {
                let [a, b, c] = s.oriented_triangle(f).unwrap();
                girard_area(a, b, c).unwrap()
            })
            .sum();
        assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-10, "depth {d}");
    }
}

#[test]
fn monopole_charge_zero_is_flat() {
    let s = sphere_complex(1);
    let e = monopole_bundle(&s, 0, 3).unwrap();
    assert_eq!(e, CocycleBundle::trivial(&s.complex, 1, 3));
    assert!(monopole_bundle(&s, MAX_CHARGE + 1, 2).is_err());
}

#[test]
fn oracle_matches_transport_on_random_faces() {
    let s = sphere_complex(3);
    let faces: Vec<_> = s.complex.of_dim(2).cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for q in [-2, 1, 3] {
        let e = monopole_bundle(&s, q, 2).unwrap();
        for _ in 0..100 {
            let f = &faces[rng.gen_range(0..faces.len())];
            let l = s.complex.oriented_loop(f).unwrap();
            let t = path_transport(&e, &l).unwrap().matrix.get(0, 0);
            let h = holonomy_oracle(s.oriented_triangle(f).unwrap(), q).unwrap();
            assert!((t - h).norm() < 1e-8);
        }
    }
}

#[test]
fn face_defects_within_curvature_bound() {
    for d in 0..=2 {
        let s = sphere_complex(d);
        for q in -2..=2 {
            let e = monopole_bundle(&s, q, 2).unwrap();
            for f in s.complex.of_dim(2) {
                let [a, b, c] = s.oriented_triangle(f).unwrap();
                let bound = q.abs() as f64 * girard_area(a, b, c).unwrap() / 2.0;
                assert!(loop_defect(&e, &s.complex.oriented_loop(f).unwrap()).unwrap() <= bound + 1e-12);
            }
        }
    }
}

#[test]
fn monopole_audit_scales_with_mesh() {
    let audits: Vec<f64> = (0..=3).map(|d| monopole_bundle(&sphere_complex(d), 1, 4).unwrap().audit()).collect();
    let factors: Vec<f64> = audits.windows(2).map(|w| w[0] / w[1]).collect();
    println!("monopole audits {audits:.5?}, factors {factors:.3?}");
    assert!((2.5..3.5).contains(&factors[0]));
    for f in &factors[1..] {
        assert!((3.5..=4.5).contains(f));
    }
    assert!(factors[2] > factors[1]);
}
