use almostflat::bundle::CocycleBundle;
use almostflat::fixtures::{
    full_simplex, girard_area, holonomy_oracle, monopole_bundle, random_flat_bundle, sphere_complex, torus_complex,
    GAUGE_POLE,
};
use almostflat::matrixcore::CMatrix;
use almostflat::simplicial::{barycentric_subdivide, synthesize_witness, ContractionWitness, Move, SimplicialPath};
use almostflat::transport::*;
use almostflat::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn triangle_loop() -> SimplicialPath {
    SimplicialPath::new(vec![0, 1, 2, 0])
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

#[test]
fn identity_cocycle_transports_trivially() {
    let x = torus_complex();
    let e = CocycleBundle::trivial(&x, 2, 4);
    assert_eq!(edge_transport(&e, 0, 1).unwrap(), CMatrix::identity(2));
    let l = x.oriented_loop(x.of_dim(2).next().unwrap()).unwrap();
    assert_eq!(loop_defect(&e, &l).unwrap(), 0.0);
    assert!(matches!(edge_transport(&e, 0, 99), Err(Error::NotASimplex(_))));
}

#[test]
fn reversal_inverts() {
    let x = full_simplex(3);
    for seed in 0..500 {
        let mut r = rng(seed);
        let rank = [1, 2, 3, 4][seed as usize % 4];
        let e = random_flat_bundle(&x, rank, 2, 0.3, &mut r).unwrap();
        let (a, b) = (r.gen_range(0..4), r.gen_range(0..4));
        let there = edge_transport(&e, a, b).unwrap();
        let back = edge_transport(&e, b, a).unwrap();
        assert!((&back * &there).distance_to_identity() <= 1e-9);
    }
}

#[test]
fn short_paths() {
    let e = random_flat_bundle(&full_simplex(2), 3, 4, 0.1, &mut rng(1)).unwrap();
    let single = path_transport(&e, &SimplicialPath::new(vec![1])).unwrap();
    assert_eq!(single.matrix, CMatrix::identity(3));
    let there_and_back = path_transport(&e, &SimplicialPath::new(vec![0, 2, 0])).unwrap();
    assert!(there_and_back.matrix.distance_to_identity() <= 1e-12);
    assert!(path_transport(&e, &SimplicialPath::new(vec![0, 5])).is_err());
    assert!(loop_defect(&e, &SimplicialPath::new(vec![0, 1])).is_err());
}

#[test]
fn two_simplex_boundary_bound() {
    let x = full_simplex(2);
    let bound = 7.0 * 2f64.sqrt() * 0.05;
    assert!((bound - 0.494_975).abs() < 1e-6);
    for seed in 0..200 {
        let e = random_flat_bundle(&x, 2, 4, 0.05 / (2.0 * 2f64.sqrt()), &mut rng(seed)).unwrap();
        assert!(e.audit() <= 0.05);
        assert!(loop_defect(&e, &triangle_loop()).unwrap() <= bound);
        assert!(loop_defect(&e, &triangle_loop()).unwrap() <= 7.0 * 2f64.sqrt() * e.audit());
    }
}

#[test]
fn monopole_edges_match_the_pole_gauge() {
    let s = sphere_complex(1);
    let pole = unit(GAUGE_POLE);
    for q in [-2, 1, 3] {
        let e = monopole_bundle(&s, q, 4).unwrap();
        for edge in s.complex.of_dim(1) {
            let [a, b] = [edge.vertices()[0], edge.vertices()[1]];
            let t = edge_transport(&e, a, b).unwrap().get(0, 0);
            assert!((t.norm() - 1.0).abs() < 1e-12);
            let area = girard_area(pole, s.position(a), s.position(b)).unwrap();
            let oracle = Complex64::from_polar(1.0, q as f64 / 2.0 * area);
            assert!((t - oracle).norm() < 1e-8, "edge {edge:?}: {t} vs {oracle}");
        }
    }
}

#[test]
fn monopole_triangles_match_the_area_oracle() {
    for d in [0, 1, 2] {
        let s = sphere_complex(d);
        for q in -2..=2 {
            let e = monopole_bundle(&s, q, 2).unwrap();
            for face in s.complex.of_dim(2) {
                let l = s.complex.oriented_loop(face).unwrap();
                let h = holonomy_oracle(s.oriented_triangle(face).unwrap(), q).unwrap();
                let defect = loop_defect(&e, &l).unwrap();
                assert!((defect - (h - 1.0).norm()).abs() < 1e-8);
                let t = path_transport(&e, &l).unwrap().matrix.get(0, 0);
                assert!((t - h).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn constants() {
    let s2 = 2f64.sqrt();
    assert!((hc_constants(1).unwrap().0 - 9.899_494_9).abs() < 1e-7);
    assert!((hc_constants(2).unwrap().0 - 29.698_484_8).abs() < 1e-7);
    assert!((hc_constants(3).unwrap().0 - 63.0 * s2).abs() < 1e-9);
    for n in 1..8 {
        let (c, d) = hc_constants(n).unwrap();
        assert!((c - 3f64.powi(n as i32 - 1) * 7.0 * s2).abs() < 1e-6 * c);
        if n > 1 {
            assert!((d - 1.0 / hc_constants(n - 1).unwrap().0).abs() < 1e-15);
        }
    }
    assert!((hc_constants(1).unwrap().1 - 1.0 / (7.0 * s2)).abs() < 1e-15);
    assert!(matches!(hc_constants(0), Err(Error::Precondition(_))));
}

#[test]
fn witnessed_triangle() {
    let x = full_simplex(2);
    let w = ContractionWitness { moves: vec![Move::TriangleDelete { position: 0 }] };
    let e = random_flat_bundle(&x, 3, 4, 0.01 / (2.0 * 2f64.sqrt()), &mut rng(2)).unwrap();
    let r = verify_witnessed_bound(&e, &triangle_loop(), &w).unwrap();
    assert_eq!(r.complexity, 1);
    assert!(r.pass);
    assert!(r.bound <= 7.0 * 2f64.sqrt() * 0.01);
    let id = CocycleBundle::trivial(&x, 2, 4);
    let r = verify_witnessed_bound(&id, &triangle_loop(), &w).unwrap();
    assert_eq!((r.defect, r.bound, r.pass), (0.0, 0.0, true));
}

#[test]
fn witness_failures() {
    let x = full_simplex(2);
    let e = random_flat_bundle(&x, 1, 4, 0.2, &mut rng(3)).unwrap();
    let w = ContractionWitness { moves: vec![Move::TriangleDelete { position: 0 }] };
    assert!(matches!(verify_witnessed_bound(&e, &triangle_loop(), &w), Err(Error::Threshold { .. })));
    let bad = ContractionWitness { moves: vec![Move::BacktrackDelete { position: 0 }] };
    assert!(matches!(verify_witnessed_bound(&e, &triangle_loop(), &bad), Err(Error::InvalidWitness { .. })));
}

#[test]
fn subdivided_disk_boundary() {
    let sd = barycentric_subdivide(&full_simplex(2)).complex;
    let l = SimplicialPath::new(vec![0, 3, 1, 5, 2, 4, 0]);
    let w = synthesize_witness(&sd, &l).unwrap();
    let mut worst: f64 = 0.0;
    let mut complexity = 0;
    for seed in 0..200 {
        let e = random_flat_bundle(&sd, 2, 2, 0.001 / (2.0 * 2f64.sqrt()), &mut rng(seed)).unwrap();
        let r = verify_witnessed_bound(&e, &l, &w).unwrap();
        assert!(r.pass);
        worst = worst.max(r.defect / r.audit);
        complexity = r.complexity;
    }
    let (c, _) = witness_constants(complexity);
    println!("subdivided triangle boundary: complexity {complexity}, worst defect/audit {worst:.3}, c = {c:.1}");
}

fn random_path(r: &mut ChaCha8Rng, n: usize, len: usize) -> SimplicialPath {
    let mut v = vec![r.gen_range(0..n)];
    for _ in 0..len {
        let last = *v.last().unwrap();
        let mut next = r.gen_range(0..n);
        if next == last {
            next = (next + 1) % n;
        }
        v.push(next);
    }
    SimplicialPath::new(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn concatenation_multiplies(seed in any::<u64>(), l1 in 0usize..6, l2 in 0usize..6) {
        let mut r = rng(seed);
        let e = random_flat_bundle(&full_simplex(3), 2, 2, 0.3, &mut r).unwrap();
        let g1 = random_path(&mut r, 4, l1);
        let mut g2 = random_path(&mut r, 4, l2);
        let mut v = vec![g1.end().unwrap()];
        v.extend_from_slice(&g2.vertices()[1..]);
        g2 = SimplicialPath::new(v);
        let whole = path_transport(&e, &g1.concat(&g2).unwrap()).unwrap().matrix;
        let split = &path_transport(&e, &g2).unwrap().matrix * &path_transport(&e, &g1).unwrap().matrix;
        prop_assert!((&whole - &split).frobenius_norm() <= 1e-13);
    }

    #[test]
    fn backtracks_do_not_matter(seed in any::<u64>(), at in 0usize..5) {
        let mut r = rng(seed);
        let e = random_flat_bundle(&full_simplex(3), 3, 2, 0.3, &mut r).unwrap();
        let g = random_path(&mut r, 4, 4);
        let mut v = g.vertices().to_vec();
        let a = v[at];
        let b = (a + 1 + r.gen_range(0..3)) % 4;
        v.splice(at + 1..at + 1, [b, a]);
        let with = path_transport(&e, &SimplicialPath::new(v)).unwrap().matrix;
        let without = path_transport(&e, &g).unwrap().matrix;
        prop_assert!((&with - &without).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn transports_are_unitary(seed in any::<u64>()) {
        let mut r = rng(seed);
        let e = random_flat_bundle(&full_simplex(3), 4, 2, 0.3, &mut r).unwrap();
        let g = random_path(&mut r, 4, 8);
        prop_assert!(path_transport(&e, &g).unwrap().matrix.unitarity_residual() <= 1e-8);
    }

    #[test]
    fn two_simplex_bound_any_rank(seed in any::<u64>(), rank in 1usize..=8, amp in 0.0f64..0.25) {
        let e = random_flat_bundle(&full_simplex(2), rank, 4, amp, &mut rng(seed)).unwrap();
        let eps = e.audit();
        prop_assume!(eps <= 1.0 / 2f64.sqrt());
        prop_assert!(loop_defect(&e, &triangle_loop()).unwrap() <= 7.0 * 2f64.sqrt() * eps + ROUNDING_SLACK);
    }
}
