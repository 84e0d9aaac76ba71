use std::f64::consts::{PI, SQRT_2};
use std::io::Write;
use std::time::{Duration, Instant};

use almostflat::chern_karea::chern_number;
use almostflat::fixtures::*;
use almostflat::matrixcore::*;
use almostflat::quasirep::{bundle_to_rep, clock_shift, rep_to_bundle, AlmostRep};
use almostflat::sampled::{unitary_extend, BoundaryMap, SampledMap};
use almostflat::simplicial::{barycentric_subdivide, Complex, SimplicialPath};
use almostflat::transport::{hc_constants, loop_defect, ROUNDING_SLACK};
use almostflat::trivialize::{extend_skeleton, iso_between, trivialize_contractible};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LATTICE_DEPTH: u32 = 4;

/// Spread allowed between the largest and smallest per-rank extension constant.
const EXTENSION_SPREAD: f64 = 0.25;
/// Pinned constant for `audit ≤ C·2 sin(π/k)` on the clock and shift torus bundles.
const CLOCK_SHIFT_AUDIT_C: f64 = 1.0;
/// Pinned constant for `closeness ≤ C·defect` after a rep → bundle → rep round trip.
const ROUND_TRIP_C: f64 = 1.0;
/// Pinned constant for `chart audit ≤ C·ε` of contractible trivializations.
const TRIVIALIZATION_C: f64 = 10.0;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn near_identity(r: &mut ChaCha8Rng, rank: usize, eps: f64) -> CMatrix {
    let norm = eps * r.gen_range(0.0..1.0);
    exp_i_hermitian(&random_hermitian(r, rank, norm)).unwrap()
}

fn unitary_map(r: &mut ChaCha8Rng, dim: usize, rank: usize) -> SampledMap {
    let amplitude = r.gen_range(0.01..0.2);
    let w = random_unitary(r, rank);
    let ks: Vec<CMatrix> = (0..=dim).map(|_| random_hermitian(r, rank, amplitude)).collect();
    SampledMap::from_fn(dim, LATTICE_DEPTH, |_, c| {
        let mut h = CMatrix::zeros(rank);
        for (x, k) in c.iter().zip(&ks) {
            h = &h + &k.scale(*x);
        }
        &w * &exp_i_hermitian(&h).unwrap()
    })
}

fn triangle_boundary() -> SimplicialPath {
    SimplicialPath::new(vec![0, 1, 2, 0])
}

fn two_simplex_bound() -> Outcome {
    let x = full_simplex(2);
    let mut worst: f64 = 0.0;
    for seed in 0..1000u64 {
        let mut r = rng(seed);
        let rank = [1, 2, 4, 8][seed as usize % 4];
        let amplitude = r.gen_range(0.0..0.1 / (2.0 * SQRT_2));
        let e = random_flat_bundle(&x, rank, LATTICE_DEPTH, amplitude, &mut r).unwrap();
        let eps = e.audit();
        ensure(eps <= 0.1, || format!("seed {seed}: audit {eps} above 0.1"))?;
        let defect = loop_defect(&e, &triangle_boundary()).unwrap();
        ensure(defect <= 7.0 * SQRT_2 * eps + ROUNDING_SLACK, || {
            format!("seed {seed}: defect {defect} exceeds 7√2·{eps}")
        })?;
        if eps > 0.0 {
            worst = worst.max(defect / eps);
        }
    }
    Ok(format!("1000 trials, worst defect/audit {worst:.3} against 7√2 = {:.3}", 7.0 * SQRT_2))
}

fn product_perturbation() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 2..=6usize {
        for trial in 0..1000u64 {
            let mut r = rng(1000 * n as u64 + trial);
            let rank = r.gen_range(1..=4);
            let eps = r.gen_range(1e-4..0.05);
            let mut a: Vec<CMatrix> = (0..n - 1).map(|_| random_unitary(&mut r, rank)).collect();
            let rest = a.iter().fold(CMatrix::identity(rank), |acc, m| m * &acc);
            a.push(rest.adjoint());
            let mut p = CMatrix::identity(rank);
            for ai in &a {
                let bi = near_identity(&mut r, rank, eps);
                ensure(op_norm(&(&bi - &CMatrix::identity(rank))) < eps, || "perturbation too large".into())?;
                p = &(ai * &bi) * &p;
            }
            let d = op_norm(&(&p - &CMatrix::identity(rank)));
            let bound = (2f64.powi(n as i32) - 1.0) * eps;
            ensure(d < bound, || format!("n = {n}, trial {trial}: ‖P − 1‖ = {d} ≥ {bound}"))?;
            worst = worst.max(d / bound);
        }
    }
    Ok(format!("5000 trials, worst ‖P − 1‖/((2ⁿ−1)ε) {worst:.3}"))
}

fn lipschitz_products() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..500u64 {
        let mut r = rng(seed);
        let dim = r.gen_range(1..=3);
        let rank = r.gen_range(1..=4);
        let f = unitary_map(&mut r, dim, rank);
        let g = unitary_map(&mut r, dim, rank);
        let eps = f.lipschitz_estimate().max(g.lipschitz_estimate());
        let prod = f.pointwise_product(&g).unwrap().lipschitz_estimate();
        ensure(prod <= 3.0 * eps + 1e-12, || format!("seed {seed}: product {prod} above 3·{eps}"))?;
        if eps > 0.0 {
            worst = worst.max(prod / eps);
        }
    }
    Ok(format!("500 pairs, worst product/ε {worst:.3}"))
}

fn random_boundary(r: &mut ChaCha8Rng, dim: usize, rank: usize) -> BoundaryMap {
    let w = random_unitary(r, rank);
    let amplitude = r.gen_range(0.01..0.1);
    let ks: Vec<CMatrix> = (0..=dim).map(|_| random_hermitian(r, rank, amplitude)).collect();
    let m = LATTICE_DEPTH as f64;
    BoundaryMap::from_fn(dim, LATTICE_DEPTH, |n| {
        let mut h = CMatrix::zeros(rank);
        for (x, k) in n.iter().zip(&ks) {
            h = &h + &k.scale(*x as f64 / m);
        }
        &w * &exp_i_hermitian(&h).unwrap()
    })
}

fn unitary_extension() -> Outcome {
    let mut per_rank = Vec::new();
    for rank in [1usize, 2, 4, 8] {
        let mut c_meas: f64 = 0.0;
        for seed in 0..200u64 {
            let mut r = rng(seed * 16 + rank as u64);
            let dim = if seed % 2 == 0 { 2 } else { 3 };
            let b = random_boundary(&mut r, dim, rank);
            let f = unitary_extend(&b).map_err(|e| format!("rank {rank}, seed {seed}: {e}"))?;
            let input = b.lipschitz_estimate();
            if input > 0.0 {
                c_meas = c_meas.max(f.lipschitz_estimate() / input);
            }
        }
        per_rank.push(c_meas);
    }
    let (lo, hi) = per_rank.iter().fold((f64::INFINITY, 0f64), |(lo, hi), c| (lo.min(*c), hi.max(*c)));
    let spread = (hi - lo) / hi;
    ensure(spread < EXTENSION_SPREAD, || format!("C_meas per rank {per_rank:.3?}, spread {spread:.3}"))?;
    Ok(format!("C_meas per rank {per_rank:.3?}, spread {:.1}%", 100.0 * spread))
}

fn random_skew(r: &mut ChaCha8Rng, rank: usize, norm: f64) -> CMatrix {
    random_hermitian(r, rank, norm).scale_complex(num_complex::Complex64::new(0.0, 1.0))
}

fn functional_calculus() -> Outcome {
    let (mut sqrt_gap, mut g_res, mut polar_res): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for seed in 0..500u64 {
        let mut r = rng(seed);
        let rank = r.gen_range(1..=8);
        let norm = r.gen_range(0.0..0.45);
        let v = random_skew(&mut r, rank, norm);
        let series = sqrt_one_plus_vsq(&v, 1e-13).unwrap();
        let spectral = spectral_sqrt_one_plus_vsq(&v).unwrap();
        sqrt_gap = sqrt_gap.max(op_norm(&(&series - &spectral)));
        g_res = g_res.max(unitarize_g(&v).unwrap().unitarity_residual());
        let noise = CMatrix::from_fn(rank, |_, _| num_complex::Complex64::new(r.gen_range(-0.05..0.05), r.gen_range(-0.05..0.05)));
        let x = &random_unitary(&mut r, rank) + &noise;
        polar_res = polar_res.max(polar_project(&x).unwrap().unitarity_residual());
    }
    ensure(sqrt_gap <= 1e-9, || format!("series and spectral roots differ by {sqrt_gap:e}"))?;
    ensure(g_res <= 1e-9, || format!("unitarize_g residual {g_res:e}"))?;
    ensure(polar_res <= 1e-10, || format!("polar_project residual {polar_res:e}"))?;
    Ok(format!("root gap {sqrt_gap:.1e}, g residual {g_res:.1e}, polar residual {polar_res:.1e}"))
}

fn monopole_fixture() -> Outcome {
    let s = sphere_complex(2);
    let mut violations = 0;
    for q in -2..=2 {
        let e = monopole_bundle(&s, q, LATTICE_DEPTH).unwrap();
        let c = chern_number(&e).map_err(|e| e.to_string())?;
        ensure(c == q as i64, || format!("charge {q}: chern {c}"))?;
        for f in s.complex.of_dim(2) {
            let [a, b, cc] = s.oriented_triangle(f).unwrap();
            let bound = q.abs() as f64 * girard_area(a, b, cc).unwrap() / 2.0;
            if loop_defect(&e, &s.complex.oriented_loop(f).unwrap()).unwrap() > bound + 1e-12 {
                violations += 1;
            }
        }
    }
    ensure(violations == 0, || format!("{violations} faces exceed the curvature bound"))?;
    let a1 = monopole_bundle(&sphere_complex(1), 1, LATTICE_DEPTH).unwrap().audit();
    let a2 = monopole_bundle(&s, 1, LATTICE_DEPTH).unwrap().audit();
    let factor = a1 / a2;
    ensure((3.5..=4.5).contains(&factor), || format!("audit factor {factor:.3}"))?;
    Ok(format!("chern = q for q ∈ −2..2, 0 face violations, audit {a1:.4} → {a2:.4} (factor {factor:.3})"))
}

fn clock_shift_probe() -> Outcome {
    let (x, tree, p) = torus_presentation();
    let mut audits = Vec::new();
    for k in [6usize, 12, 24, 48] {
        let cs = clock_shift(k).unwrap();
        let target = 2.0 * (PI / k as f64).sin();
        ensure((cs.defect() - target).abs() <= 1e-10, || format!("k = {k}: defect {}", cs.defect()))?;
        let e = rep_to_bundle(&torus_rep(&cs, &p).unwrap(), &x, &tree, &p).map_err(|e| e.to_string())?;
        let c = chern_number(&e).map_err(|e| e.to_string())?;
        ensure(c == 1, || format!("k = {k}: chern {c}"))?;
        let audit = e.audit();
        ensure(audit <= CLOCK_SHIFT_AUDIT_C * target, || format!("k = {k}: audit {audit} above C·{target}"))?;
        audits.push(audit);
    }
    let ratio = audits[3] / audits[2];
    ensure(ratio <= 0.55, || format!("audit(48)/audit(24) = {ratio:.3}"))?;
    Ok(format!("chern 1 at every k, audits {audits:.4?}, audit(48)/audit(24) = {ratio:.3}"))
}

fn round_trips() -> Outcome {
    let s = sphere_complex(2);
    let e = monopole_bundle(&s, 1, LATTICE_DEPTH).unwrap();
    let (sub, fine) = e.to_subdivision().map_err(|e| e.to_string())?;
    let back = fine.from_subdivision(&s.complex, &sub).map_err(|e| e.to_string())?;
    let (_, delta) = hc_constants(2).unwrap();
    iso_between(&e, &back, delta).map_err(|e| format!("subdivision: {e}"))?;

    let (x, tree, p) = torus_presentation();
    let phi = torus_rep(&clock_shift(24).unwrap(), &p).unwrap();
    let again = bundle_to_rep(&rep_to_bundle(&phi, &x, &tree, &p).map_err(|e| e.to_string())?, &p).unwrap();
    let closeness = again.closeness(&phi).unwrap();
    ensure(closeness <= ROUND_TRIP_C * phi.defect(), || format!("rep round trip closeness {closeness}"))?;

    let four = full_simplex(4);
    let low = random_flat_bundle(&four, 2, LATTICE_DEPTH, 0.002, &mut rng(4))
        .unwrap()
        .restrict_to(&four.skeleton(2))
        .unwrap();
    let up = extend_skeleton(&low, &four, 2).map_err(|e| e.to_string())?;
    ensure(up.restrict_to(&four.skeleton(2)).unwrap() == low, || "extension changed the 2-skeleton".into())?;
    Ok(format!(
        "subdivision iso found (back audit {:.4}), rep closeness {closeness:.1e} vs defect {:.3}, restriction bit-exact",
        back.audit(),
        phi.defect()
    ))
}

fn uniqueness() -> Outcome {
    let (x, tree, p) = torus_presentation();
    let phi = torus_rep(&clock_shift(24).unwrap(), &p).unwrap();
    let mut moved = phi.clone();
    let mut r = rng(9);
    let h = random_hermitian(&mut r, 24, 1.0);
    let norm = op_norm(&h);
    let t = 2.0 * (0.5e-3f64).asin() / norm;
    moved.images[0] = &moved.images[0] * &exp_i_hermitian(&h.scale(t)).unwrap();
    let closeness = phi.closeness(&moved).unwrap();
    ensure((closeness - 1e-3).abs() < 1e-9, || format!("perturbation closeness {closeness}"))?;
    let e1 = rep_to_bundle(&phi, &x, &tree, &p).map_err(|e| e.to_string())?;
    let e2 = rep_to_bundle(&moved, &x, &tree, &p).map_err(|e| e.to_string())?;
    let (_, delta) = hc_constants(2).unwrap();
    let iso = iso_between(&e1, &e2, delta).map_err(|e| format!("close reps: {e}"))?;
    let trivial = rep_to_bundle(&AlmostRep::trivial(p.clone(), 24), &x, &tree, &p).unwrap();
    ensure(chern_number(&trivial).unwrap() == 0, || "trivial bundle has non-zero chern".into())?;
    ensure(iso_between(&trivial, &e1, delta).is_err(), || "chern 0 and chern 1 bundles were matched".into())?;
    Ok(format!("iso at closeness {closeness:.1e} (conjugator audit {:.2e}), chern 0 vs 1 refused", iso.lipschitz()))
}

fn trivialization() -> Outcome {
    let complexes: [(&str, Complex); 3] = [
        ("Δ²", full_simplex(2)),
        ("Δ³", full_simplex(3)),
        ("S(Δ²)", barycentric_subdivide(&full_simplex(2)).complex),
    ];
    let mut worst: f64 = 0.0;
    for (name, x) in &complexes {
        for seed in 0..5u64 {
            let e = random_flat_bundle(x, 2, LATTICE_DEPTH, 0.005 / (2.0 * SQRT_2), &mut rng(seed)).unwrap();
            ensure(e.audit() <= 0.005, || format!("{name}: audit {}", e.audit()))?;
            let g = trivialize_contractible(&e).map_err(|err| format!("{name}, seed {seed}: {err}"))?;
            let lip = g.lipschitz();
            ensure(lip <= TRIVIALIZATION_C * 0.005, || format!("{name}, seed {seed}: chart audit {lip}"))?;
            worst = worst.max(lip / 0.005);
        }
    }
    let c = circle_bundle(5, PI, LATTICE_DEPTH).unwrap();
    ensure(trivialize_contractible(&c).is_err(), || "circle with holonomy −1 was trivialized".into())?;
    Ok(format!("all charts built, worst chart audit/0.005 {worst:.2}, holonomy −1 refused"))
}

type Criterion = (&'static str, fn() -> Outcome, u64);

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 10] = [
        ("two-simplex transport bound", two_simplex_bound, 5),
        ("product perturbation", product_perturbation, 5),
        ("product of Lipschitz maps", lipschitz_products, 5),
        ("unitary extension constant", unitary_extension, 30),
        ("functional calculus", functional_calculus, 10),
        ("monopole fixture", monopole_fixture, 20),
        ("clock/shift K-area probe", clock_shift_probe, 60),
        ("round trips", round_trips, 60),
        ("uniqueness", uniqueness, 30),
        ("trivialization", trivialization, 20),
    ];
    let mut failures = Vec::new();
    let mut out = std::io::stdout().lock();
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if elapsed <= Duration::from_secs(*limit) {
                Ok(msg)
            } else {
                Err(format!("took {elapsed:.1?}, limit {limit} s"))
            }
        });
        let (tag, msg) = match &outcome {
            Ok(m) => ("PASS", m),
            Err(m) => ("FAIL", m),
        };
        writeln!(out, "{tag} criterion {:>2} {name} ({elapsed:.2?}): {msg}", i + 1).unwrap();
        if outcome.is_err() {
            failures.push(i + 1);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
