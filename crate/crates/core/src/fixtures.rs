//! Reference complexes and bundles with known holonomy.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::bundle::CocycleBundle;
use crate::error::{Error, Result};
use crate::matrixcore::{exp_i_hermitian, op_norm, CMatrix};
use crate::quasirep::AlmostRep;
use crate::simplicial::{maximal_tree, presentation_from_tree, Complex, Letter, Presentation, Simplex, Tree, Word};

pub type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: Vec3) -> Vec3 {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn combination(points: &[Vec3], weights: &[f64]) -> Vec3 {
    let mut out = [0.0; 3];
    for (p, w) in points.iter().zip(weights) {
        for k in 0..3 {
            out[k] += w * p[k];
        }
    }
    out
}

// ---------------------------------------------------------------- torus

/// Planar step of a label difference on the `n`-vertex torus
/// `ℤ²/⟨(n/7)·(1,3), (−2,1)⟩`, whose vertex `(x, y)` has label `x + 2y mod n`.
fn torus_step(n: usize, diff: usize) -> (i64, i64) {
    match diff % n {
        1 => (1, 0),
        2 => (0, 1),
        3 => (1, 1),
        d if d == n - 1 => (-1, 0),
        d if d == n - 2 => (0, -1),
        d if d == n - 3 => (-1, -1),
        d => panic!("labels {d} apart are not adjacent on the torus"),
    }
}

/// The `7d`-vertex torus, a `d`-fold cover of the minimal 7-vertex torus
/// via `i ↦ i mod 7`. Triangles `{i, i+1, i+3}` and `{i, i+2, i+3}` mod `7d`,
/// oriented by the planar lift.
pub fn torus_cover(d: usize) -> Result<Complex> {
    if d == 0 {
        return Err(Error::Precondition("cover degree must be positive".into()));
    }
    let n = 7 * d;
    let mut faces = Vec::new();
    for i in 0..n {
        faces.push(Simplex::new(vec![i, (i + 1) % n, (i + 3) % n])?);
        faces.push(Simplex::new(vec![i, (i + 2) % n, (i + 3) % n])?);
    }
    let mut orientation = BTreeMap::new();
    for f in &faces {
        let v = f.vertices();
        let a = torus_step(n, v[1] + n - v[0]);
        let b = torus_step(n, v[2] + n - v[0]);
        let sign = if a.0 * b.1 - a.1 * b.0 > 0 { 1 } else { -1 };
        orientation.insert(f.clone(), sign);
    }
    Complex::from_simplices(faces).with_orientation(orientation)
}

/// The 7-vertex torus: 7 vertices, 21 edges, 14 oriented triangles.
pub fn torus_complex() -> Complex {
    torus_cover(1).expect("degree one")
}

/// The vertex map of the `d`-fold cover onto the 7-vertex torus.
pub fn torus_covering_map(d: usize) -> BTreeMap<usize, usize> {
    (0..7 * d).map(|i| (i, i % 7)).collect()
}

/// Spanning tree and edge presentation of the 7-vertex torus, based at 0.
pub fn torus_presentation() -> (Complex, Tree, Presentation) {
    let x = torus_complex();
    let tree = maximal_tree(&x).expect("torus is connected");
    let p = presentation_from_tree(&x, &tree, 0).expect("vertex 0 exists");
    (x, tree, p)
}

fn power(generator: usize, exponent: i64) -> Word {
    let l = if exponent >= 0 { Letter::new(generator) } else { Letter::inv(generator) };
    vec![l; exponent.unsigned_abs() as usize]
}

/// Words `u^a v^b` in `⟨u, v | [u, v]⟩` for the generators of an edge
/// presentation of the 7-vertex torus, where the planar displacement of the
/// generator loop is `a·(1,3) + b·(2,−1)`. With this basis the clock and
/// shift pair gives Chern number 1.
pub fn torus_substitution(p: &Presentation) -> Result<Vec<Word>> {
    let mut out = Vec::with_capacity(p.generators.len());
    for l in &p.generator_loops {
        let (mut x, mut y) = (0i64, 0i64);
        for w in l.vertices().windows(2) {
            let (dx, dy) = torus_step(7, w[1] + 7 - w[0]);
            x += dx;
            y += dy;
        }
        if (x + 2 * y) % 7 != 0 || (y - 3 * x) % 7 != 0 {
            return Err(Error::InvalidPath("generator loop is not closed on the 7-vertex torus".into()));
        }
        let mut word = power(0, (x + 2 * y) / 7);
        word.extend(power(1, (3 * x - y) / 7));
        out.push(word);
    }
    Ok(out)
}

/// Pulls a representation of `⟨u, v | [u, v]⟩` back to the edge
/// presentation of the 7-vertex torus.
pub fn torus_rep(phi: &AlmostRep, p: &Presentation) -> Result<AlmostRep> {
    phi.substitute(p, &torus_substitution(p)?)
}

// ---------------------------------------------------------------- sphere

/// A triangulated unit sphere with vertex positions indexed by label.
#[derive(Debug, Clone, PartialEq)]
pub struct Sphere {
    pub complex: Complex,
    pub positions: Vec<Vec3>,
}

impl Sphere {
    pub fn position(&self, v: usize) -> Vec3 {
        self.positions[v]
    }

    /// Normalized barycenter of a simplex.
    pub fn barycenter(&self, s: &Simplex) -> Vec3 {
        let pts: Vec<Vec3> = s.vertices().iter().map(|&v| self.positions[v]).collect();
        let w = vec![1.0; pts.len()];
        normalize(combination(&pts, &w))
    }

    /// Projection of the point with barycentric coordinates `coords` on `s`.
    pub fn point(&self, s: &Simplex, coords: &[f64]) -> Vec3 {
        let pts: Vec<Vec3> = s.vertices().iter().map(|&v| self.positions[v]).collect();
        normalize(combination(&pts, coords))
    }

    /// Vertex positions of a triangle in its oriented order.
    pub fn oriented_triangle(&self, face: &Simplex) -> Result<[Vec3; 3]> {
        let l = self.complex.oriented_loop(face)?;
        let v = l.vertices();
        Ok([self.positions[v[0]], self.positions[v[1]], self.positions[v[2]]])
    }
}

/// The octahedron (`0:+x, 1:−x, 2:+y, 3:−y, 4:+z, 5:−z`) subdivided `d`
/// times at edge midpoints, vertices pushed to the unit sphere, triangles
/// oriented by the outward normal.
pub fn sphere_complex(d: usize) -> Sphere {
    let mut positions: Vec<Vec3> = vec![
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for x in [0, 1] {
        for y in [2, 3] {
            for z in [4, 5] {
                faces.push([x, y, z]);
            }
        }
    }
    for _ in 0..d {
        let mut midpoints: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut mid = |a: usize, b: usize, positions: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                positions.push(normalize(combination(&[positions[a], positions[b]], &[1.0, 1.0])));
                positions.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut positions);
            let bc = mid(b, c, &mut positions);
            let ca = mid(c, a, &mut positions);
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        faces = next;
    }
    let mut orientation = BTreeMap::new();
    let simplices: Vec<Simplex> = faces
        .iter()
        .map(|f| {
            let s = Simplex::new(f.to_vec()).expect("distinct vertices");
            let v = s.vertices();
            let det = dot(positions[v[0]], cross(positions[v[1]], positions[v[2]]));
            orientation.insert(s.clone(), if det > 0.0 { 1 } else { -1 });
            s
        })
        .collect();
    let complex = Complex::from_simplices(simplices)
        .with_orientation(orientation)
        .expect("octahedral subdivision is an oriented surface");
    Sphere { complex, positions }
}

/// Signed solid angle of the geodesic triangle `(a, b, c)`, positive when
/// counterclockwise seen from outside.
pub fn solid_angle(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    2.0 * dot(a, cross(b, c)).atan2(1.0 + dot(a, b) + dot(b, c) + dot(c, a))
}

/// Largest monopole charge accepted by `monopole_bundle`.
pub const MAX_CHARGE: i32 = 4;

/// Generic reference direction for the chart gauge, never antipodal to a
/// lattice point of the subdivided octahedra. Not normalized.
pub const GAUGE_POLE: Vec3 = [0.271_828_182_8, 0.577_215_664_9, 0.770_245_917_4];

/// Rank-one bundle on a triangulated sphere with curvature `q/2` times the
/// area form. Each simplex is trivialized by parallel transport from its
/// barycenter along great circles; charts are written in the gauge of
/// transport from a fixed pole, so that the barycenter value is 1 and
/// transport around a triangle is `exp(i·q/2·area)`.
pub fn monopole_bundle(sphere: &Sphere, q: i32, depth: u32) -> Result<CocycleBundle> {
    if q.abs() > MAX_CHARGE {
        return Err(Error::Precondition(format!("charge {q} outside ±{MAX_CHARGE}")));
    }
    let pole = normalize(GAUGE_POLE);
    let kappa = q as f64 / 2.0;
    CocycleBundle::try_from_charts(&sphere.complex, 1, depth, |s, coords| {
        let b = sphere.barycenter(s);
        let x = sphere.point(s, coords);
        Ok(CMatrix::scalar(Complex64::from_polar(1.0, kappa * solid_angle(pole, b, x))))
    })
}

/// Spherical excess of a geodesic triangle by Girard's theorem, signed by
/// orientation.
pub fn girard_area(a: Vec3, b: Vec3, c: Vec3) -> Result<f64> {
    let corner = |p: Vec3, q: Vec3, r: Vec3| -> Result<f64> {
        let u = cross(p, q);
        let w = cross(p, r);
        let (nu, nw) = (dot(u, u).sqrt(), dot(w, w).sqrt());
        if nu < 1e-12 || nw < 1e-12 {
            return Err(Error::Precondition("degenerate spherical triangle".into()));
        }
        Ok((dot(u, w) / (nu * nw)).clamp(-1.0, 1.0).acos())
    };
    let excess = corner(a, b, c)? + corner(b, c, a)? + corner(c, a, b)? - PI;
    let sign = dot(a, cross(b, c));
    if sign.abs() < 1e-15 {
        return Err(Error::Precondition("degenerate spherical triangle".into()));
    }
    Ok(excess * sign.signum())
}

/// `exp(i·q/2·area)` for an oriented triangle on the unit sphere.
pub fn holonomy_oracle(triangle: [Vec3; 3], q: i32) -> Result<Complex64> {
    let [a, b, c] = triangle.map(normalize);
    let area = girard_area(a, b, c)?;
    Ok(Complex64::from_polar(1.0, q as f64 / 2.0 * area))
}

// ---------------------------------------------------------------- random

/// Hermitian matrix with operator norm exactly `norm` (zero if `norm = 0`).
pub fn random_hermitian(rng: &mut impl Rng, n: usize, norm: f64) -> CMatrix {
    let raw = CMatrix::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let h = (&raw + &raw.adjoint()).scale(0.5);
    let size = op_norm(&h);
    if size == 0.0 {
        return CMatrix::zeros(n);
    }
    h.scale(norm / size)
}

/// Unitary `exp(iH)` with `H` random Hermitian of norm up to `π`.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let norm = rng.gen_range(0.0..PI);
    let h = random_hermitian(rng, n, norm);
    exp_i_hermitian(&h).expect("hermitian input")
}

/// Bundle with charts `Φ_σ(x) = W_σ·exp(i Σ_v x_v K_{σ,v})`, `W_σ` random
/// unitary and `K_{σ,v}` random Hermitian of norm `amplitude`. Its flatness
/// is at most `2√2·amplitude`.
pub fn random_flat_bundle(
    base: &Complex,
    rank: usize,
    depth: u32,
    amplitude: f64,
    rng: &mut impl Rng,
) -> Result<CocycleBundle> {
    let mut frames: BTreeMap<Simplex, (CMatrix, Vec<CMatrix>)> = BTreeMap::new();
    for s in base.simplices() {
        let w = random_unitary(rng, rank);
        let k = (0..s.vertices().len()).map(|_| random_hermitian(rng, rank, amplitude)).collect();
        frames.insert(s.clone(), (w, k));
    }
    CocycleBundle::try_from_charts(base, rank, depth, |s, coords| {
        let (w, ks) = &frames[s];
        let mut h = CMatrix::zeros(rank);
        for (c, k) in coords.iter().zip(ks) {
            h = &h + &k.scale(*c);
        }
        Ok(w * &exp_i_hermitian(&h)?)
    })
}

/// The standard `n`-simplex `{0, …, n}` with all faces.
pub fn full_simplex(n: usize) -> Complex {
    Complex::from_simplices([Simplex::new((0..=n).collect()).expect("distinct vertices")])
}

/// A circle of `n ≥ 3` edges.
pub fn circle(n: usize) -> Result<Complex> {
    if n < 3 {
        return Err(Error::Precondition("a simplicial circle needs three edges".into()));
    }
    let edges = (0..n).map(|i| Simplex::edge(i, (i + 1) % n)).collect::<Result<Vec<_>>>()?;
    Ok(Complex::from_simplices(edges))
}

/// Rank-one bundle on `circle(n)` with holonomy `e^{iθ}` across the edge `{0, n−1}`.
pub fn circle_bundle(n: usize, theta: f64, depth: u32) -> Result<CocycleBundle> {
    let x = circle(n)?;
    let last = Simplex::edge(0, n - 1)?;
    let mut e = CocycleBundle::trivial(&x, 1, depth);
    *e.transition_mut(&Simplex::vertex(n - 1), &last)? =
        crate::sampled::SampledMap::constant(0, depth, CMatrix::scalar(Complex64::from_polar(1.0, theta)));
    Ok(e)
}

/// The square `{0,1,2,3}` cut into triangles `{0,1,2}` and `{0,2,3}`.
pub fn filled_square() -> Complex {
    Complex::from_simplices([
        Simplex::new(vec![0, 1, 2]).expect("triangle"),
        Simplex::new(vec![0, 2, 3]).expect("triangle"),
    ])
}
