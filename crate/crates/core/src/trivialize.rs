//! Global trivializations, skeleton and subcomplex extension, and
//! isomorphisms between close bundles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bundle::{BundleIso, CocycleBundle, GlobalTrivialization};
use crate::error::{Error, Result};
use crate::matrixcore::{op_norm, unitary_power, CMatrix};
use crate::sampled::{unitary_extend, BoundaryMap, SampledMap};
use crate::simplicial::{
    apply_witness, carrier, maximal_tree, synthesize_witness, Complex, ContractionWitness, Simplex,
    SimplicialPath, Tree,
};
use crate::transport::{edge_transport, hc_constants, loop_defect, path_transport, verify_with_audit, ROUNDING_SLACK};

/// Largest boundary holonomy defect `‖T_∂ρ − id‖` accepted when filling a
/// 2-simplex. Spreading the holonomy over the three edges leaves a mismatch
/// of `‖H^{1/3} − id‖ ≤ 2 sin(π/12)` per edge at this limit.
pub const FILL_TRIANGLE_THRESHOLD: f64 = std::f64::consts::SQRT_2;

/// A loop `Γ_σ = (x, y)*Γ⁰` through a non-tree edge `σ = {x, y}` that
/// returns along the tree, with its measured defect and the bound it was
/// checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopCertificate {
    pub edge: (usize, usize),
    #[serde(rename = "loop")]
    pub loop_: SimplicialPath,
    pub defect: f64,
    pub bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<ContractionWitness>,
}

/// A new edge `{p, q}` for `extend_subcomplex`: a path from `p` to `q` in the
/// part already built and a contraction of `path * (q, p)` in the larger complex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeWitness {
    pub edge: (usize, usize),
    pub path: SimplicialPath,
    pub witness: ContractionWitness,
}

/// `(x, y)` followed by the tree path from `y` back to `x`.
pub fn tree_loop(tree: &Tree, x: usize, y: usize) -> SimplicialPath {
    let mut v = vec![x];
    v.extend_from_slice(tree.path(y, x).vertices());
    SimplicialPath::new(v)
}

impl LoopCertificate {
    /// Certificate checked against the flatness itself.
    pub fn measured(e: &CocycleBundle, tree: &Tree, edge: (usize, usize)) -> Result<LoopCertificate> {
        let loop_ = tree_loop(tree, edge.0, edge.1);
        let defect = loop_defect(e, &loop_)?;
        Ok(LoopCertificate { edge, loop_, defect, bound: e.audit(), witness: None })
    }

    /// Certificate whose bound `c(n)·ε` comes from a contraction witness of
    /// complexity `n`.
    pub fn witnessed(
        e: &CocycleBundle,
        tree: &Tree,
        edge: (usize, usize),
        witness: ContractionWitness,
    ) -> Result<LoopCertificate> {
        Self::witnessed_with_audit(e, tree, edge, witness, e.audit())
    }

    fn witnessed_with_audit(
        e: &CocycleBundle,
        tree: &Tree,
        edge: (usize, usize),
        witness: ContractionWitness,
        audit: f64,
    ) -> Result<LoopCertificate> {
        let loop_ = tree_loop(tree, edge.0, edge.1);
        let report = verify_with_audit(e, &loop_, &witness, audit)?;
        Ok(LoopCertificate { edge, loop_, defect: report.defect, bound: report.bound, witness: Some(witness) })
    }
}

fn annotate(err: Error, rho: &Simplex) -> Error {
    match err {
        Error::Threshold { what, value, limit } => Error::Threshold { what: format!("{what} over {rho:?}"), value, limit },
        other => other,
    }
}

/// Extends boundary data given on the proper faces of `rho` (by carrier face
/// and numerators there) over `rho`.
fn extend_over(
    depth: u32,
    rho: &Simplex,
    mut boundary: impl FnMut(&Simplex, &[u32]) -> Result<CMatrix>,
) -> Result<SampledMap> {
    let alpha0 = BoundaryMap::try_from_fn(rho.dim(), depth, |nums| {
        let (tau, sub) = carrier(rho, nums);
        boundary(&tau, &sub)
    })?;
    unitary_extend(&alpha0).map_err(|err| annotate(err, rho))
}

fn chart_value(charts: &[Option<SampledMap>], x: &Complex, tau: &Simplex, nums: &[u32]) -> Result<CMatrix> {
    let t = x.require(tau)?;
    let chart = charts[t].as_ref().ok_or_else(|| Error::Missing(format!("chart over {tau:?}")))?;
    Ok(chart.value_at(nums).expect("lattice point of the face").clone())
}

/// Builds a global trivialization from a tree and one certificate per
/// non-tree edge. Charts are the identity at the root, constant along tree
/// edges, extended over the remaining edges and then over higher simplices
/// in simplex order.
pub fn trivialize(e: &CocycleBundle, tree: &Tree, certs: &[LoopCertificate]) -> Result<GlobalTrivialization> {
    trivialize_with_audit(e, tree, certs, e.audit())
}

fn trivialize_with_audit(
    e: &CocycleBundle,
    tree: &Tree,
    certs: &[LoopCertificate],
    audit: f64,
) -> Result<GlobalTrivialization> {
    let x = e.base();
    let mut checked = Vec::new();
    for (a, b) in tree.non_tree_edges(x) {
        let cert = certs
            .iter()
            .find(|c| (c.edge.0.min(c.edge.1), c.edge.0.max(c.edge.1)) == (a, b))
            .ok_or_else(|| Error::Missing(format!("loop certificate for edge ({a}, {b})")))?;
        let (p, q) = cert.edge;
        let expected = tree_loop(tree, p, q);
        if cert.loop_ != expected {
            return Err(Error::InvalidPath(format!("certificate loop for ({p}, {q}) must cross the edge and return along the tree")));
        }
        let checked_cert = match &cert.witness {
            Some(w) => LoopCertificate::witnessed_with_audit(e, tree, (p, q), w.clone(), audit)?,
            None => LoopCertificate { defect: loop_defect(e, &expected)?, bound: audit, ..cert.clone() },
        };
        if checked_cert.defect > checked_cert.bound + ROUNDING_SLACK {
            return Err(Error::Threshold {
                what: format!("transport defect of the loop through edge ({p}, {q})"),
                value: checked_cert.defect,
                limit: checked_cert.bound,
            });
        }
        checked.push(checked_cert);
    }

    let rank = e.rank();
    let depth = e.depth();
    let mut charts: Vec<Option<SampledMap>> = vec![None; x.len()];
    let root = x.require(&Simplex::vertex(tree.root()))?;
    charts[root] = Some(SampledMap::identity(0, depth, rank));
    for &v in &tree.order()[1..] {
        let p = tree.parent(v).expect("non-root vertex has a parent");
        let edge = Simplex::edge(p, v)?;
        let c_p = chart_value(&charts, x, &Simplex::vertex(p), &[depth])?;
        let c_e = &e.transition(&Simplex::vertex(p), &edge)?.value(0).adjoint() * &c_p;
        let c_v = e.transition(&Simplex::vertex(v), &edge)?.value(0) * &c_e;
        charts[x.require(&edge)?] = Some(SampledMap::constant(1, depth, c_e));
        charts[x.require(&Simplex::vertex(v))?] = Some(SampledMap::constant(0, depth, c_v));
    }
    for (i, rho) in x.simplices().iter().enumerate() {
        if charts[i].is_some() {
            continue;
        }
        if rho.dim() == 0 {
            return Err(Error::Disconnected);
        }
        let chart = extend_over(depth, rho, |tau, nums| {
            let psi = e.value(tau, rho, nums)?;
            Ok(&psi.adjoint() * &chart_value(&charts, x, tau, nums)?)
        })?;
        charts[i] = Some(chart);
    }
    Ok(GlobalTrivialization { charts: charts.into_iter().map(|c| c.unwrap()).collect(), certificates: checked })
}

/// Trivialization of a bundle over a contractible complex. The loop through
/// each non-tree edge is contracted by a synthesized witness of complexity
/// `n`, which certifies the defect bound `c(n)·ε` when `ε ≤ δ(n)`.
pub fn trivialize_contractible(e: &CocycleBundle) -> Result<GlobalTrivialization> {
    let x = e.base();
    let tree = maximal_tree(x)?;
    let audit = e.audit();
    let mut certs = Vec::new();
    for (a, b) in tree.non_tree_edges(x) {
        let loop_ = tree_loop(&tree, a, b);
        let witness = synthesize_witness(x, &loop_)
            .ok_or_else(|| Error::Missing(format!("contraction witness for the loop {:?}", loop_.vertices())))?;
        certs.push(LoopCertificate::witnessed_with_audit(e, &tree, (a, b), witness, audit)?);
    }
    trivialize_with_audit(e, &tree, &certs, audit)
}

/// Charts over `∂ρ` for a simplex `ρ` whose boundary lies in the base of `e`,
/// keyed by face. Setting `Ψ_{τ⊂ρ} = C_τ` then extends `e` over `ρ`.
fn fill_simplex(e: &CocycleBundle, rho: &Simplex) -> Result<BTreeMap<Simplex, SampledMap>> {
    match rho.dim() {
        0 => Ok(BTreeMap::new()),
        1 => Ok(rho
            .facets()
            .into_iter()
            .map(|v| (v, SampledMap::identity(0, e.depth(), e.rank())))
            .collect()),
        2 => fill_triangle(e, rho),
        _ => fill_by_disk(e, rho),
    }
}

/// Spreads the boundary holonomy `H = T_ca·T_bc·T_ab` evenly over the three
/// edges with `R = H^{1/3}`: vertex charts `id`, `T_ab·R⁻¹`, `T_bc·T_ab·R⁻²`
/// leave a mismatch of `‖R − id‖` on each edge, which `unitary_extend` absorbs.
fn fill_triangle(e: &CocycleBundle, rho: &Simplex) -> Result<BTreeMap<Simplex, SampledMap>> {
    let (a, b, c) = (rho.vertices()[0], rho.vertices()[1], rho.vertices()[2]);
    let t_ab = edge_transport(e, a, b)?;
    let t_bc = edge_transport(e, b, c)?;
    let t_ca = edge_transport(e, c, a)?;
    let h = &(&t_ca * &t_bc) * &t_ab;
    let defect = h.distance_to_identity();
    if defect > FILL_TRIANGLE_THRESHOLD {
        return Err(Error::Threshold {
            what: format!("boundary transport defect of the 2-simplex {rho:?}"),
            value: defect,
            limit: FILL_TRIANGLE_THRESHOLD,
        });
    }
    let r_inv = unitary_power(&h, -1.0 / 3.0)?;
    let depth = e.depth();
    let mut out = BTreeMap::new();
    let c_a = CMatrix::identity(e.rank());
    let c_b = &t_ab * &r_inv;
    let c_c = &(&(&t_bc * &t_ab) * &r_inv) * &r_inv;
    for (v, m) in [(a, c_a), (b, c_b), (c, c_c)] {
        out.insert(Simplex::vertex(v), SampledMap::constant(0, depth, m));
    }
    for edge in [Simplex::edge(a, b)?, Simplex::edge(a, c)?, Simplex::edge(b, c)?] {
        let chart = extend_over(depth, &edge, |tau, _| {
            let psi = e.value(tau, &edge, &[depth])?;
            Ok(&psi.adjoint() * out[tau].value(0))
        })?;
        out.insert(edge, chart);
    }
    Ok(out)
}

/// Trivializes `∂ρ` minus its last facet (a disk) and extends over that facet.
fn fill_by_disk(e: &CocycleBundle, rho: &Simplex) -> Result<BTreeMap<Simplex, SampledMap>> {
    let mut facets = rho.facets();
    let last = facets.pop().expect("simplex of positive dimension");
    let disk = Complex::from_simplices(facets);
    let triv = trivialize_contractible(&e.restrict_to(&disk)?)?;
    let mut out: BTreeMap<Simplex, SampledMap> =
        disk.simplices().iter().cloned().zip(triv.charts).collect();
    let depth = e.depth();
    let chart = extend_over(depth, &last, |tau, nums| {
        let psi = e.value(tau, &last, nums)?;
        Ok(&psi.adjoint() * out[tau].value_at(nums).unwrap())
    })?;
    out.insert(last, chart);
    Ok(out)
}

/// `e` extended to `new_base ⊇ base` by the given transitions into new simplices.
fn enlarge(e: &CocycleBundle, new_base: &Complex, added: &BTreeMap<(Simplex, Simplex), SampledMap>) -> Result<CocycleBundle> {
    let mut transitions = BTreeMap::new();
    for sigma in new_base.simplices() {
        for rho in sigma.faces() {
            let map = if e.base().contains(sigma) {
                e.transition(&rho, sigma)?.clone()
            } else if &rho == sigma {
                SampledMap::identity(rho.dim(), e.depth(), e.rank())
            } else {
                added
                    .get(&(rho.clone(), sigma.clone()))
                    .cloned()
                    .ok_or_else(|| Error::Missing(format!("transition {rho}⊂{sigma}")))?
            };
            transitions.insert((rho, sigma.clone()), map);
        }
    }
    CocycleBundle::from_transitions(new_base, e.rank(), e.depth(), transitions)
}

/// Fills every simplex of `new` (all of one dimension, boundaries present).
fn fill_level(e: &CocycleBundle, new: &[Simplex]) -> Result<CocycleBundle> {
    let mut added = BTreeMap::new();
    for rho in new {
        for (tau, chart) in fill_simplex(e, rho)? {
            added.insert((tau, rho.clone()), chart);
        }
    }
    let mut generators: Vec<Simplex> = e.base().simplices().to_vec();
    generators.extend(new.iter().cloned());
    let level = Complex::from_simplices(generators);
    enlarge(e, &level, &added)
}

fn require_skeleton(e: &CocycleBundle, x: &Complex, k: usize) -> Result<()> {
    if e.base().simplices() != x.skeleton(k).simplices() {
        return Err(Error::Precondition(format!("bundle base is not the {k}-skeleton of the complex")));
    }
    Ok(())
}

/// Extends a bundle on the `k`-skeleton to the `(k+1)`-skeleton, `k ≠ 1`.
/// For `k = 0` the new edge transitions are identities; for `k ≥ 2` each
/// boundary sphere is trivialized as a disk plus one facet.
pub fn extend_skeleton(e: &CocycleBundle, x: &Complex, k: usize) -> Result<CocycleBundle> {
    if k == 1 {
        return Err(Error::Precondition("extension from the 1-skeleton goes through extend_skeleton_1to2".into()));
    }
    require_skeleton(e, x, k)?;
    let new: Vec<Simplex> = x.of_dim(k + 1).cloned().collect();
    fill_level(e, &new)?.rebase(x.skeleton(k + 1))
}

/// Extends a bundle on the 1-skeleton over the 2-simplices, provided every
/// boundary transport is within `FILL_TRIANGLE_THRESHOLD` of the identity.
pub fn extend_skeleton_1to2(e: &CocycleBundle, x: &Complex) -> Result<CocycleBundle> {
    require_skeleton(e, x, 1)?;
    let new: Vec<Simplex> = x.of_dim(2).cloned().collect();
    fill_level(e, &new)?.rebase(x.skeleton(2))
}

/// Extends `e` over the skeleta of `x` up to its dimension.
pub fn extend_to(e: &CocycleBundle, x: &Complex) -> Result<CocycleBundle> {
    let mut current = e.clone();
    let mut k = current.base().dim();
    if current.base().simplices() != x.skeleton(k).simplices() {
        return Err(Error::Precondition("bundle base is not a skeleton of the complex".into()));
    }
    while k < x.dim() {
        current = if k == 1 { extend_skeleton_1to2(&current, x)? } else { extend_skeleton(&current, x, k)? };
        k += 1;
    }
    current.rebase(x.clone())
}

/// Extends a bundle on `X` to `X' ⊇ X`. New vertices and edges hanging off
/// vertices without edges get identity transitions; every other new edge
/// `{p, q}` needs an `EdgeWitness`, and its transport is set equal to the
/// transport along the witnessed path. New 2-simplices and higher are filled
/// as in the skeleton extensions.
pub fn extend_subcomplex(e: &CocycleBundle, bigger: &Complex, witnesses: &[EdgeWitness]) -> Result<CocycleBundle> {
    if !e.base().is_subcomplex_of(bigger) {
        return Err(Error::Precondition("bundle base is not a subcomplex".into()));
    }
    let depth = e.depth();
    let mut current = e.clone();
    let new_vertices: Vec<Simplex> =
        bigger.of_dim(0).filter(|s| !e.base().contains(s)).cloned().collect();
    if !new_vertices.is_empty() {
        let mut gens = current.base().simplices().to_vec();
        gens.extend(new_vertices);
        current = enlarge(&current, &Complex::from_simplices(gens), &BTreeMap::new())?;
    }
    let new_edges: Vec<Simplex> = bigger.of_dim(1).filter(|s| !e.base().contains(s)).cloned().collect();
    for edge in new_edges {
        let (a, b) = (edge.vertices()[0], edge.vertices()[1]);
        let dangling = current.base().neighbours(a).is_empty() || current.base().neighbours(b).is_empty();
        let (into_a, into_b) = if dangling {
            (CMatrix::identity(e.rank()), CMatrix::identity(e.rank()))
        } else {
            let w = witnesses
                .iter()
                .find(|w| (w.edge.0.min(w.edge.1), w.edge.0.max(w.edge.1)) == (a, b))
                .ok_or_else(|| Error::Missing(format!("nullhomotopy witness for the new edge ({a}, {b})")))?;
            let (p, q) = w.edge;
            if w.path.start() != Some(p) || w.path.end() != Some(q) {
                return Err(Error::InvalidPath(format!("witness path must run from {p} to {q}")));
            }
            let mut closed = w.path.vertices().to_vec();
            closed.push(p);
            apply_witness(bigger, &SimplicialPath::new(closed), &w.witness)?;
            let t = path_transport(&current, &w.path)?.matrix;
            // transport p → q across the edge equals t
            if p == a {
                (CMatrix::identity(e.rank()), t)
            } else {
                (t, CMatrix::identity(e.rank()))
            }
        };
        let mut added = BTreeMap::new();
        added.insert((Simplex::vertex(a), edge.clone()), SampledMap::constant(0, depth, into_a));
        added.insert((Simplex::vertex(b), edge.clone()), SampledMap::constant(0, depth, into_b));
        let mut gens = current.base().simplices().to_vec();
        gens.push(edge);
        current = enlarge(&current, &Complex::from_simplices(gens), &added)?;
    }
    for k in 2..=bigger.dim() {
        let new: Vec<Simplex> = bigger.of_dim(k).filter(|s| !current.base().contains(s)).cloned().collect();
        if !new.is_empty() {
            current = fill_level(&current, &new)?;
        }
    }
    if current.base().simplices() != bigger.simplices() {
        return Err(Error::Precondition("extension did not reach the larger complex".into()));
    }
    current.rebase(bigger.clone())
}

/// Isomorphism between bundles over the same base whose edge transports are
/// `eps`-close: vertex conjugators are identities, and higher conjugators are
/// unitary extensions of `Ψ'_{τ⊂ρ}⁻¹·Ξ_τ·Ψ_{τ⊂ρ}` from the boundary.
pub fn iso_between(e: &CocycleBundle, e2: &CocycleBundle, eps: f64) -> Result<BundleIso> {
    let x = e.base();
    if x.simplices() != e2.base().simplices() || e.rank() != e2.rank() || e.depth() != e2.depth() {
        return Err(Error::Mismatch("bundles differ in base, rank or depth".into()));
    }
    let (_, limit) = hc_constants(x.dim().max(1))?;
    if eps > limit {
        return Err(Error::Threshold { what: "iso_between matching tolerance".into(), value: eps, limit });
    }
    for edge in x.of_dim(1) {
        let (a, b) = (edge.vertices()[0], edge.vertices()[1]);
        let gap = op_norm(&(&edge_transport(e, a, b)? - &edge_transport(e2, a, b)?));
        if gap >= eps {
            return Err(Error::Threshold {
                what: format!("edge transports differ on ({a}, {b})"),
                value: gap,
                limit: eps,
            });
        }
    }
    let depth = e.depth();
    let mut conj: Vec<Option<SampledMap>> = vec![None; x.len()];
    for (i, rho) in x.simplices().iter().enumerate() {
        let map = if rho.dim() == 0 {
            SampledMap::identity(0, depth, e.rank())
        } else {
            extend_over(depth, rho, |tau, nums| {
                let psi = e.value(tau, rho, nums)?;
                let psi2 = e2.value(tau, rho, nums)?;
                Ok(&(&psi2.adjoint() * &chart_value(&conj, x, tau, nums)?) * psi)
            })?
        };
        conj[i] = Some(map);
    }
    Ok(BundleIso { conjugators: conj.into_iter().map(|c| c.unwrap()).collect() })
}
