//! Almost representations of finitely presented groups and their
//! conversion to and from almost flat bundles.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bundle::{CocycleBundle, DEFAULT_DEPTH};
use crate::error::{Error, Result};
use crate::matrixcore::{op_norm, CMatrix};
use crate::sampled::SampledMap;
use crate::simplicial::{Complex, Letter, Presentation, Simplex, Tree, Word};
use crate::transport::path_transport;
use crate::trivialize::extend_to;

/// Unitary images of the generators of a presentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlmostRep {
    pub presentation: Presentation,
    pub images: Vec<CMatrix>,
}

/// A sequence of almost representations of one presentation, typically of
/// growing rank and shrinking defect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepSequence {
    pub terms: Vec<AlmostRep>,
}

/// Per-term row of a `RepSequence` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRow {
    pub rank: usize,
    pub defect: f64,
    /// Closeness to the previous term after padding to a common rank.
    pub step: Option<f64>,
}

impl AlmostRep {
    pub fn new(presentation: Presentation, images: Vec<CMatrix>) -> Result<AlmostRep> {
        if images.len() != presentation.generators.len() {
            return Err(Error::Mismatch(format!(
                "{} images for {} generators",
                images.len(),
                presentation.generators.len()
            )));
        }
        if let Some(first) = images.first() {
            if images.iter().any(|m| m.dim() != first.dim()) {
                return Err(Error::Mismatch("generator images have different ranks".into()));
            }
        }
        if let Some(m) = images.iter().find(|m| m.unitarity_residual() > 1e-8) {
            return Err(Error::Precondition(format!("generator image is not unitary (residual {:.3e})", m.unitarity_residual())));
        }
        Ok(AlmostRep { presentation, images })
    }

    pub fn rank(&self) -> usize {
        self.images.first().map(|m| m.dim()).unwrap_or(0)
    }

    /// The trivial representation of the given rank.
    pub fn trivial(presentation: Presentation, rank: usize) -> AlmostRep {
        let images = vec![CMatrix::identity(rank); presentation.generators.len()];
        AlmostRep { presentation, images }
    }

    /// Image of a word, read in composition order.
    pub fn evaluate_word(&self, w: &[Letter]) -> Result<CMatrix> {
        self.presentation.check_word(w)?;
        let mut out = CMatrix::identity(self.rank());
        for l in w {
            let g = &self.images[l.generator];
            out = if l.inverse { &out * &g.adjoint() } else { &out * g };
        }
        Ok(out)
    }

    /// Largest `‖φ(r) − id‖` over the relations.
    pub fn defect(&self) -> f64 {
        self.presentation
            .relations
            .iter()
            .map(|r| self.evaluate_word(r).expect("relations use known generators").distance_to_identity())
            .fold(0.0, f64::max)
    }

    /// Largest distance between generator images. Different ranks are
    /// compared after placing the smaller images in the top-left corner of
    /// an identity of the larger rank.
    pub fn closeness(&self, other: &AlmostRep) -> Result<f64> {
        if self.presentation.generators.len() != other.presentation.generators.len() {
            return Err(Error::Mismatch("presentations have different generators".into()));
        }
        let n = self.rank().max(other.rank());
        let mut out: f64 = 0.0;
        for (a, b) in self.images.iter().zip(&other.images) {
            out = out.max(op_norm(&(&a.pad_identity(n)? - &b.pad_identity(n)?)));
        }
        Ok(out)
    }

    /// Almost representation of `target` with `g ↦ φ(s(g))`.
    pub fn substitute(&self, target: &Presentation, s: &[Word]) -> Result<AlmostRep> {
        if s.len() != target.generators.len() {
            return Err(Error::Mismatch("one word per target generator expected".into()));
        }
        let images = s.iter().map(|w| self.evaluate_word(w)).collect::<Result<Vec<_>>>()?;
        Ok(AlmostRep { presentation: target.clone(), images })
    }

    /// Blockwise direct sum.
    pub fn direct_sum(&self, other: &AlmostRep) -> Result<AlmostRep> {
        if self.presentation != other.presentation {
            return Err(Error::Mismatch("direct sum needs the same presentation".into()));
        }
        let images = self.images.iter().zip(&other.images).map(|(a, b)| a.direct_sum(b)).collect();
        Ok(AlmostRep { presentation: self.presentation.clone(), images })
    }
}

/// `φ ⊕ ψ`.
pub fn rep_direct_sum(phi: &AlmostRep, psi: &AlmostRep) -> Result<AlmostRep> {
    phi.direct_sum(psi)
}

impl RepSequence {
    pub fn new(terms: Vec<AlmostRep>) -> Result<RepSequence> {
        for w in terms.windows(2) {
            if w[1].rank() < w[0].rank() {
                return Err(Error::Precondition("ranks must not decrease along the sequence".into()));
            }
            if w[1].defect() > w[0].defect() + 1e-12 {
                return Err(Error::Precondition("defects must not increase along the sequence".into()));
            }
        }
        Ok(RepSequence { terms })
    }

    pub fn table(&self) -> Result<Vec<SequenceRow>> {
        let mut rows = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            let step = if i == 0 { None } else { Some(t.closeness(&self.terms[i - 1])?) };
            rows.push(SequenceRow { rank: t.rank(), defect: t.defect(), step });
        }
        Ok(rows)
    }
}

/// The presentation `⟨u, v | u v u⁻¹ v⁻¹⟩` of `ℤ²`.
pub fn z2_presentation() -> Presentation {
    Presentation::abstract_group(
        &["u", "v"],
        vec![vec![Letter::new(0), Letter::new(1), Letter::inv(0), Letter::inv(1)]],
    )
}

/// Clock and shift matrices on `ℂᵏ`: `u eⱼ = e_{j−1}` and `v = diag(ωʲ)`
/// with `ω = e^{2πi/k}`, so that `u v u⁻¹ v⁻¹ = ω·id`.
pub fn clock_shift(k: usize) -> Result<AlmostRep> {
    if k < 2 {
        return Err(Error::Precondition("clock and shift need k ≥ 2".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let u = CMatrix::from_fn(k, |i, j| if j == (i + 1) % k { one } else { zero });
    let diag: Vec<Complex64> = (0..k).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64)).collect();
    let v = CMatrix::from_diagonal(&diag);
    AlmostRep::new(z2_presentation(), vec![u, v])
}

/// Images `g ↦ T_{Γ_g}` of transport along the generator loops.
pub fn bundle_to_rep(e: &CocycleBundle, p: &Presentation) -> Result<AlmostRep> {
    if p.generator_loops.len() != p.generators.len() {
        return Err(Error::Missing("presentation has no generator loops".into()));
    }
    let base = p.basepoint.ok_or_else(|| Error::Missing("presentation has no basepoint".into()))?;
    let images = p
        .generator_loops
        .iter()
        .map(|l| {
            if l.start() != Some(base) || !l.is_closed() {
                return Err(Error::InvalidPath("generator loop must be closed at the basepoint".into()));
            }
            Ok(path_transport(e, l)?.matrix)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlmostRep { presentation: p.clone(), images })
}

/// Bundle whose transport along each generator loop is the generator image.
/// The 1-skeleton carries identity transitions on tree edges and `φ(g)`
/// across the edge of generator `g`; higher skeleta are filled by extension.
/// `p` must come from `presentation_from_tree(x, tree, _)`.
pub fn rep_to_bundle(phi: &AlmostRep, x: &Complex, tree: &Tree, p: &Presentation) -> Result<CocycleBundle> {
    rep_to_bundle_with_depth(phi, x, tree, p, DEFAULT_DEPTH)
}

pub fn rep_to_bundle_with_depth(
    phi: &AlmostRep,
    x: &Complex,
    tree: &Tree,
    p: &Presentation,
    depth: u32,
) -> Result<CocycleBundle> {
    if phi.presentation.generators != p.generators {
        return Err(Error::Mismatch("representation is not on this presentation".into()));
    }
    let edges = tree.non_tree_edges(x);
    if edges.len() != p.generators.len() {
        return Err(Error::Mismatch("presentation does not match the tree".into()));
    }
    let rank = phi.rank();
    let one = x.skeleton(1);
    let mut transitions = std::collections::BTreeMap::new();
    for (i, edge) in edges.iter().enumerate() {
        let (a, b) = *edge;
        let e = Simplex::edge(a, b)?;
        transitions.insert((Simplex::vertex(a), e.clone()), SampledMap::identity(0, depth, rank));
        transitions.insert((Simplex::vertex(b), e.clone()), SampledMap::constant(0, depth, phi.images[i].clone()));
    }
    for &(a, b) in tree.edges() {
        let e = Simplex::edge(a, b)?;
        transitions.insert((Simplex::vertex(a), e.clone()), SampledMap::identity(0, depth, rank));
        transitions.insert((Simplex::vertex(b), e.clone()), SampledMap::identity(0, depth, rank));
    }
    for s in one.simplices() {
        transitions.insert((s.clone(), s.clone()), SampledMap::identity(s.dim(), depth, rank));
    }
    let skeleton = CocycleBundle::from_transitions(&one, rank, depth, transitions)?;
    extend_to(&skeleton, x)
}
