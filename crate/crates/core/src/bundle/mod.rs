//! Almost flat bundles stored as sampled transition cocycles.

mod charts;
mod subdivision;

pub use charts::{BundleIso, GlobalTrivialization};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::{CMatrix, AUDIT_TOL};
use crate::sampled::SampledMap;
use crate::simplicial::{embed_numerators, Complex, ComplexJson, Lattice, Simplex};

/// Default lattice depth.
pub const DEFAULT_DEPTH: u32 = 4;

/// Transition data `Ψ_{ρ⊂σ}` for every pair of simplices `ρ ⊆ σ` of the base,
/// each sampled on the lattice of `ρ`. A vector in the `σ`-chart is sent to
/// the `ρ`-chart by `Ψ_{ρ⊂σ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleBundle {
    base: Complex,
    rank: usize,
    depth: u32,
    transitions: BTreeMap<(usize, usize), SampledMap>,
}

/// Lipschitz estimate of one transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAudit {
    pub face: Simplex,
    pub simplex: Simplex,
    pub lipschitz: f64,
}

/// Result of `flatness_audit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub epsilon: f64,
    pub worst: Option<(Simplex, Simplex)>,
    pub pairs: Vec<PairAudit>,
}

/// First failure found by `cocycle_check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleViolation {
    pub kind: String,
    pub tau: Simplex,
    pub rho: Simplex,
    pub sigma: Simplex,
    pub point: Vec<u32>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleReport {
    pub pass: bool,
    pub checked: usize,
    pub max_residual: f64,
    pub violation: Option<CocycleViolation>,
}

/// Serialized bundle; transition keys read `"ρ⊂σ"`, e.g. `"0,1⊂0,1,2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleJson {
    pub base: ComplexJson,
    pub rank: usize,
    pub depth: u32,
    pub transitions: BTreeMap<String, Vec<CMatrix>>,
}

/// All pairs `(i, j)` of simplex indices with `simplex(i) ⊆ simplex(j)`.
pub(crate) fn simplex_pairs(base: &Complex) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (j, sigma) in base.simplices().iter().enumerate() {
        for face in sigma.faces() {
            out.push((base.index_of(&face).expect("complex is face-closed"), j));
        }
    }
    out.sort_unstable();
    out
}

fn parse_simplex(s: &str) -> Result<Simplex> {
    let vertices = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Format(format!("bad vertex {t:?}"))))
        .collect::<Result<Vec<_>>>()?;
    Simplex::new(vertices)
}

impl CocycleBundle {
    /// The trivial bundle: every transition is the identity.
    pub fn trivial(base: &Complex, rank: usize, depth: u32) -> CocycleBundle {
        let transitions = simplex_pairs(base)
            .into_iter()
            .map(|(i, j)| ((i, j), SampledMap::identity(base.simplex(i).dim(), depth, rank)))
            .collect();
        CocycleBundle { base: base.clone(), rank, depth, transitions }
    }

    /// Transitions `Ψ_{ρ⊂σ}(x) = Φ_ρ(x)⁻¹Φ_σ(x)` from unitary charts
    /// `Φ_σ(x) = chart(σ, barycentric coordinates of x on σ)`.
    pub fn from_charts(
        base: &Complex,
        rank: usize,
        depth: u32,
        chart: impl Fn(&Simplex, &[f64]) -> CMatrix,
    ) -> CocycleBundle {
        Self::try_from_charts(base, rank, depth, |s, c| Ok(chart(s, c))).expect("infallible chart")
    }

    pub fn try_from_charts(
        base: &Complex,
        rank: usize,
        depth: u32,
        chart: impl Fn(&Simplex, &[f64]) -> Result<CMatrix>,
    ) -> Result<CocycleBundle> {
        let mut transitions = BTreeMap::new();
        for (i, j) in simplex_pairs(base) {
            let (rho, sigma) = (base.simplex(i), base.simplex(j));
            let map = if i == j {
                SampledMap::identity(rho.dim(), depth, rank)
            } else {
                SampledMap::try_from_fn(rho.dim(), depth, |nums, coords| {
                    let up: Vec<f64> = embed_numerators(rho, sigma, nums)
                        .iter()
                        .map(|&n| n as f64 / depth as f64)
                        .collect();
                    Ok(&chart(rho, coords)?.adjoint() * &chart(sigma, &up)?)
                })?
            };
            transitions.insert((i, j), map);
        }
        CocycleBundle::assemble(base.clone(), rank, depth, transitions)
    }

    /// Bundle from transitions keyed by simplex pairs; every pair must be present.
    pub fn from_transitions(
        base: &Complex,
        rank: usize,
        depth: u32,
        transitions: BTreeMap<(Simplex, Simplex), SampledMap>,
    ) -> Result<CocycleBundle> {
        let mut by_index = BTreeMap::new();
        for ((rho, sigma), map) in transitions {
            let i = base.require(&rho)?;
            let j = base.require(&sigma)?;
            if !rho.is_face_of(&sigma) {
                return Err(Error::Format(format!("{rho:?} is not a face of {sigma:?}")));
            }
            by_index.insert((i, j), map);
        }
        CocycleBundle::assemble(base.clone(), rank, depth, by_index)
    }

    pub(crate) fn assemble(
        base: Complex,
        rank: usize,
        depth: u32,
        mut transitions: BTreeMap<(usize, usize), SampledMap>,
    ) -> Result<CocycleBundle> {
        for (i, j) in simplex_pairs(&base) {
            let rho = base.simplex(i);
            if i == j {
                transitions.entry((i, j)).or_insert_with(|| SampledMap::identity(rho.dim(), depth, rank));
            }
            let map = transitions
                .get(&(i, j))
                .ok_or_else(|| Error::Missing(format!("transition {}⊂{}", rho, base.simplex(j))))?;
            if map.dim() != rho.dim() || map.depth() != depth || map.rank() != rank {
                return Err(Error::Mismatch(format!(
                    "transition {}⊂{} has the wrong lattice or rank",
                    rho,
                    base.simplex(j)
                )));
            }
        }
        if transitions.len() != simplex_pairs(&base).len() {
            return Err(Error::Format("transition keys outside the face relation".into()));
        }
        Ok(CocycleBundle { base, rank, depth, transitions })
    }

    /// The same bundle over a complex with identical simplices, typically to
    /// attach orientation data.
    pub fn rebase(self, base: Complex) -> Result<CocycleBundle> {
        if base.simplices() != self.base.simplices() {
            return Err(Error::Mismatch("rebase needs a complex with the same simplices".into()));
        }
        Ok(CocycleBundle { base, ..self })
    }

    pub fn base(&self) -> &Complex {
        &self.base
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn transition(&self, rho: &Simplex, sigma: &Simplex) -> Result<&SampledMap> {
        let i = self.base.require(rho)?;
        let j = self.base.require(sigma)?;
        self.transitions
            .get(&(i, j))
            .ok_or_else(|| Error::NotASimplex(rho.vertices().to_vec()))
    }

    pub fn transition_mut(&mut self, rho: &Simplex, sigma: &Simplex) -> Result<&mut SampledMap> {
        let i = self.base.require(rho)?;
        let j = self.base.require(sigma)?;
        self.transitions
            .get_mut(&(i, j))
            .ok_or_else(|| Error::NotASimplex(rho.vertices().to_vec()))
    }

    pub(crate) fn transition_at(&self, i: usize, j: usize) -> &SampledMap {
        &self.transitions[&(i, j)]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&Simplex, &Simplex, &SampledMap)> {
        self.transitions
            .iter()
            .map(|(&(i, j), m)| (self.base.simplex(i), self.base.simplex(j), m))
    }

    /// Largest Lipschitz estimate over all transitions.
    pub fn flatness_audit(&self) -> AuditReport {
        let mut pairs = Vec::with_capacity(self.transitions.len());
        let mut epsilon: f64 = 0.0;
        let mut worst = None;
        for (&(i, j), map) in &self.transitions {
            if i == j {
                continue;
            }
            let l = map.lipschitz_estimate();
            let (face, simplex) = (self.base.simplex(i).clone(), self.base.simplex(j).clone());
            if l > epsilon || worst.is_none() {
                epsilon = epsilon.max(l);
                worst = Some((face.clone(), simplex.clone()));
            }
            pairs.push(PairAudit { face, simplex, lipschitz: l });
        }
        AuditReport { epsilon, worst, pairs }
    }

    /// Shorthand for `flatness_audit().epsilon`.
    pub fn audit(&self) -> f64 {
        self.flatness_audit().epsilon
    }

    /// Checks `Ψ_{ρ⊂ρ} = id`, unitarity, and `Ψ_{τ⊂σ} = Ψ_{τ⊂ρ}Ψ_{ρ⊂σ}` at
    /// every lattice point of `τ`. Residuals are Frobenius norms.
    pub fn cocycle_check(&self, tol: f64) -> CocycleReport {
        let mut checked = 0;
        let mut max_residual: f64 = 0.0;
        let id = CMatrix::identity(self.rank);
        let fail = |kind: &str, t: usize, r: usize, s: usize, point: &[u32], residual: f64| CocycleViolation {
            kind: kind.into(),
            tau: self.base.simplex(t).clone(),
            rho: self.base.simplex(r).clone(),
            sigma: self.base.simplex(s).clone(),
            point: point.to_vec(),
            residual,
        };
        for (&(i, j), map) in &self.transitions {
            let lattice = map.lattice();
            for (p, v) in map.values().iter().enumerate() {
                checked += 1;
                let residual = if i == j { (v - &id).frobenius_norm() } else { v.unitarity_residual() };
                max_residual = max_residual.max(residual);
                if residual > tol {
                    let kind = if i == j { "identity" } else { "unitarity" };
                    let violation = fail(kind, i, i, j, lattice.point(p), residual);
                    return CocycleReport { pass: false, checked, max_residual, violation: Some(violation) };
                }
            }
        }
        for (j, sigma) in self.base.simplices().iter().enumerate() {
            for rho in sigma.faces() {
                if &rho == sigma {
                    continue;
                }
                let r = self.base.index_of(&rho).unwrap();
                let rho_sigma = &self.transitions[&(r, j)];
                let rho_lattice = rho_sigma.lattice();
                for tau in rho.faces() {
                    if tau == rho {
                        continue;
                    }
                    let t = self.base.index_of(&tau).unwrap();
                    let tau_sigma = &self.transitions[&(t, j)];
                    let tau_rho = &self.transitions[&(t, r)];
                    let tau_lattice = tau_sigma.lattice();
                    for (p, nums) in tau_lattice.points().iter().enumerate() {
                        checked += 1;
                        let up = rho_lattice.index_of(&embed_numerators(&tau, &rho, nums)).unwrap();
                        let composed = tau_rho.value(p) * rho_sigma.value(up);
                        let residual = (tau_sigma.value(p) - &composed).frobenius_norm();
                        max_residual = max_residual.max(residual);
                        if residual > tol {
                            let violation = fail("coherence", t, r, j, nums, residual);
                            return CocycleReport { pass: false, checked, max_residual, violation: Some(violation) };
                        }
                    }
                }
            }
        }
        CocycleReport { pass: true, checked, max_residual, violation: None }
    }

    /// Cocycle check at the default audit tolerance.
    pub fn is_coherent(&self) -> bool {
        self.cocycle_check(AUDIT_TOL).pass
    }

    /// Restriction to a subcomplex of the base.
    pub fn restrict_to(&self, sub: &Complex) -> Result<CocycleBundle> {
        if !sub.is_subcomplex_of(&self.base) {
            return Err(Error::Precondition("not a subcomplex of the base".into()));
        }
        let mut transitions = BTreeMap::new();
        for (i, j) in simplex_pairs(sub) {
            let a = self.base.index_of(sub.simplex(i)).unwrap();
            let b = self.base.index_of(sub.simplex(j)).unwrap();
            transitions.insert((i, j), self.transitions[&(a, b)].clone());
        }
        CocycleBundle::assemble(sub.clone(), self.rank, self.depth, transitions)
    }

    /// Pullback along a simplicial map `x → base` given on vertices. Lattice
    /// points are pushed forward exactly by summing numerators over the
    /// vertex map.
    pub fn pullback(&self, x: &Complex, vertex_map: &BTreeMap<usize, usize>) -> Result<CocycleBundle> {
        let image = |s: &Simplex| -> Result<Simplex> {
            let mut v = Vec::with_capacity(s.vertices().len());
            for a in s.vertices() {
                v.push(*vertex_map.get(a).ok_or(Error::UnknownVertex(*a))?);
            }
            v.sort_unstable();
            v.dedup();
            let f = Simplex::new(v)?;
            if !self.base.contains(&f) {
                return Err(Error::Precondition(format!("vertex map sends {s:?} to the non-simplex {f:?}")));
            }
            Ok(f)
        };
        let mut transitions = BTreeMap::new();
        for (i, j) in simplex_pairs(x) {
            let rho = x.simplex(i);
            let f_rho = image(rho)?;
            let f_sigma = image(x.simplex(j))?;
            let source = self.transition(&f_rho, &f_sigma)?;
            let map = if i == j {
                SampledMap::identity(rho.dim(), self.depth, self.rank)
            } else {
                SampledMap::from_fn(rho.dim(), self.depth, |nums, _| {
                    let mut pushed = vec![0u32; f_rho.vertices().len()];
                    for (k, a) in rho.vertices().iter().enumerate() {
                        pushed[f_rho.local_index(vertex_map[a]).unwrap()] += nums[k];
                    }
                    source.value_at(&pushed).unwrap().clone()
                })
            };
            transitions.insert((i, j), map);
        }
        CocycleBundle::assemble(x.clone(), self.rank, self.depth, transitions)
    }

    /// Blockwise direct sum over the same base.
    pub fn direct_sum(&self, other: &CocycleBundle) -> Result<CocycleBundle> {
        if self.base != other.base || self.depth != other.depth {
            return Err(Error::Mismatch("direct sum needs the same base and depth".into()));
        }
        let transitions = self
            .transitions
            .iter()
            .map(|(k, a)| {
                let b = &other.transitions[k];
                let values = a.values().iter().zip(b.values()).map(|(x, y)| x.direct_sum(y)).collect();
                Ok((*k, SampledMap::new(a.dim(), a.depth(), values)?))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        CocycleBundle::assemble(self.base.clone(), self.rank + other.rank, self.depth, transitions)
    }

    /// Conjugates every chart of dimension at least `min_dim` by a constant
    /// unitary: `Φ_σ ↦ Φ_σ·w`. Transitions change to `Ψ·w` or `w⁻¹Ψw`.
    pub fn gauge_transform(&self, w: &CMatrix, min_dim: usize) -> CocycleBundle {
        let w_inv = w.adjoint();
        let mut out = self.clone();
        for (&(i, j), map) in out.transitions.iter_mut() {
            let (lo, hi) = (self.base.simplex(i).dim() >= min_dim, self.base.simplex(j).dim() >= min_dim);
            *map = match (lo, hi) {
                (true, true) => map.map(|v| &(&w_inv * v) * w),
                (false, true) => map.map(|v| v * w),
                (true, false) => map.map(|v| &w_inv * v),
                (false, false) => continue,
            };
        }
        out
    }

    pub fn to_json(&self) -> BundleJson {
        let transitions = self
            .transitions
            .iter()
            .map(|(&(i, j), m)| (format!("{}⊂{}", self.base.simplex(i), self.base.simplex(j)), m.values().to_vec()))
            .collect();
        BundleJson { base: self.base.to_json(), rank: self.rank, depth: self.depth, transitions }
    }

    pub fn from_json(json: &BundleJson) -> Result<CocycleBundle> {
        if json.depth == 0 {
            return Err(Error::Format("lattice depth must be positive".into()));
        }
        let base = Complex::from_json(&json.base)?;
        let mut transitions = BTreeMap::new();
        for (key, values) in &json.transitions {
            let (a, b) = key
                .split_once('⊂')
                .ok_or_else(|| Error::Format(format!("transition key {key:?} lacks '⊂'")))?;
            let (rho, sigma) = (parse_simplex(a)?, parse_simplex(b)?);
            if values.iter().any(|v| v.dim() != json.rank) {
                return Err(Error::Format(format!("transition {key} has matrices of the wrong rank")));
            }
            let map = SampledMap::new(rho.dim(), json.depth, values.clone())?;
            transitions.insert((rho, sigma), map);
        }
        CocycleBundle::from_transitions(&base, json.rank, json.depth, transitions)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("bundle serializes")
    }

    pub fn from_json_str(s: &str) -> Result<CocycleBundle> {
        CocycleBundle::from_json(&serde_json::from_str(s)?)
    }

    /// Values of `Ψ_{ρ⊂σ}` at the lattice point of `ρ` with the given numerators.
    pub fn value(&self, rho: &Simplex, sigma: &Simplex, numerators: &[u32]) -> Result<&CMatrix> {
        self.transition(rho, sigma)?
            .value_at(numerators)
            .ok_or_else(|| Error::Format(format!("{numerators:?} is not a lattice point")))
    }

    /// Lattice of a simplex of the base at the bundle depth.
    pub fn lattice_of(&self, s: &Simplex) -> std::sync::Arc<Lattice> {
        Lattice::get(s.dim(), self.depth)
    }
}
