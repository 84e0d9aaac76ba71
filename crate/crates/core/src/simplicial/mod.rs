//! Finite abstract simplicial complexes.

mod lattice;
mod paths;
mod star;
mod subdivision;
mod tree;

pub use lattice::{Lattice, LatticePoint};
pub use paths::{apply_witness, synthesize_witness, ContractionWitness, Move, SimplicialPath, WitnessReport};
pub use star::{star_retraction_violation, star_subcomplex};
pub(crate) use lattice::{carrier, embed_numerators};
pub use subdivision::{barycentric_subdivide, Subdivision};
pub use tree::{invert_word, maximal_tree, presentation_from_tree, Letter, Presentation, Tree, Word};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A simplex: a non-empty, strictly increasing list of vertex identifiers.
///
/// Simplices order by dimension first and lexicographically within a
/// dimension, which is the traversal order used everywhere in the crate.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Simplex(Vec<usize>);

impl Simplex {
    /// Sorts the vertices; fails on an empty list or a repeated vertex.
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidComplex("empty face".into()));
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidComplex(format!("duplicate vertex in face {vertices:?}")));
        }
        Ok(Simplex(vertices))
    }

    pub fn vertex(v: usize) -> Self {
        Simplex(vec![v])
    }

    pub fn edge(a: usize, b: usize) -> Result<Self> {
        Simplex::new(vec![a, b])
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| other.contains_vertex(*v))
    }

    /// Position of vertex `v` inside this simplex.
    pub fn local_index(&self, v: usize) -> Option<usize> {
        self.0.binary_search(&v).ok()
    }

    pub fn intersects(&self, other: &Simplex) -> bool {
        self.0.iter().any(|v| other.contains_vertex(*v))
    }

    /// Every non-empty subset, in simplex order.
    pub fn faces(&self) -> Vec<Simplex> {
        let k = self.0.len();
        let mut out: Vec<Simplex> = (1u32..(1u32 << k))
            .map(|mask| {
                Simplex((0..k).filter(|i| mask & (1 << i) != 0).map(|i| self.0[i]).collect())
            })
            .collect();
        out.sort();
        out
    }

    /// The codimension-one faces, in simplex order.
    pub fn facets(&self) -> Vec<Simplex> {
        if self.0.len() < 2 {
            return Vec::new();
        }
        let mut out: Vec<Simplex> = (0..self.0.len())
            .map(|skip| {
                Simplex(self.0.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect())
            })
            .collect();
        out.sort();
        out
    }

    /// The sub-simplex spanned by the given local positions.
    pub fn sub(&self, local: &[usize]) -> Simplex {
        let mut v: Vec<usize> = local.iter().map(|&i| self.0[i]).collect();
        v.sort_unstable();
        v.dedup();
        Simplex(v)
    }
}

impl TryFrom<Vec<usize>> for Simplex {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Simplex::new(v)
    }
}

impl From<Simplex> for Vec<usize> {
    fn from(s: Simplex) -> Self {
        s.0
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// A finite simplicial complex closed under taking faces.
#[derive(Clone)]
pub struct Complex {
    vertices: Vec<usize>,
    simplices: Vec<Simplex>,
    index: HashMap<Simplex, usize>,
    orientation: Option<BTreeMap<Simplex, i8>>,
}

impl PartialEq for Complex {
    fn eq(&self, other: &Self) -> bool {
        self.simplices == other.simplices && self.orientation == other.orientation
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Complex")
            .field("vertices", &self.vertices.len())
            .field("simplices", &self.simplices.len())
            .field("dim", &self.dim())
            .finish()
    }
}

/// Face closure of the given faces.
pub fn build_complex(faces: &[Vec<usize>]) -> Result<Complex> {
    let simplices = faces.iter().map(|f| Simplex::new(f.clone())).collect::<Result<Vec<_>>>()?;
    Ok(Complex::from_simplices(simplices))
}

impl Complex {
    /// Face closure of a collection of simplices.
    pub fn from_simplices(simplices: impl IntoIterator<Item = Simplex>) -> Complex {
        let mut all = BTreeSet::new();
        for s in simplices {
            if all.contains(&s) {
                continue;
            }
            for f in s.faces() {
                all.insert(f);
            }
        }
        Complex::from_closed(all.into_iter().collect(), None)
    }

    fn from_closed(simplices: Vec<Simplex>, orientation: Option<BTreeMap<Simplex, i8>>) -> Complex {
        let index = simplices.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let vertices = simplices.iter().filter(|s| s.dim() == 0).map(|s| s.0[0]).collect();
        Complex { vertices, simplices, index, orientation }
    }

    /// Attaches orientation signs to 2-simplices, given relative to sorted
    /// vertex order, and checks the surface condition.
    pub fn with_orientation(mut self, orientation: BTreeMap<Simplex, i8>) -> Result<Complex> {
        for (s, sign) in &orientation {
            if s.dim() != 2 || !self.contains(s) {
                return Err(Error::InvalidComplex(format!("orientation given for non-triangle {s:?}")));
            }
            if *sign != 1 && *sign != -1 {
                return Err(Error::InvalidComplex(format!("orientation sign {sign} is not ±1")));
            }
        }
        self.orientation = Some(orientation);
        self.check_orientation()?;
        Ok(self)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplex(&self, i: usize) -> &Simplex {
        &self.simplices[i]
    }

    pub fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn require(&self, s: &Simplex) -> Result<usize> {
        self.index_of(s).ok_or_else(|| Error::NotASimplex(s.0.clone()))
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.index.contains_key(s)
    }

    pub fn has_vertex(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && Simplex::edge(a, b).map(|e| self.contains(&e)).unwrap_or(false)
    }

    pub fn dim(&self) -> usize {
        self.simplices.last().map(|s| s.dim()).unwrap_or(0)
    }

    pub fn of_dim(&self, k: usize) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().filter(move |s| s.dim() == k)
    }

    pub fn count_dim(&self, k: usize) -> usize {
        self.of_dim(k).count()
    }

    /// Simplices not contained in any larger simplex.
    pub fn maximal_simplices(&self) -> Vec<Simplex> {
        let mut covered: BTreeSet<&Simplex> = BTreeSet::new();
        for s in &self.simplices {
            for f in s.facets() {
                if let Some(i) = self.index_of(&f) {
                    covered.insert(&self.simplices[i]);
                }
            }
        }
        self.simplices.iter().filter(|s| !covered.contains(s)).cloned().collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices.iter().map(|s| if s.dim() % 2 == 0 { 1 } else { -1 }).sum()
    }

    pub fn orientation(&self) -> Option<&BTreeMap<Simplex, i8>> {
        self.orientation.as_ref()
    }

    /// Sorted neighbours of a vertex in the 1-skeleton.
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .of_dim(1)
            .filter(|e| e.contains_vertex(v))
            .map(|e| if e.0[0] == v { e.0[1] } else { e.0[0] })
            .collect();
        out.sort_unstable();
        out
    }

    /// Simplices of dimension at most `k`; orientation data survives only
    /// when the triangles do.
    pub fn skeleton(&self, k: usize) -> Complex {
        let kept: Vec<Simplex> = self.simplices.iter().filter(|s| s.dim() <= k).cloned().collect();
        let orientation = if k >= 2 { self.orientation.clone() } else { None };
        Complex::from_closed(kept, orientation)
    }

    /// The subcomplex generated by the given simplices, which must belong here.
    pub fn subcomplex(&self, generators: &[Simplex]) -> Result<Complex> {
        for g in generators {
            self.require(g)?;
        }
        Ok(Complex::from_simplices(generators.iter().cloned()))
    }

    pub fn is_subcomplex_of(&self, other: &Complex) -> bool {
        self.simplices.iter().all(|s| other.contains(s))
    }

    /// The induced orientation of each oriented triangle's edges must be
    /// used at most once in each direction.
    fn check_orientation(&self) -> Result<()> {
        let Some(orientation) = &self.orientation else {
            return Ok(());
        };
        let mut seen: HashMap<(usize, usize), Simplex> = HashMap::new();
        for (face, sign) in orientation {
            for (a, b) in oriented_boundary(face, *sign) {
                if let Some(other) = seen.insert((a, b), face.clone()) {
                    return Err(Error::InvalidComplex(format!(
                        "faces {other:?} and {face:?} induce the same orientation on edge ({a},{b})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// A closed oriented surface: pure of dimension two, every triangle
    /// oriented, and every edge bordered by exactly two triangles inducing
    /// opposite orientations.
    pub fn check_closed_surface(&self) -> Result<()> {
        let Some(orientation) = &self.orientation else {
            return Err(Error::InvalidComplex("no orientation data".into()));
        };
        if self.dim() != 2 {
            return Err(Error::InvalidComplex("a surface must have dimension two".into()));
        }
        if self.of_dim(2).any(|t| !orientation.contains_key(t)) {
            return Err(Error::InvalidComplex("some triangle has no orientation".into()));
        }
        let mut directed: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (face, sign) in orientation {
            directed.extend(oriented_boundary(face, *sign));
        }
        for e in self.of_dim(1) {
            let (a, b) = (e.0[0], e.0[1]);
            if !(directed.contains(&(a, b)) && directed.contains(&(b, a))) {
                return Err(Error::InvalidComplex(format!("edge {e:?} does not border two triangles")));
            }
        }
        Ok(())
    }

    /// The oriented boundary loop `(v₀, v₁, v₂, v₀)` of an oriented triangle.
    pub fn oriented_loop(&self, face: &Simplex) -> Result<SimplicialPath> {
        let sign = self
            .orientation
            .as_ref()
            .and_then(|o| o.get(face))
            .copied()
            .ok_or_else(|| Error::Missing(format!("orientation of {face:?}")))?;
        let v = face.vertices();
        Ok(if sign > 0 {
            SimplicialPath::new(vec![v[0], v[1], v[2], v[0]])
        } else {
            SimplicialPath::new(vec![v[0], v[2], v[1], v[0]])
        })
    }

    pub fn to_json(&self) -> ComplexJson {
        let faces = self.maximal_simplices();
        let orientation = self.orientation.as_ref().map(|o| {
            faces
                .iter()
                .enumerate()
                .filter_map(|(i, f)| o.get(f).map(|s| (i.to_string(), *s)))
                .collect()
        });
        ComplexJson {
            vertices: self.vertices.clone(),
            faces: faces.into_iter().map(|f| f.0).collect(),
            orientation,
        }
    }

    pub fn from_json(json: &ComplexJson) -> Result<Complex> {
        let mut declared: Vec<usize> = json.vertices.clone();
        declared.sort_unstable();
        if declared.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidComplex("duplicate vertex identifier".into()));
        }
        let mut generators = Vec::new();
        for f in &json.faces {
            if let Some(v) = f.iter().find(|v| declared.binary_search(v).is_err()) {
                return Err(Error::UnknownVertex(*v));
            }
            generators.push(Simplex::new(f.clone())?);
        }
        generators.extend(declared.iter().map(|v| Simplex::vertex(*v)));
        let complex = Complex::from_simplices(generators);
        match &json.orientation {
            None => Ok(complex),
            Some(map) => {
                let mut orientation = BTreeMap::new();
                for (key, sign) in map {
                    let i: usize = key
                        .parse()
                        .map_err(|_| Error::Format(format!("orientation key {key:?} is not a face index")))?;
                    let face = json
                        .faces
                        .get(i)
                        .ok_or_else(|| Error::Format(format!("orientation key {i} out of range")))?;
                    let sorted = Simplex::new(face.clone())?;
                    orientation.insert(sorted, sign * permutation_sign(face));
                }
                complex.with_orientation(orientation)
            }
        }
    }
}

/// Directed edges of an oriented triangle.
fn oriented_boundary(face: &Simplex, sign: i8) -> [(usize, usize); 3] {
    let v = face.vertices();
    if sign > 0 {
        [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])]
    } else {
        [(v[0], v[2]), (v[2], v[1]), (v[1], v[0])]
    }
}

/// Sign of the permutation sorting `v`.
fn permutation_sign(v: &[usize]) -> i8 {
    let mut inversions = 0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Serialized complex: `{"vertices": [...], "faces": [[...]], "orientation": {"i": ±1}}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ComplexJson {
    pub vertices: Vec<usize>,
    pub faces: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<BTreeMap<String, i8>>,
}
