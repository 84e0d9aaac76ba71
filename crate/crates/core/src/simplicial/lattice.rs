use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::Simplex;

/// A sample point of a simplex: integer barycentric numerators over the
/// simplex's sorted vertices, summing to the lattice depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub simplex: Simplex,
    pub numerators: Vec<u32>,
}

/// The depth-`m` barycentric lattice of the standard `k`-simplex, listed in
/// lexicographic order of numerators.
#[derive(Debug)]
pub struct Lattice {
    dim: usize,
    depth: u32,
    points: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    adjacent: Vec<(usize, usize)>,
}

fn cache() -> &'static Mutex<HashMap<(usize, u32), Arc<Lattice>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<Lattice>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn enumerate(parts: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        enumerate(parts - 1, total - first, prefix, out);
        prefix.pop();
    }
}

impl Lattice {
    /// Shared lattice for a dimension and depth; depth must be positive.
    pub fn get(dim: usize, depth: u32) -> Arc<Lattice> {
        assert!(depth > 0, "lattice depth must be positive");
        let mut guard = cache().lock().expect("lattice cache poisoned");
        guard
            .entry((dim, depth))
            .or_insert_with(|| Arc::new(Lattice::build(dim, depth)))
            .clone()
    }

    fn build(dim: usize, depth: u32) -> Lattice {
        let mut points = Vec::new();
        enumerate(dim + 1, depth, &mut Vec::new(), &mut points);
        let index: HashMap<Vec<u32>, usize> =
            points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mut adjacent = Vec::new();
        for (i, p) in points.iter().enumerate() {
            for from in 0..=dim {
                if p[from] == 0 {
                    continue;
                }
                for to in 0..=dim {
                    if to == from {
                        continue;
                    }
                    let mut q = p.clone();
                    q[from] -= 1;
                    q[to] += 1;
                    let j = index[&q];
                    if j > i {
                        adjacent.push((i, j));
                    }
                }
            }
        }
        adjacent.sort_unstable();
        Lattice { dim, depth, points, index, adjacent }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<u32>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[u32] {
        &self.points[i]
    }

    pub fn index_of(&self, numerators: &[u32]) -> Option<usize> {
        self.index.get(numerators).copied()
    }

    /// Normalized barycentric coordinates of a point.
    pub fn coords(&self, i: usize) -> Vec<f64> {
        self.points[i].iter().map(|&n| n as f64 / self.depth as f64).collect()
    }

    /// A point lies on the boundary when some numerator vanishes; a
    /// 0-simplex has empty boundary.
    pub fn is_boundary(&self, i: usize) -> bool {
        self.dim > 0 && self.points[i].contains(&0)
    }

    pub fn boundary_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_boundary(i)).collect()
    }

    /// Unordered pairs of points one lattice step apart (`x − y = (e_i − e_j)/m`).
    pub fn adjacent_pairs(&self) -> &[(usize, usize)] {
        &self.adjacent
    }

    /// Distance between adjacent points in the standard-simplex metric.
    pub fn spacing(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.depth as f64
    }

    /// The local vertex positions with non-zero numerator.
    pub fn support(&self, i: usize) -> Vec<usize> {
        self.points[i].iter().enumerate().filter(|(_, &n)| n > 0).map(|(k, _)| k).collect()
    }

    /// Index of the point at vertex `local` of the simplex.
    pub fn vertex_index(&self, local: usize) -> usize {
        let mut p = vec![0; self.dim + 1];
        p[local] = self.depth;
        self.index[&p]
    }
}

/// Rewrites numerators over `face` as numerators over `simplex ⊇ face`.
pub(crate) fn embed_numerators(face: &Simplex, simplex: &Simplex, numerators: &[u32]) -> Vec<u32> {
    let mut out = vec![0; simplex.vertices().len()];
    for (k, v) in face.vertices().iter().enumerate() {
        let local = simplex.local_index(*v).expect("face not contained in simplex");
        out[local] = numerators[k];
    }
    out
}

/// The carrier face of a point of `simplex` and its numerators on it.
pub(crate) fn carrier(simplex: &Simplex, numerators: &[u32]) -> (Simplex, Vec<u32>) {
    let local: Vec<usize> = (0..numerators.len()).filter(|&k| numerators[k] > 0).collect();
    let face = simplex.sub(&local);
    let nums = local.iter().map(|&k| numerators[k]).collect();
    (face, nums)
}
