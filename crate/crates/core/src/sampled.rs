//! Matrix-valued maps sampled on the barycentric lattice of one simplex, and
//! the cone and unitary extension constructions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::{op_norm, skew_project, unitarize_g, CMatrix};
use crate::simplicial::{embed_numerators, Lattice, Simplex};

/// Largest pairwise distance allowed by `unitary_extend`.
pub const EXTENSION_DIAMETER: f64 = 0.5;

/// One matrix per lattice point of a `dim`-simplex, in lattice order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledMap {
    dim: usize,
    depth: u32,
    values: Vec<CMatrix>,
}

/// A map sampled only at the boundary lattice points of a simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMap {
    dim: usize,
    depth: u32,
    values: Vec<Option<CMatrix>>,
}

fn check_rank(values: impl Iterator<Item = usize>) -> Result<()> {
    let mut ranks = values;
    if let Some(first) = ranks.next() {
        if ranks.any(|r| r != first) {
            return Err(Error::Mismatch("sample values have different ranks".into()));
        }
    }
    Ok(())
}

impl SampledMap {
    pub fn new(dim: usize, depth: u32, values: Vec<CMatrix>) -> Result<SampledMap> {
        let lattice = Lattice::get(dim, depth);
        if values.len() != lattice.len() {
            return Err(Error::Mismatch(format!(
                "{} values for a lattice of {} points",
                values.len(),
                lattice.len()
            )));
        }
        check_rank(values.iter().map(|v| v.dim()))?;
        Ok(SampledMap { dim, depth, values })
    }

    pub fn constant(dim: usize, depth: u32, value: CMatrix) -> SampledMap {
        let len = Lattice::get(dim, depth).len();
        SampledMap { dim, depth, values: vec![value; len] }
    }

    pub fn identity(dim: usize, depth: u32, rank: usize) -> SampledMap {
        SampledMap::constant(dim, depth, CMatrix::identity(rank))
    }

    /// Samples `f(numerators, coordinates)` at every lattice point.
    pub fn from_fn(dim: usize, depth: u32, mut f: impl FnMut(&[u32], &[f64]) -> CMatrix) -> SampledMap {
        let lattice = Lattice::get(dim, depth);
        let values = (0..lattice.len()).map(|i| f(lattice.point(i), &lattice.coords(i))).collect();
        SampledMap { dim, depth, values }
    }

    /// Fallible variant of `from_fn`.
    pub fn try_from_fn(
        dim: usize,
        depth: u32,
        mut f: impl FnMut(&[u32], &[f64]) -> Result<CMatrix>,
    ) -> Result<SampledMap> {
        let lattice = Lattice::get(dim, depth);
        let values = (0..lattice.len())
            .map(|i| f(lattice.point(i), &lattice.coords(i)))
            .collect::<Result<Vec<_>>>()?;
        SampledMap::new(dim, depth, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn rank(&self) -> usize {
        self.values.first().map(|v| v.dim()).unwrap_or(0)
    }

    pub fn lattice(&self) -> Arc<Lattice> {
        Lattice::get(self.dim, self.depth)
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &CMatrix {
        &self.values[i]
    }

    pub fn value_at(&self, numerators: &[u32]) -> Option<&CMatrix> {
        self.lattice().index_of(numerators).map(|i| &self.values[i])
    }

    pub fn set_value(&mut self, i: usize, value: CMatrix) {
        self.values[i] = value;
    }

    pub fn map(&self, f: impl Fn(&CMatrix) -> CMatrix) -> SampledMap {
        SampledMap { dim: self.dim, depth: self.depth, values: self.values.iter().map(f).collect() }
    }

    /// Pointwise `f(x) · g(x)`.
    pub fn pointwise_product(&self, other: &SampledMap) -> Result<SampledMap> {
        self.check_same_lattice(other)?;
        Ok(SampledMap {
            dim: self.dim,
            depth: self.depth,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    fn check_same_lattice(&self, other: &SampledMap) -> Result<()> {
        if self.dim != other.dim || self.depth != other.depth {
            return Err(Error::Mismatch(format!(
                "lattices (dim {}, depth {}) and (dim {}, depth {}) differ",
                self.dim, self.depth, other.dim, other.depth
            )));
        }
        Ok(())
    }

    /// Largest `‖f(x) − g(x)‖` over the lattice.
    pub fn max_distance(&self, other: &SampledMap) -> Result<f64> {
        self.check_same_lattice(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| op_norm(&(a - b))).fold(0.0, f64::max))
    }

    pub fn max_unitarity_residual(&self) -> f64 {
        self.values.iter().map(|v| v.unitarity_residual()).fold(0.0, f64::max)
    }

    /// Largest `‖f(x) − f(y)‖ / d(x, y)` over lattice-adjacent pairs, with
    /// distances in the standard-simplex metric. A single sample point gives 0.
    pub fn lipschitz_estimate(&self) -> f64 {
        let lattice = self.lattice();
        let spacing = lattice.spacing();
        lattice
            .adjacent_pairs()
            .iter()
            .map(|&(i, j)| op_norm(&(&self.values[i] - &self.values[j])) / spacing)
            .fold(0.0, f64::max)
    }

    /// Restriction to a face: `face` and `simplex` are the vertex sets, the
    /// map living on `simplex`.
    pub fn restrict(&self, simplex: &Simplex, face: &Simplex) -> Result<SampledMap> {
        if simplex.dim() != self.dim {
            return Err(Error::Mismatch("simplex does not match the map's dimension".into()));
        }
        if !face.is_face_of(simplex) {
            return Err(Error::NotASimplex(face.vertices().to_vec()));
        }
        let lattice = self.lattice();
        let sub = Lattice::get(face.dim(), self.depth);
        let values = sub
            .points()
            .iter()
            .map(|p| self.values[lattice.index_of(&embed_numerators(face, simplex, p)).unwrap()].clone())
            .collect();
        Ok(SampledMap { dim: face.dim(), depth: self.depth, values })
    }

    /// Boundary values of the map.
    pub fn boundary(&self) -> BoundaryMap {
        let lattice = self.lattice();
        let values = (0..lattice.len())
            .map(|i| lattice.is_boundary(i).then(|| self.values[i].clone()))
            .collect();
        BoundaryMap { dim: self.dim, depth: self.depth, values }
    }

    /// Piecewise-linear interpolation on the Freudenthal triangulation of the
    /// lattice at a point with barycentric coordinates `coords`. The result is
    /// a convex combination of at most `dim + 1` samples and is exact at
    /// lattice points.
    pub fn interpolate(&self, coords: &[f64]) -> CMatrix {
        let m = self.depth as f64;
        let k = self.dim;
        let lattice = self.lattice();
        if k == 0 {
            return self.values[0].clone();
        }
        // cumulative coordinates c_j = m·(x₀ + … + x_{j−1}), j = 1..k
        let mut c = Vec::with_capacity(k);
        let mut acc = 0.0;
        for x in coords.iter().take(k) {
            acc += x * m;
            c.push(acc.clamp(0.0, m));
        }
        let base: Vec<f64> = c.iter().map(|v| v.floor().min(m - 1.0).max(0.0)).collect();
        let frac: Vec<f64> = c.iter().zip(&base).map(|(v, b)| v - b).collect();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| frac[b].partial_cmp(&frac[a]).unwrap().then(b.cmp(&a)));
        let mut weights = Vec::with_capacity(k + 1);
        weights.push(1.0 - frac[order[0]]);
        for r in 1..k {
            weights.push(frac[order[r - 1]] - frac[order[r]]);
        }
        weights.push(frac[order[k - 1]]);
        let mut corner: Vec<f64> = base.clone();
        let mut vertices = vec![corner.clone()];
        for &j in &order {
            corner[j] += 1.0;
            vertices.push(corner.clone());
        }
        let to_index = |cum: &[f64]| -> usize {
            let mut nums = Vec::with_capacity(k + 1);
            let mut prev = 0.0;
            for v in cum {
                nums.push((v - prev).round().max(0.0) as u32);
                prev = *v;
            }
            nums.push((m - prev).round().max(0.0) as u32);
            lattice.index_of(&nums).expect("Freudenthal vertex inside the simplex")
        };
        if let Some(r) = weights.iter().position(|w| *w >= 1.0 - 1e-12) {
            return self.values[to_index(&vertices[r])].clone();
        }
        let n = self.rank();
        let mut out = CMatrix::zeros(n);
        for (w, v) in weights.iter().zip(&vertices) {
            if *w > 0.0 {
                out = &out + &self.values[to_index(v)].scale(*w);
            }
        }
        out
    }
}

impl BoundaryMap {
    /// Boundary data from a function of the numerators of boundary points.
    pub fn from_fn(dim: usize, depth: u32, mut f: impl FnMut(&[u32]) -> CMatrix) -> BoundaryMap {
        let lattice = Lattice::get(dim, depth);
        let values = (0..lattice.len())
            .map(|i| lattice.is_boundary(i).then(|| f(lattice.point(i))))
            .collect();
        BoundaryMap { dim, depth, values }
    }

    pub fn try_from_fn(dim: usize, depth: u32, mut f: impl FnMut(&[u32]) -> Result<CMatrix>) -> Result<BoundaryMap> {
        let lattice = Lattice::get(dim, depth);
        let values = (0..lattice.len())
            .map(|i| if lattice.is_boundary(i) { f(lattice.point(i)).map(Some) } else { Ok(None) })
            .collect::<Result<Vec<_>>>()?;
        check_rank(values.iter().flatten().map(|v| v.dim()))?;
        Ok(BoundaryMap { dim, depth, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn lattice(&self) -> Arc<Lattice> {
        Lattice::get(self.dim, self.depth)
    }

    pub fn rank(&self) -> usize {
        self.values.iter().flatten().next().map(|v| v.dim()).unwrap_or(0)
    }

    /// Value at a lattice index, `None` in the interior.
    pub fn value(&self, i: usize) -> Option<&CMatrix> {
        self.values[i].as_ref()
    }

    fn entries(&self) -> impl Iterator<Item = (usize, &CMatrix)> {
        self.values.iter().enumerate().filter_map(|(i, v)| v.as_ref().map(|v| (i, v)))
    }

    /// The lexicographically least boundary point.
    pub fn base_point(&self) -> usize {
        self.values.iter().position(|v| v.is_some()).expect("boundary is non-empty")
    }

    /// Largest pairwise distance between boundary values.
    pub fn diameter(&self) -> f64 {
        let values: Vec<&CMatrix> = self.entries().map(|(_, v)| v).collect();
        let mut out: f64 = 0.0;
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                out = out.max(op_norm(&(values[i] - values[j])));
            }
        }
        out
    }

    /// Checks `diameter ≤ limit`, skipping the pairwise scan when the radius
    /// around the base point already settles it.
    fn diameter_within(&self, limit: f64) -> std::result::Result<(), f64> {
        let s0 = self.values[self.base_point()].as_ref().unwrap();
        let radius = self.entries().map(|(_, v)| op_norm(&(v - s0))).fold(0.0, f64::max);
        if 2.0 * radius <= limit {
            return Ok(());
        }
        let d = self.diameter();
        if d <= limit {
            Ok(())
        } else {
            Err(d)
        }
    }

    /// Lipschitz estimate over adjacent pairs of boundary points.
    pub fn lipschitz_estimate(&self) -> f64 {
        let lattice = self.lattice();
        let spacing = lattice.spacing();
        lattice
            .adjacent_pairs()
            .iter()
            .filter_map(|&(i, j)| match (&self.values[i], &self.values[j]) {
                (Some(a), Some(b)) => Some(op_norm(&(a - b)) / spacing),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&CMatrix) -> CMatrix) -> BoundaryMap {
        BoundaryMap {
            dim: self.dim,
            depth: self.depth,
            values: self.values.iter().map(|v| v.as_ref().map(&f)).collect(),
        }
    }
}

/// Radial parameter `t = 1 − (k+1)·min xᵢ`: 0 at the barycenter, 1 on the boundary.
pub fn radial_parameter(coords: &[f64]) -> f64 {
    let min = coords.iter().cloned().fold(f64::INFINITY, f64::min);
    1.0 - coords.len() as f64 * min
}

/// Nearest boundary lattice point to a point `y` of the boundary, ties going
/// to the lexicographically least.
fn nearest_boundary_point(lattice: &Lattice, y: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for i in lattice.boundary_indices() {
        let d: f64 = lattice.coords(i).iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.0 - 1e-12 {
            best = (d, i);
        }
    }
    best.1
}

/// Extends boundary data `β₀` with `β₀(s₀) = 0` radially to the whole simplex:
/// a point at radial parameter `t` on the ray from the barycenter through the
/// boundary point `y` receives `(2t − 1)·β₀(y)` for `t > 1/2` and `0` otherwise.
/// Off-lattice `y` is rounded to the nearest boundary lattice point.
pub fn cone_extend_vector(beta0: &BoundaryMap, s0: usize, radius: f64) -> Result<SampledMap> {
    let base = beta0
        .value(s0)
        .ok_or_else(|| Error::Precondition("s₀ must be a boundary point".into()))?;
    if base.frobenius_norm() > 1e-12 {
        return Err(Error::Precondition("β₀(s₀) must vanish".into()));
    }
    for (_, v) in beta0.entries() {
        let norm = op_norm(v);
        if norm > radius + 1e-12 {
            return Err(Error::Threshold { what: "cone_extend_vector: boundary value norm".into(), value: norm, limit: radius });
        }
    }
    let lattice = beta0.lattice();
    let k = beta0.dim();
    let n = beta0.rank();
    let bary = 1.0 / (k + 1) as f64;
    let values = (0..lattice.len())
        .map(|i| {
            if let Some(v) = beta0.value(i) {
                return v.clone();
            }
            let c = lattice.coords(i);
            let t = radial_parameter(&c);
            if t <= 0.5 {
                return CMatrix::zeros(n);
            }
            let y: Vec<f64> = c.iter().map(|ci| bary + (ci - bary) / t).collect();
            let j = nearest_boundary_point(&lattice, &y);
            beta0.value(j).unwrap().scale(2.0 * t - 1.0)
        })
        .collect();
    Ok(SampledMap { dim: k, depth: beta0.depth(), values })
}

/// Extends a unitary boundary map of diameter at most 1/2 to the whole
/// simplex: with `s₀` the least boundary point, `α₁ = π(α₀(s₀)⁻¹α₀)`, `α₂`
/// its cone extension, and the result `α₀(s₀)·g(α₂)`. Boundary values are
/// copied from `α₀`.
pub fn unitary_extend(alpha0: &BoundaryMap) -> Result<SampledMap> {
    let lattice = alpha0.lattice();
    if alpha0.dim() == 0 {
        return Err(Error::Precondition("a 0-simplex has no boundary to extend from".into()));
    }
    if let Err(d) = alpha0.diameter_within(EXTENSION_DIAMETER) {
        return Err(Error::Threshold {
            what: "unitary_extend: boundary diameter".into(),
            value: d,
            limit: EXTENSION_DIAMETER,
        });
    }
    let s0 = alpha0.base_point();
    let anchor = alpha0.value(s0).unwrap().clone();
    let anchor_inv = anchor.adjoint();
    let alpha1 = alpha0.map(|v| skew_project(&(&anchor_inv * v)));
    let alpha2 = cone_extend_vector(&alpha1, s0, EXTENSION_DIAMETER)?;
    let values = (0..lattice.len())
        .map(|i| match alpha0.value(i) {
            Some(v) => Ok(v.clone()),
            None => Ok(&anchor * &unitarize_g(alpha2.value(i))?),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledMap { dim: alpha0.dim(), depth: alpha0.depth(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn interpolation_is_exact_on_lattice() {
        let f = SampledMap::from_fn(2, 4, |n, _| {
            CMatrix::scalar(Complex64::new(n[0] as f64 + 10.0 * n[1] as f64, 0.0))
        });
        let lattice = f.lattice();
        for i in 0..lattice.len() {
            let v = f.interpolate(&lattice.coords(i));
            assert!((&v - f.value(i)).frobenius_norm() < 1e-12);
        }
        // affine data are reproduced everywhere
        let v = f.interpolate(&[0.3, 0.3, 0.4]);
        assert!((v.get(0, 0).re - (0.3 * 4.0 + 10.0 * 0.3 * 4.0)).abs() < 1e-10);
    }
}
