use super::{barycentric_subdivide, Complex, Lattice, Simplex, Subdivision};
use crate::error::Result;

/// The full subcomplex of `S(X)` on the vertices `ρ` with `ρ ∩ σ ≠ ∅`.
/// Vertex `i` of the result is simplex `i` of `x`, as in `barycentric_subdivide`.
pub fn star_subcomplex(x: &Complex, sigma: &Simplex) -> Result<(Subdivision, Complex)> {
    x.require(sigma)?;
    let sub = barycentric_subdivide(x);
    let kept: Vec<Simplex> = sub
        .complex
        .simplices()
        .iter()
        .filter(|chain| chain.vertices().iter().all(|&i| sub.labels[i].intersects(sigma)))
        .cloned()
        .collect();
    let star = Complex::from_simplices(kept);
    Ok((sub, star))
}

/// A point given in barycentric coordinates on `top` lies in the star of
/// `sigma` exactly when a vertex of `sigma` attains the largest coordinate.
fn in_star(top: &Simplex, coords: &[f64], sigma: &Simplex) -> bool {
    let max = coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top.vertices()
        .iter()
        .zip(coords)
        .any(|(v, c)| sigma.contains_vertex(*v) && *c >= max - 1e-12)
}

/// Samples the straight-line retraction `ρ ↦ ρ ∩ σ` on every simplex of the
/// star at lattice points of the given depth and `steps + 1` equally spaced
/// times. Returns the first sample that leaves the star, as
/// `(chain, numerators, time)`.
pub fn star_retraction_violation(
    x: &Complex,
    sigma: &Simplex,
    depth: u32,
    steps: usize,
) -> Result<Option<(Simplex, Vec<u32>, f64)>> {
    let (sub, star) = star_subcomplex(x, sigma)?;
    for chain in star.simplices() {
        let top = sub.top(chain).clone();
        let lattice = Lattice::get(chain.dim(), depth);
        for nums in lattice.points() {
            for step in 0..=steps {
                let t = step as f64 / steps.max(1) as f64;
                let mut coords = vec![0.0; top.vertices().len()];
                for (k, &member) in chain.vertices().iter().enumerate() {
                    let weight = nums[k] as f64 / depth as f64;
                    if weight == 0.0 {
                        continue;
                    }
                    let rho = &sub.labels[member];
                    let cut: Vec<usize> =
                        rho.vertices().iter().copied().filter(|v| sigma.contains_vertex(*v)).collect();
                    for v in rho.vertices() {
                        coords[top.local_index(*v).unwrap()] += weight * (1.0 - t) / rho.vertices().len() as f64;
                    }
                    for v in &cut {
                        coords[top.local_index(*v).unwrap()] += weight * t / cut.len() as f64;
                    }
                }
                if !in_star(&top, &coords, sigma) {
                    return Ok(Some((chain.clone(), nums.clone(), t)));
                }
            }
        }
    }
    Ok(None)
}
