use std::collections::BTreeSet;

use super::{Complex, Simplex};

/// The barycentric subdivision `S(X)` together with the labels of its
/// vertices: vertex `i` of `S(X)` is the simplex `labels[i]` of `X`.
#[derive(Debug, Clone)]
pub struct Subdivision {
    pub complex: Complex,
    pub labels: Vec<Simplex>,
}

/// Vertices of `S(X)` are the simplices of `X` (numbered in simplex order),
/// simplices are chains `σ₀ ⊂ … ⊂ σ_k`.
pub fn barycentric_subdivide(x: &Complex) -> Subdivision {
    let mut chains: BTreeSet<Simplex> = BTreeSet::new();
    let mut memo: Vec<Option<Vec<Vec<usize>>>> = vec![None; x.len()];
    for i in 0..x.len() {
        for c in chains_ending_at(x, i, &mut memo) {
            chains.insert(Simplex::new(c).expect("chains have distinct members"));
        }
    }
    let complex = Complex::from_simplices(chains);
    Subdivision { complex, labels: x.simplices().to_vec() }
}

fn chains_ending_at(x: &Complex, top: usize, memo: &mut Vec<Option<Vec<Vec<usize>>>>) -> Vec<Vec<usize>> {
    if let Some(done) = &memo[top] {
        return done.clone();
    }
    let mut out = vec![vec![top]];
    let sigma = x.simplex(top).clone();
    for face in sigma.faces() {
        if face == sigma {
            continue;
        }
        let f = x.index_of(&face).expect("complex is face-closed");
        for mut c in chains_ending_at(x, f, memo) {
            c.push(top);
            out.push(c);
        }
    }
    memo[top] = Some(out.clone());
    out
}

impl Subdivision {
    /// The largest member of a chain, which contains the image of its realization.
    pub fn top(&self, chain: &Simplex) -> &Simplex {
        chain
            .vertices()
            .iter()
            .map(|&i| &self.labels[i])
            .max_by_key(|s| s.dim())
            .expect("non-empty chain")
    }

    /// Members of a chain ordered by inclusion.
    pub fn chain_members(&self, chain: &Simplex) -> Vec<&Simplex> {
        let mut members: Vec<&Simplex> = chain.vertices().iter().map(|&i| &self.labels[i]).collect();
        members.sort_by_key(|s| s.dim());
        members
    }

    /// The map `Ξ`: a point of the chain simplex with the given numerators
    /// (over the chain's sorted vertices) goes to barycentric coordinates on
    /// the chain's top simplex, `Σᵢ (nᵢ/m)·bary(σᵢ)`.
    pub fn xi(&self, chain: &Simplex, numerators: &[u32], depth: u32) -> (Simplex, Vec<f64>) {
        let top = self.top(chain).clone();
        let mut coords = vec![0.0; top.vertices().len()];
        for (k, &s) in chain.vertices().iter().enumerate() {
            if numerators[k] == 0 {
                continue;
            }
            let member = &self.labels[s];
            let weight = numerators[k] as f64 / depth as f64 / member.vertices().len() as f64;
            for v in member.vertices() {
                coords[top.local_index(*v).unwrap()] += weight;
            }
        }
        (top, coords)
    }

    /// Inverse of `Ξ` on lattice points of `X`: the carrier chain in `S(X)`
    /// and the numerators there. The image of a depth-`m` lattice point is
    /// again a depth-`m` lattice point.
    pub fn xi_inverse(&self, x: &Complex, simplex: &Simplex, numerators: &[u32]) -> (Simplex, Vec<u32>) {
        let mut order: Vec<usize> = (0..numerators.len()).filter(|&k| numerators[k] > 0).collect();
        // descending numerator, ties by local position
        order.sort_by(|&a, &b| numerators[b].cmp(&numerators[a]).then(a.cmp(&b)));
        let mut members = Vec::new();
        let mut weights = Vec::new();
        for j in 0..order.len() {
            let next = if j + 1 < order.len() { numerators[order[j + 1]] } else { 0 };
            let lambda = (j as u32 + 1) * (numerators[order[j]] - next);
            if lambda == 0 {
                continue;
            }
            let member = simplex.sub(&order[..=j]);
            members.push(x.index_of(&member).expect("face of a simplex of X"));
            weights.push(lambda);
        }
        let mut pairs: Vec<(usize, u32)> = members.into_iter().zip(weights).collect();
        pairs.sort_by_key(|p| p.0);
        let chain = Simplex::new(pairs.iter().map(|p| p.0).collect()).expect("distinct chain members");
        (chain, pairs.into_iter().map(|p| p.1).collect())
    }
}
