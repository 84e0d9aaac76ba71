use std::collections::BTreeMap;

use super::{simplex_pairs, CocycleBundle};
use crate::error::{Error, Result};
use crate::matrixcore::{polar_project, CMatrix};
use crate::sampled::SampledMap;
use crate::simplicial::{barycentric_subdivide, Complex, Simplex, Subdivision};
use crate::trivialize::trivialize_contractible;

const CARRIER_TOL: f64 = 1e-12;

impl CocycleBundle {
    /// Transfers the bundle to the barycentric subdivision. A lattice point
    /// `x'` of an `S(X)`-simplex is sent by `Ξ` to a point `p` of `X` with
    /// carrier `T₀`; with `Ĩ_{T₀⊂T}` the polar projection of the piecewise
    /// linear interpolation of `Ψ_{T₀⊂T}` at `p`, the new transition is
    /// `Ψ'_{ρ'⊂σ'}(x') = Ĩ_{T₀⊂∪ρ'}(p)⁻¹·Ĩ_{T₀⊂∪σ'}(p)`. At lattice points of
    /// `X` this is `Ψ_{∪ρ'⊂∪σ'}(p)`, and the result is a cocycle by construction.
    pub fn to_subdivision(&self) -> Result<(Subdivision, CocycleBundle)> {
        let sub = barycentric_subdivide(self.base());
        let s = &sub.complex;
        let m = self.depth();
        let mut transitions = BTreeMap::new();
        for (i, j) in simplex_pairs(s) {
            let rho_s = s.simplex(i);
            if i == j {
                transitions.insert((i, j), SampledMap::identity(rho_s.dim(), m, self.rank()));
                continue;
            }
            let t_sigma = sub.top(s.simplex(j)).clone();
            let map = SampledMap::try_from_fn(rho_s.dim(), m, |nums, _| {
                let (t_rho, coords) = sub.xi(rho_s, nums, m);
                let local: Vec<usize> = (0..coords.len()).filter(|&k| coords[k] > CARRIER_TOL).collect();
                let t0 = t_rho.sub(&local);
                let mut c0: Vec<f64> = local.iter().map(|&k| coords[k]).collect();
                let total: f64 = c0.iter().sum();
                c0.iter_mut().for_each(|c| *c /= total);
                let lift = |t: &Simplex| -> Result<CMatrix> {
                    if t == &t0 {
                        return Ok(CMatrix::identity(self.rank()));
                    }
                    polar_project(&self.transition(&t0, t)?.interpolate(&c0))
                };
                Ok(&lift(&t_rho)?.adjoint() * &lift(&t_sigma)?)
            })?;
            transitions.insert((i, j), map);
        }
        let bundle = CocycleBundle::assemble(s.clone(), self.rank(), m, transitions)?;
        Ok((sub, bundle))
    }

    /// Transfers a bundle on `S(X)` back to `X`. Over each simplex `ρ` of `X`
    /// the restriction to `S(ρ)` is trivialized, gauge-fixed so that the chart
    /// at the barycenter vertex is the identity, and the new transitions are
    /// the quotients `C^ρ(x')⁻¹·C^σ(x')` of these charts, read at the exact
    /// preimage `x'` of each lattice point.
    pub fn from_subdivision(&self, x: &Complex, sub: &Subdivision) -> Result<CocycleBundle> {
        if self.base() != &sub.complex || sub.labels.as_slice() != x.simplices() {
            return Err(Error::Mismatch("bundle base is not the subdivision of the given complex".into()));
        }
        let m = self.depth();
        let mut local_charts: Vec<(Complex, Vec<SampledMap>)> = Vec::with_capacity(x.len());
        for (r, rho) in x.simplices().iter().enumerate() {
            let chains: Vec<Simplex> = sub
                .complex
                .simplices()
                .iter()
                .filter(|c| sub.top(c).is_face_of(rho))
                .cloned()
                .collect();
            let s_rho = Complex::from_simplices(chains);
            let restricted = self.restrict_to(&s_rho)?;
            let triv = trivialize_contractible(&restricted)?;
            let centre = s_rho.require(&Simplex::vertex(r))?;
            let g = triv.charts[centre].value(0).adjoint();
            local_charts.push((s_rho, triv.gauge(&g).charts));
        }
        let mut transitions = BTreeMap::new();
        for (i, j) in simplex_pairs(x) {
            let rho = x.simplex(i);
            if i == j {
                transitions.insert((i, j), SampledMap::identity(rho.dim(), m, self.rank()));
                continue;
            }
            let (s_rho, c_rho) = &local_charts[i];
            let (s_sigma, c_sigma) = &local_charts[j];
            let map = SampledMap::try_from_fn(rho.dim(), m, |nums, _| {
                let (chain, inner) = sub.xi_inverse(x, rho, nums);
                let a = &c_rho[s_rho.require(&chain)?];
                let b = &c_sigma[s_sigma.require(&chain)?];
                let p = a.lattice().index_of(&inner).unwrap();
                Ok(&a.value(p).adjoint() * b.value(p))
            })?;
            transitions.insert((i, j), map);
        }
        CocycleBundle::assemble(x.clone(), self.rank(), m, transitions)
    }
}
