use serde::{Deserialize, Serialize};

use super::{simplex_pairs, CocycleBundle};
use crate::error::{Error, Result};
use crate::matrixcore::{op_norm, CMatrix};
use crate::sampled::SampledMap;
use crate::simplicial::embed_numerators;
use crate::trivialize::LoopCertificate;

/// One chart `C_ρ` per simplex (indexed like the base), compatible with the
/// cocycle: `C_τ = Ψ_{τ⊂ρ}·C_ρ` on `|τ|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalTrivialization {
    pub charts: Vec<SampledMap>,
    #[serde(default)]
    pub certificates: Vec<LoopCertificate>,
}

/// Per-simplex conjugators `Ξ_ρ` with `Ψ'_{τ⊂ρ}·Ξ_ρ = Ξ_τ·Ψ_{τ⊂ρ}` on `|τ|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleIso {
    pub conjugators: Vec<SampledMap>,
}

fn max_lipschitz(maps: &[SampledMap]) -> f64 {
    maps.iter().map(|m| m.lipschitz_estimate()).fold(0.0, f64::max)
}

impl GlobalTrivialization {
    pub fn chart(&self, i: usize) -> &SampledMap {
        &self.charts[i]
    }

    /// Largest chart Lipschitz estimate.
    pub fn lipschitz(&self) -> f64 {
        max_lipschitz(&self.charts)
    }

    /// Largest `‖C_τ(x) − Ψ_{τ⊂ρ}(x)·C_ρ(x)‖`.
    pub fn compatibility_residual(&self, e: &CocycleBundle) -> Result<f64> {
        let base = e.base();
        if self.charts.len() != base.len() {
            return Err(Error::Mismatch("one chart per simplex expected".into()));
        }
        let mut out: f64 = 0.0;
        for (t, r) in simplex_pairs(base) {
            if t == r {
                continue;
            }
            let (tau, rho) = (base.simplex(t), base.simplex(r));
            let psi = e.transition_at(t, r);
            let lattice = psi.lattice();
            let rho_lattice = self.charts[r].lattice();
            for (p, nums) in lattice.points().iter().enumerate() {
                let up = rho_lattice.index_of(&embed_numerators(tau, rho, nums)).unwrap();
                let rhs = psi.value(p) * self.charts[r].value(up);
                out = out.max(op_norm(&(self.charts[t].value(p) - &rhs)));
            }
        }
        Ok(out)
    }

    /// Right multiplication of every chart by a constant unitary.
    pub fn gauge(&self, g: &CMatrix) -> GlobalTrivialization {
        GlobalTrivialization {
            charts: self.charts.iter().map(|c| c.map(|v| v * g)).collect(),
            certificates: self.certificates.clone(),
        }
    }
}

impl BundleIso {
    pub fn lipschitz(&self) -> f64 {
        max_lipschitz(&self.conjugators)
    }

    /// Largest `‖Ψ'_{τ⊂ρ}(x)·Ξ_ρ(x) − Ξ_τ(x)·Ψ_{τ⊂ρ}(x)‖`.
    pub fn intertwining_residual(&self, e: &CocycleBundle, e2: &CocycleBundle) -> Result<f64> {
        let base = e.base();
        if base != e2.base() || self.conjugators.len() != base.len() {
            return Err(Error::Mismatch("iso, bundles and base disagree".into()));
        }
        let mut out: f64 = 0.0;
        for (t, r) in simplex_pairs(base) {
            if t == r {
                continue;
            }
            let (tau, rho) = (base.simplex(t), base.simplex(r));
            let psi = e.transition_at(t, r);
            let psi2 = e2.transition_at(t, r);
            let lattice = psi.lattice();
            let rho_lattice = self.conjugators[r].lattice();
            for (p, nums) in lattice.points().iter().enumerate() {
                let up = rho_lattice.index_of(&embed_numerators(tau, rho, nums)).unwrap();
                let lhs = psi2.value(p) * self.conjugators[r].value(up);
                let rhs = self.conjugators[t].value(p) * psi.value(p);
                out = out.max(op_norm(&(&lhs - &rhs)));
            }
        }
        Ok(out)
    }
}
