//! Chern numbers of bundles over closed oriented surfaces, `(c, ε)`-flatness
//! checks and finite-depth K-area probes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bundle::CocycleBundle;
use crate::error::{Error, Result};
use crate::fixtures::{torus_presentation, torus_rep};
use crate::matrixcore::unitary_eigen_angles;
use crate::quasirep::{clock_shift, rep_to_bundle_with_depth};
use crate::simplicial::{Simplex, SimplicialPath};
use crate::transport::{hc_constants, loop_defect, path_transport};

/// Faces whose transport has an eigen-angle beyond `π − FLUX_MARGIN` are refused.
pub const FLUX_MARGIN: f64 = 0.1;
/// Largest accepted distance of `Σ flux / 2π` from an integer.
pub const CHERN_RESIDUE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceFlux {
    pub face: Simplex,
    pub flux: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernReport {
    pub chern: i64,
    pub total_flux: f64,
    pub residue: f64,
    pub faces: Vec<FaceFlux>,
}

/// Flux through an oriented face: the sum of the principal eigen-angles of
/// transport around its boundary, read from its first vertex.
pub fn face_flux(e: &CocycleBundle, face: &Simplex) -> Result<f64> {
    let l = e.base().oriented_loop(face)?;
    let t = path_transport(e, &l)?.matrix;
    let angles = unitary_eigen_angles(&t);
    if let Some(a) = angles.iter().find(|a| a.abs() > PI - FLUX_MARGIN) {
        return Err(Error::AmbiguousFlux { face: face.vertices().to_vec(), flux: *a });
    }
    Ok(angles.iter().sum())
}

pub fn chern_report(e: &CocycleBundle) -> Result<ChernReport> {
    e.base().check_closed_surface()?;
    let faces = e
        .base()
        .of_dim(2)
        .map(|f| Ok(FaceFlux { face: f.clone(), flux: face_flux(e, f)? }))
        .collect::<Result<Vec<_>>>()?;
    let total_flux: f64 = faces.iter().map(|f| f.flux).sum();
    let ratio = total_flux / (2.0 * PI);
    let chern = ratio.round();
    let residue = (ratio - chern).abs();
    if residue > CHERN_RESIDUE {
        return Err(Error::Threshold { what: "distance of the total flux from 2πℤ".into(), value: residue, limit: CHERN_RESIDUE });
    }
    Ok(ChernReport { chern: chern as i64, total_flux, residue, faces })
}

/// First Chern number of a bundle over a closed oriented surface.
pub fn chern_number(e: &CocycleBundle) -> Result<i64> {
    Ok(chern_report(e)?.chern)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopCheck {
    #[serde(rename = "loop")]
    pub loop_: SimplicialPath,
    pub weight: f64,
    pub defect: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CFlatReport {
    pub epsilon: f64,
    pub pass: bool,
    pub first_failure: Option<usize>,
    pub max_ratio: f64,
    pub loops: Vec<LoopCheck>,
}

/// Checks `‖T_Γ − id‖ ≤ c(Γ)·ε` on each weighted loop.
pub fn c_flat_check(e: &CocycleBundle, loops: &[(SimplicialPath, f64)], eps: f64) -> Result<CFlatReport> {
    let mut rows = Vec::with_capacity(loops.len());
    let mut max_ratio: f64 = 0.0;
    for (l, w) in loops {
        let defect = loop_defect(e, l)?;
        let bound = w * eps;
        if defect > 0.0 {
            max_ratio = max_ratio.max(if *w > 0.0 { defect / w } else { f64::INFINITY });
        }
        rows.push(LoopCheck { loop_: l.clone(), weight: *w, defect, bound, pass: defect <= bound + 1e-12 });
    }
    let first_failure = rows.iter().position(|r| !r.pass);
    Ok(CFlatReport { epsilon: eps, pass: first_failure.is_none(), first_failure, max_ratio, loops: rows })
}

/// Boundary loops of the oriented triangles, each with weight `c(1)`.
pub fn face_loops(e: &CocycleBundle) -> Result<Vec<(SimplicialPath, f64)>> {
    let (c1, _) = hc_constants(1)?;
    e.base().of_dim(2).map(|f| Ok((e.base().oriented_loop(f)?, c1))).collect()
}

#[derive(Debug, Clone)]
pub struct ProbeTerm {
    pub label: String,
    pub bundle: CocycleBundle,
    pub epsilon: f64,
    pub chern: i64,
}

/// A finite sequence of bundles on one surface with their flatness and
/// Chern numbers, checked on a fixed set of weighted loops.
#[derive(Debug, Clone)]
pub struct KAreaProbe {
    pub terms: Vec<ProbeTerm>,
    pub loops: Vec<(SimplicialPath, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub label: String,
    pub rank: usize,
    pub epsilon: f64,
    pub chern: i64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub witness: bool,
    pub depth: usize,
    pub reason: Option<String>,
    pub rows: Vec<ProbeRow>,
}

/// Positive iff the Chern number is constant and non-zero, `ε` strictly
/// decreases and every term is `(c, ε)`-flat on the probe loops.
pub fn probe_verdict(p: &KAreaProbe) -> Result<ProbeReport> {
    let mut rows = Vec::with_capacity(p.terms.len());
    for t in &p.terms {
        let check = c_flat_check(&t.bundle, &p.loops, t.epsilon)?;
        rows.push(ProbeRow {
            label: t.label.clone(),
            rank: t.bundle.rank(),
            epsilon: t.epsilon,
            chern: t.chern,
            pass: check.pass,
        });
    }
    let reason = if rows.is_empty() {
        Some("empty sequence".to_string())
    } else if rows.iter().any(|r| r.chern != rows[0].chern) {
        Some("chern number is not constant".to_string())
    } else if rows[0].chern == 0 {
        Some("chern number is zero".to_string())
    } else if rows.windows(2).any(|w| w[1].epsilon >= w[0].epsilon) {
        Some("flatness does not strictly decrease".to_string())
    } else {
        rows.iter().find(|r| !r.pass).map(|r| format!("term {} fails the loop bounds", r.label))
    };
    Ok(ProbeReport { witness: reason.is_none(), depth: rows.len(), reason, rows })
}

/// Probe built from clock and shift representations of size `k` transferred
/// to the 7-vertex torus, with the face boundaries as loops.
pub fn clock_shift_probe(ks: &[usize], depth: u32) -> Result<KAreaProbe> {
    let (x, tree, p) = torus_presentation();
    let mut terms = Vec::with_capacity(ks.len());
    for &k in ks {
        let phi = torus_rep(&clock_shift(k)?, &p)?;
        let bundle = rep_to_bundle_with_depth(&phi, &x, &tree, &p, depth)?;
        let chern = chern_number(&bundle)?;
        let epsilon = bundle.audit();
        terms.push(ProbeTerm { label: format!("k={k}"), bundle, epsilon, chern });
    }
    let loops = match terms.first() {
        Some(t) => face_loops(&t.bundle)?,
        None => Vec::new(),
    };
    Ok(KAreaProbe { terms, loops })
}
