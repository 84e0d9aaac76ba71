//! Simplicial parallel transport and certified loop bounds.

use serde::{Deserialize, Serialize};

use crate::bundle::CocycleBundle;
use crate::error::{Error, Result};
use crate::matrixcore::CMatrix;
use crate::simplicial::{apply_witness, ContractionWitness, Simplex, SimplicialPath};

/// Slack added to certified bounds to absorb rounding in long products.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// Transport along a path, from the chart of its first vertex to the chart
/// of its last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    pub matrix: CMatrix,
    pub path: SimplicialPath,
}

/// Outcome of checking a loop against `c(n)·ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    #[serde(rename = "loop")]
    pub loop_: SimplicialPath,
    pub complexity: usize,
    pub audit: f64,
    pub defect: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `Ψ_{b⊂e}(b)·Ψ_{a⊂e}(a)⁻¹` for the edge `e = {a, b}`; the identity when `a = b`.
pub fn edge_transport(e: &CocycleBundle, a: usize, b: usize) -> Result<CMatrix> {
    if a == b {
        if !e.base().has_vertex(a) {
            return Err(Error::UnknownVertex(a));
        }
        return Ok(CMatrix::identity(e.rank()));
    }
    let edge = Simplex::edge(a, b)?;
    if !e.base().contains(&edge) {
        return Err(Error::NotASimplex(edge.vertices().to_vec()));
    }
    let into_b = e.transition(&Simplex::vertex(b), &edge)?.value(0);
    let into_a = e.transition(&Simplex::vertex(a), &edge)?.value(0);
    Ok(into_b * &into_a.adjoint())
}

/// Ordered product `T_{(v_{k−1},v_k)}⋯T_{(v₀,v₁)}`.
pub fn path_transport(e: &CocycleBundle, path: &SimplicialPath) -> Result<TransportResult> {
    path.validate(e.base())?;
    let mut matrix = CMatrix::identity(e.rank());
    for w in path.vertices().windows(2) {
        if w[0] != w[1] {
            matrix = &edge_transport(e, w[0], w[1])? * &matrix;
        }
    }
    Ok(TransportResult { matrix, path: path.clone() })
}

/// `‖T_Γ − id‖` for a closed path.
pub fn loop_defect(e: &CocycleBundle, loop_: &SimplicialPath) -> Result<f64> {
    if !loop_.is_closed() {
        return Err(Error::InvalidPath("loop is not closed".into()));
    }
    Ok(path_transport(e, loop_)?.matrix.distance_to_identity())
}

/// The constants `(c(n), δ(n))` of the transport bound for loops of
/// homotopical complexity `n`: `c(1) = 7√2`, `c(n) = 3·max{c(1), c(n−1)}`,
/// `δ(1) = 1/(7√2)`, `δ(n) = min{c(1)⁻¹, c(n−1)⁻¹, δ(n−1)}`.
pub fn hc_constants(n: usize) -> Result<(f64, f64)> {
    if n < 1 {
        return Err(Error::Precondition("complexity must be at least 1".into()));
    }
    let c1 = 7.0 * std::f64::consts::SQRT_2;
    let (mut c, mut delta) = (c1, 1.0 / c1);
    for _ in 2..=n {
        let next_delta = (1.0 / c1).min(1.0 / c).min(delta);
        c = 3.0 * c1.max(c);
        delta = next_delta;
    }
    Ok((c, delta))
}

/// Bound and threshold for a witness of the given complexity; complexity 0
/// (backtracks only) gives an exact identity.
pub fn witness_constants(complexity: usize) -> (f64, f64) {
    if complexity == 0 {
        (0.0, f64::INFINITY)
    } else {
        hc_constants(complexity).expect("complexity is positive")
    }
}

/// Replays the witness and compares `‖T_Γ − id‖` with `c(n)·ε`, where `n`
/// is the witness complexity and `ε` the measured flatness.
pub fn verify_witnessed_bound(
    e: &CocycleBundle,
    loop_: &SimplicialPath,
    witness: &ContractionWitness,
) -> Result<TransportReport> {
    let audit = e.audit();
    verify_with_audit(e, loop_, witness, audit)
}

pub(crate) fn verify_with_audit(
    e: &CocycleBundle,
    loop_: &SimplicialPath,
    witness: &ContractionWitness,
    audit: f64,
) -> Result<TransportReport> {
    let replay = apply_witness(e.base(), loop_, witness)?;
    let (c, delta) = witness_constants(replay.complexity);
    if audit > delta {
        return Err(Error::Threshold {
            what: format!("flatness for a loop of witnessed complexity {}", replay.complexity),
            value: audit,
            limit: delta,
        });
    }
    let defect = loop_defect(e, loop_)?;
    let bound = c * audit;
    Ok(TransportReport {
        loop_: loop_.clone(),
        complexity: replay.complexity,
        audit,
        defect,
        bound,
        pass: defect <= bound + ROUNDING_SLACK,
    })
}
