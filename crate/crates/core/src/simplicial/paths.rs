use serde::{Deserialize, Serialize};

use super::{Complex, Simplex};
use crate::error::{Error, Result};

/// A vertex sequence in which consecutive vertices span an edge or repeat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplicialPath(Vec<usize>);

impl SimplicialPath {
    pub fn new(vertices: Vec<usize>) -> SimplicialPath {
        SimplicialPath(vertices)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn start(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn end(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn is_closed(&self) -> bool {
        !self.0.is_empty() && self.0.first() == self.0.last()
    }

    pub fn reversed(&self) -> SimplicialPath {
        SimplicialPath(self.0.iter().rev().copied().collect())
    }

    /// `self * other`; the end of `self` must be the start of `other`.
    pub fn concat(&self, other: &SimplicialPath) -> Result<SimplicialPath> {
        if self.end() != other.start() {
            return Err(Error::InvalidPath("paths do not meet".into()));
        }
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0[1..]);
        Ok(SimplicialPath(v))
    }

    pub fn validate(&self, x: &Complex) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::InvalidPath("empty vertex list".into()));
        }
        if let Some(v) = self.0.iter().find(|v| !x.has_vertex(**v)) {
            return Err(Error::UnknownVertex(*v));
        }
        for w in self.0.windows(2) {
            if w[0] != w[1] && !x.has_edge(w[0], w[1]) {
                return Err(Error::InvalidPath(format!("({}, {}) is not an edge", w[0], w[1])));
            }
        }
        Ok(())
    }

    /// Removes repeated consecutive vertices.
    pub fn without_repeats(&self) -> SimplicialPath {
        let mut v = self.0.clone();
        v.dedup();
        SimplicialPath(v)
    }
}

/// An elementary loop move at a position of the current vertex list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum Move {
    /// `a ↦ a, via, a` at `position`.
    BacktrackInsert { position: usize, via: usize },
    /// `a, b, a ↦ a` starting at `position`.
    BacktrackDelete { position: usize },
    /// `a ↦ a, b, c, a` at `position` for a 2-simplex `{a, b, c}`.
    TriangleInsert { position: usize, via: (usize, usize) },
    /// `a, b, c, a ↦ a` starting at `position` for a 2-simplex `{a, b, c}`.
    TriangleDelete { position: usize },
}

impl Move {
    pub fn is_triangle(&self) -> bool {
        matches!(self, Move::TriangleInsert { .. } | Move::TriangleDelete { .. })
    }
}

/// A sequence of moves that turns a loop into the constant loop.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionWitness {
    pub moves: Vec<Move>,
}

/// Outcome of replaying a witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    /// Number of triangle moves: an upper bound for the homotopical complexity.
    pub complexity: usize,
    pub moves: usize,
}

fn is_triangle(x: &Complex, a: usize, b: usize, c: usize) -> bool {
    Simplex::new(vec![a, b, c]).map(|t| x.contains(&t)).unwrap_or(false)
}

fn apply_move(x: &Complex, l: &mut Vec<usize>, m: &Move) -> std::result::Result<(), String> {
    match *m {
        Move::BacktrackInsert { position, via } => {
            let a = *l.get(position).ok_or("position out of range")?;
            if !x.has_edge(a, via) {
                return Err(format!("({a}, {via}) is not an edge"));
            }
            l.splice(position + 1..position + 1, [via, a]);
        }
        Move::BacktrackDelete { position } => {
            if position + 2 >= l.len() || l[position] != l[position + 2] {
                return Err("no backtrack at this position".into());
            }
            l.drain(position + 1..position + 3);
        }
        Move::TriangleInsert { position, via: (b, c) } => {
            let a = *l.get(position).ok_or("position out of range")?;
            if !is_triangle(x, a, b, c) {
                return Err(format!("{{{a}, {b}, {c}}} is not a 2-simplex"));
            }
            l.splice(position + 1..position + 1, [b, c, a]);
        }
        Move::TriangleDelete { position } => {
            if position + 3 >= l.len() || l[position] != l[position + 3] {
                return Err("no triangle loop at this position".into());
            }
            let (a, b, c) = (l[position], l[position + 1], l[position + 2]);
            if !is_triangle(x, a, b, c) {
                return Err(format!("{{{a}, {b}, {c}}} is not a 2-simplex"));
            }
            l.drain(position + 1..position + 4);
        }
    }
    Ok(())
}

/// Replays a witness on a closed loop (repeated vertices are collapsed
/// first, they do not affect transport). Succeeds when the result is the
/// constant loop.
pub fn apply_witness(x: &Complex, loop_: &SimplicialPath, witness: &ContractionWitness) -> Result<WitnessReport> {
    loop_.validate(x)?;
    if !loop_.is_closed() {
        return Err(Error::InvalidPath("loop is not closed".into()));
    }
    let mut l = loop_.without_repeats().0;
    for (index, m) in witness.moves.iter().enumerate() {
        apply_move(x, &mut l, m).map_err(|reason| Error::InvalidWitness { index, reason })?;
    }
    if l.len() != 1 {
        return Err(Error::InvalidWitness {
            index: witness.moves.len(),
            reason: format!("moves end at {l:?}, not at the constant loop"),
        });
    }
    Ok(WitnessReport {
        complexity: witness.moves.iter().filter(|m| m.is_triangle()).count(),
        moves: witness.moves.len(),
    })
}

/// Searches for a contraction of a closed loop: first by coning over a
/// vertex that spans a triangle with every edge of the loop, otherwise by
/// shortcutting consecutive triangle corners and then trying to cone again.
pub fn synthesize_witness(x: &Complex, loop_: &SimplicialPath) -> Option<ContractionWitness> {
    if loop_.validate(x).is_err() || !loop_.is_closed() {
        return None;
    }
    let l = loop_.without_repeats().0;
    if let Some(w) = cone_any(x, &l) {
        return Some(w);
    }
    let mut moves = Vec::new();
    let mut l = l;
    loop {
        if l.len() == 1 {
            return Some(ContractionWitness { moves });
        }
        if let Some(p) = (0..l.len().saturating_sub(2)).find(|&p| l[p] == l[p + 2]) {
            let m = Move::BacktrackDelete { position: p };
            apply_move(x, &mut l, &m).ok()?;
            moves.push(m);
            continue;
        }
        let corner = (0..l.len().saturating_sub(2)).find(|&p| is_triangle(x, l[p], l[p + 1], l[p + 2]));
        if let Some(p) = corner {
            // a, b, c  ->  a, b, c, a, c  ->  a, c
            let first = Move::BacktrackInsert { position: p + 2, via: l[p] };
            apply_move(x, &mut l, &first).ok()?;
            let second = Move::TriangleDelete { position: p };
            apply_move(x, &mut l, &second).ok()?;
            moves.push(first);
            moves.push(second);
            continue;
        }
        let rest = cone_any(x, &l)?;
        moves.extend(rest.moves);
        return Some(ContractionWitness { moves });
    }
}

fn cone_any(x: &Complex, l: &[usize]) -> Option<ContractionWitness> {
    x.vertices().iter().find_map(|&apex| cone_over(x, l, apex))
}

/// Contracts `l` through triangles `{apex, vᵢ, vᵢ₊₁}`.
fn cone_over(x: &Complex, l: &[usize], apex: usize) -> Option<ContractionWitness> {
    let fits = l.windows(2).all(|w| w[0] == apex || w[1] == apex || is_triangle(x, apex, w[0], w[1]));
    if !fits {
        return None;
    }
    if l.len() > 1 && l[0] != apex && !x.has_edge(l[0], apex) {
        return None;
    }
    let mut cur = l.to_vec();
    let mut moves = Vec::new();
    let mut push = |cur: &mut Vec<usize>, m: Move| -> Option<()> {
        apply_move(x, cur, &m).ok()?;
        moves.push(m);
        Some(())
    };
    let p = if cur[0] == apex || cur.len() == 1 {
        0
    } else {
        push(&mut cur, Move::BacktrackInsert { position: 0, via: apex })?;
        1
    };
    while p + 2 < cur.len() {
        let b = cur[p + 2];
        if b == apex {
            push(&mut cur, Move::BacktrackDelete { position: p })?;
        } else {
            push(&mut cur, Move::BacktrackInsert { position: p + 2, via: apex })?;
            push(&mut cur, Move::TriangleDelete { position: p })?;
        }
    }
    if cur.len() == 3 {
        push(&mut cur, Move::BacktrackDelete { position: 0 })?;
    }
    (cur.len() == 1).then_some(ContractionWitness { moves })
}
