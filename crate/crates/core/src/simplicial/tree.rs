use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Complex, SimplicialPath};
use crate::error::{Error, Result};

/// A spanning tree of the 1-skeleton, rooted at its least vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    root: usize,
    edges: BTreeSet<(usize, usize)>,
    parent: BTreeMap<usize, usize>,
    depth: BTreeMap<usize, usize>,
    order: Vec<usize>,
}

/// Breadth-first spanning tree from the least vertex, visiting neighbours in
/// increasing order.
pub fn maximal_tree(x: &Complex) -> Result<Tree> {
    let Some(&root) = x.vertices().first() else {
        return Err(Error::InvalidComplex("empty complex".into()));
    };
    let mut parent = BTreeMap::new();
    let mut depth = BTreeMap::from([(root, 0)]);
    let mut edges = BTreeSet::new();
    let mut order = vec![root];
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for w in x.neighbours(v) {
            if depth.contains_key(&w) {
                continue;
            }
            depth.insert(w, depth[&v] + 1);
            parent.insert(w, v);
            edges.insert((v.min(w), v.max(w)));
            order.push(w);
            queue.push_back(w);
        }
    }
    if order.len() != x.vertices().len() {
        return Err(Error::Disconnected);
    }
    Ok(Tree { root, edges, parent, depth, order })
}

impl Tree {
    /// Builds a tree from an explicit edge set, checking that it spans `x`
    /// without cycles.
    pub fn from_edges(x: &Complex, edges: &[(usize, usize)]) -> Result<Tree> {
        let set: BTreeSet<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        for &(a, b) in &set {
            if !x.has_edge(a, b) {
                return Err(Error::NotASimplex(vec![a, b]));
            }
        }
        if set.len() + 1 != x.vertices().len() {
            return Err(Error::Precondition("a spanning tree has one edge fewer than vertices".into()));
        }
        let root = x.vertices()[0];
        let mut parent = BTreeMap::new();
        let mut depth = BTreeMap::from([(root, 0)]);
        let mut order = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(a, b) in &set {
                let w = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if depth.contains_key(&w) {
                    continue;
                }
                depth.insert(w, depth[&v] + 1);
                parent.insert(w, v);
                order.push(w);
                queue.push_back(w);
            }
        }
        if order.len() != x.vertices().len() {
            return Err(Error::Precondition("edges do not span the complex".into()));
        }
        Ok(Tree { root, edges: set, parent, depth, order })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn contains_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent.get(&v).copied()
    }

    /// Vertices in breadth-first order; every vertex after the root has its
    /// parent earlier in the list.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// The unique tree path from `a` to `b`.
    pub fn path(&self, a: usize, b: usize) -> SimplicialPath {
        let mut up_a = vec![a];
        let mut up_b = vec![b];
        let (mut x, mut y) = (a, b);
        while self.depth[&x] > self.depth[&y] {
            x = self.parent[&x];
            up_a.push(x);
        }
        while self.depth[&y] > self.depth[&x] {
            y = self.parent[&y];
            up_b.push(y);
        }
        while x != y {
            x = self.parent[&x];
            y = self.parent[&y];
            up_a.push(x);
            up_b.push(y);
        }
        up_b.pop();
        up_a.extend(up_b.into_iter().rev());
        SimplicialPath::new(up_a)
    }

    /// Edges of `x` outside the tree, sorted.
    pub fn non_tree_edges(&self, x: &Complex) -> Vec<(usize, usize)> {
        x.of_dim(1)
            .map(|e| (e.vertices()[0], e.vertices()[1]))
            .filter(|&(a, b)| !self.contains_edge(a, b))
            .collect()
    }
}

/// A generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "(usize, i8)", try_from = "(usize, i8)")]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize) -> Letter {
        Letter { generator, inverse: false }
    }

    pub fn inv(generator: usize) -> Letter {
        Letter { generator, inverse: true }
    }

    pub fn inverted(self) -> Letter {
        Letter { generator: self.generator, inverse: !self.inverse }
    }
}

impl From<Letter> for (usize, i8) {
    fn from(l: Letter) -> Self {
        (l.generator, if l.inverse { -1 } else { 1 })
    }
}

impl TryFrom<(usize, i8)> for Letter {
    type Error = Error;
    fn try_from((generator, power): (usize, i8)) -> Result<Self> {
        match power {
            1 => Ok(Letter::new(generator)),
            -1 => Ok(Letter::inv(generator)),
            _ => Err(Error::Format(format!("letter exponent {power} is not ±1"))),
        }
    }
}

/// A word in the free group, written in composition order: the word
/// `[l₁, l₂, l₃]` stands for `l₁·l₂·l₃`, and as a loop it traverses `l₃`
/// first. With this convention transport of the expanded loop equals the
/// word evaluated on transports.
pub type Word = Vec<Letter>;

/// Inverse word.
pub fn invert_word(w: &[Letter]) -> Word {
    w.iter().rev().map(|l| l.inverted()).collect()
}

/// A finite presentation, optionally realized by loops in a complex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Presentation {
    pub generators: Vec<String>,
    pub relations: Vec<Word>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generator_loops: Vec<SimplicialPath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<usize>,
}

impl Presentation {
    /// A presentation without loop data.
    pub fn abstract_group(generators: &[&str], relations: Vec<Word>) -> Presentation {
        Presentation {
            generators: generators.iter().map(|s| s.to_string()).collect(),
            relations,
            generator_loops: Vec::new(),
            basepoint: None,
        }
    }

    pub fn generator_index(&self, label: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == label)
    }

    pub fn check_word(&self, w: &[Letter]) -> Result<()> {
        match w.iter().find(|l| l.generator >= self.generators.len()) {
            Some(l) => Err(Error::Missing(format!("generator {}", l.generator))),
            None => Ok(()),
        }
    }

    /// The loop realizing a word: generator loops concatenated from the last
    /// letter to the first, inverse letters traversed backwards.
    pub fn expand_word(&self, w: &[Letter]) -> Result<SimplicialPath> {
        self.check_word(w)?;
        let base = self
            .basepoint
            .ok_or_else(|| Error::Missing("presentation has no basepoint".into()))?;
        if self.generator_loops.len() != self.generators.len() {
            return Err(Error::Missing("presentation has no generator loops".into()));
        }
        let mut vertices = vec![base];
        for l in w.iter().rev() {
            let path = &self.generator_loops[l.generator];
            let seg = if l.inverse { path.reversed() } else { path.clone() };
            vertices.extend_from_slice(&seg.vertices()[1..]);
        }
        Ok(SimplicialPath::new(vertices))
    }

    /// Abelianized relation matrix (relations × generators).
    pub fn relation_matrix(&self) -> Vec<Vec<i64>> {
        self.relations
            .iter()
            .map(|r| {
                let mut row = vec![0; self.generators.len()];
                for l in r {
                    row[l.generator] += if l.inverse { -1 } else { 1 };
                }
                row
            })
            .collect()
    }
}

/// One generator per edge outside the tree; its loop runs along the tree to
/// the edge, across it from the smaller to the larger vertex, and back. One
/// relation per 2-simplex: the boundary `v₀→v₁→v₂→v₀` with tree edges dropped.
pub fn presentation_from_tree(x: &Complex, tree: &Tree, basepoint: usize) -> Result<Presentation> {
    if !x.has_vertex(basepoint) {
        return Err(Error::UnknownVertex(basepoint));
    }
    let edges = tree.non_tree_edges(x);
    let lookup: BTreeMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut generators = Vec::new();
    let mut loops = Vec::new();
    for &(a, b) in &edges {
        generators.push(format!("e{a}-{b}"));
        let mut v = tree.path(basepoint, a).vertices().to_vec();
        v.extend_from_slice(tree.path(b, basepoint).vertices());
        loops.push(SimplicialPath::new(v));
    }
    let mut relations = Vec::new();
    for t in x.of_dim(2) {
        let v = t.vertices();
        let mut traversal = Vec::new();
        for (p, q) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
            if let Some(&g) = lookup.get(&(p.min(q), p.max(q))) {
                traversal.push(Letter { generator: g, inverse: p > q });
            }
        }
        traversal.reverse();
        relations.push(traversal);
    }
    Ok(Presentation { generators, relations, generator_loops: loops, basepoint: Some(basepoint) })
}
