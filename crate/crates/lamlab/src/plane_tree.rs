//! Rooted ordered trees stored as flat arrays in depth-first (lexicographic) order.
//!
//! Vertex `i` of a [`PlaneTree`] is always the `i`-th vertex visited by the
//! depth-first exploration that takes children from left to right, so vertex 0 is
//! the root. All traversals are iterative.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const NO_PARENT: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("a tree needs at least one vertex")]
    Empty,
    #[error("expected exactly one root, found {0}")]
    RootCount(usize),
    #[error("parent index {parent} of vertex {vertex} is out of range")]
    ParentOutOfRange { vertex: usize, parent: usize },
    #[error("parent array contains a cycle or a vertex unreachable from the root")]
    NotATree,
    #[error("invalid Lukasiewicz path: {0}")]
    BadLukasiewicz(String),
    #[error("declared size {declared} differs from parent array length {actual}")]
    SizeMismatch { declared: usize, actual: usize },
}

/// Rooted plane tree with vertices numbered in depth-first order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlaneTree {
    parent: Vec<usize>,
    child_start: Vec<usize>,
    child_list: Vec<usize>,
}

/// Sampled path with a uniform time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticePath {
    /// Values at times `0, step, 2 step, ...`.
    pub values: Vec<f64>,
    /// Time increment between consecutive samples.
    pub step: f64,
    /// How the path is read between grid points.
    pub interpolation: Interpolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interpolation {
    Linear,
    Step,
}

impl LatticePath {
    pub fn linear(values: Vec<f64>, step: f64) -> Self {
        assert!(!values.is_empty(), "a path needs at least one sample");
        Self { values, step, interpolation: Interpolation::Linear }
    }

    pub fn step_path(values: Vec<f64>, step: f64) -> Self {
        assert!(!values.is_empty(), "a path needs at least one sample");
        Self { values, step, interpolation: Interpolation::Step }
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Self::step_path(values.iter().map(|&v| v as f64).collect(), 1.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Integer values, if every sample is an integer.
    pub fn as_ints(&self) -> Option<Vec<i64>> {
        self.values
            .iter()
            .map(|&v| if v.fract() == 0.0 && v.abs() < 9.0e15 { Some(v as i64) } else { None })
            .collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Which heavy-vertex notion [`PlaneTree::find_heavy_vertices`] should detect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeavyKind {
    /// Children can be split into two groups, each carrying at least `a` vertices.
    Node,
    /// At least two children have subtrees with at least `a` vertices.
    BranchingPoint,
}

/// Serialized form `{"n": .., "parents": [null, 0, ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub n: usize,
    pub parents: Vec<Option<usize>>,
}

impl PlaneTree {
    /// The tree with a single vertex.
    pub fn singleton() -> Self {
        Self { parent: vec![NO_PARENT], child_start: vec![0, 0], child_list: Vec::new() }
    }

    /// Build a tree from offspring counts listed in depth-first order.
    pub fn from_offspring(offspring: &[usize]) -> Result<Self, TreeError> {
        let n = offspring.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        let mut open: i64 = 1;
        for (i, &k) in offspring.iter().enumerate() {
            open += k as i64 - 1;
            if open == 0 && i + 1 < n {
                return Err(TreeError::BadLukasiewicz(format!(
                    "exploration ends early at vertex {i}"
                )));
            }
        }
        if open != 0 {
            return Err(TreeError::BadLukasiewicz(format!(
                "offspring counts sum to {} but {} are needed",
                offspring.iter().sum::<usize>(),
                n - 1
            )));
        }
        let mut child_start = Vec::with_capacity(n + 1);
        child_start.push(0);
        for &k in offspring {
            child_start.push(child_start.last().unwrap() + k);
        }
        let mut parent = vec![NO_PARENT; n];
        let mut child_list = vec![0; n - 1];
        let mut filled = vec![0usize; n];
        let mut stack: Vec<usize> = Vec::new();
        for v in 0..n {
            if let Some(&p) = stack.last() {
                parent[v] = p;
                child_list[child_start[p] + filled[p]] = v;
                filled[p] += 1;
                if filled[p] == offspring[p] {
                    stack.pop();
                }
            }
            if offspring[v] > 0 {
                stack.push(v);
            }
        }
        Ok(Self { parent, child_start, child_list })
    }

    /// Build a tree from a parent array; siblings are ordered by increasing index.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self, TreeError> {
        Self::from_parents_with_order(parents).map(|(t, _)| t)
    }

    /// Like [`PlaneTree::from_parents`], also returning `order` where `order[i]`
    /// is the input index of depth-first vertex `i`.
    pub fn from_parents_with_order(
        parents: &[Option<usize>],
    ) -> Result<(Self, Vec<usize>), TreeError> {
        let n = parents.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parents[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(TreeError::RootCount(roots.len()));
        }
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (v, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(TreeError::ParentOutOfRange { vertex: v, parent: p });
                }
                kids[p].push(v);
            }
        }
        Self::from_child_lists(&kids, roots[0])
    }

    /// Tree whose vertex `v` has the ordered children `kids[v]`, explored from
    /// `root`; also returns `order[i]`, the input index of depth-first vertex `i`.
    pub fn from_child_lists(
        kids: &[Vec<usize>],
        root: usize,
    ) -> Result<(Self, Vec<usize>), TreeError> {
        let n = kids.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            order.push(v);
            if order.len() > n {
                return Err(TreeError::NotATree);
            }
            stack.extend(kids[v].iter().rev());
        }
        if order.len() != n {
            return Err(TreeError::NotATree);
        }
        let offspring: Vec<usize> = order.iter().map(|&v| kids[v].len()).collect();
        Ok((Self::from_offspring(&offspring)?, order))
    }

    pub fn from_json(j: &TreeJson) -> Result<Self, TreeError> {
        if j.n != j.parents.len() {
            return Err(TreeError::SizeMismatch { declared: j.n, actual: j.parents.len() });
        }
        Self::from_parents(&j.parents)
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson { n: self.n(), parents: (0..self.n()).map(|v| self.parent(v)).collect() }
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (self.parent[v] != NO_PARENT).then_some(self.parent[v])
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.child_list[self.child_start[v]..self.child_start[v + 1]]
    }

    pub fn offspring(&self, v: usize) -> usize {
        self.child_start[v + 1] - self.child_start[v]
    }

    /// Offspring counts in depth-first order; this sequence determines the tree.
    pub fn offspring_counts(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.offspring(v)).collect()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.offspring(v) == 0
    }

    /// Heights of the contour exploration at integer times `0..=2n`.
    ///
    /// The walk spends times `0..=2n-2` on the edges and stays at the root on
    /// `[2n-2, 2n]`.
    pub fn contour_heights(&self) -> Vec<u64> {
        let n = self.n();
        let mut out = Vec::with_capacity(2 * n + 1);
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        out.push(0);
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < self.offspring(v) {
                let c = self.children(v)[*next];
                *next += 1;
                stack.push((c, 0));
                out.push(stack.len() as u64 - 1);
            } else {
                stack.pop();
                if !stack.is_empty() {
                    out.push(stack.len() as u64 - 1);
                }
            }
        }
        out.push(0);
        out.push(0);
        out
    }

    pub fn contour_path(&self) -> LatticePath {
        LatticePath::linear(self.contour_heights().into_iter().map(|h| h as f64).collect(), 1.0)
    }

    /// First and last visit times of every vertex by the contour exploration.
    /// The root is last visited at time `2n`.
    pub fn contour_visits(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.n();
        let sizes = self.subtree_sizes();
        let heights = self.heights();
        let mut first = vec![0; n];
        let mut last = vec![0; n];
        for v in 0..n {
            first[v] = 2 * v - heights[v];
            last[v] = first[v] + 2 * (sizes[v] - 1);
        }
        last[0] = 2 * n;
        (first, last)
    }

    /// Lukasiewicz path `W_0 = 0`, `W_{i+1} = W_i + k_{v_i} - 1`, of length `n + 1`.
    pub fn lukasiewicz(&self) -> Vec<i64> {
        let mut w = Vec::with_capacity(self.n() + 1);
        w.push(0);
        for v in 0..self.n() {
            w.push(w[v] + self.offspring(v) as i64 - 1);
        }
        w
    }

    pub fn lukasiewicz_path(&self) -> LatticePath {
        LatticePath::from_ints(&self.lukasiewicz())
    }

    /// Inverse of [`PlaneTree::lukasiewicz`].
    pub fn from_lukasiewicz(w: &[i64]) -> Result<Self, TreeError> {
        if w.len() < 2 {
            return Err(TreeError::BadLukasiewicz("path needs at least two samples".into()));
        }
        if w[0] != 0 {
            return Err(TreeError::BadLukasiewicz(format!("starts at {} instead of 0", w[0])));
        }
        let n = w.len() - 1;
        let mut offspring = Vec::with_capacity(n);
        for i in 0..n {
            let inc = w[i + 1] - w[i];
            if inc < -1 {
                return Err(TreeError::BadLukasiewicz(format!("step {inc} at index {i}")));
            }
            if i + 1 < n && w[i + 1] < 0 {
                return Err(TreeError::BadLukasiewicz(format!("hits {} at index {}", w[i + 1], i + 1)));
            }
            offspring.push((inc + 1) as usize);
        }
        if w[n] != -1 {
            return Err(TreeError::BadLukasiewicz(format!("ends at {} instead of -1", w[n])));
        }
        Self::from_offspring(&offspring)
    }

    pub fn from_lukasiewicz_path(p: &LatticePath) -> Result<Self, TreeError> {
        let ints = p
            .as_ints()
            .ok_or_else(|| TreeError::BadLukasiewicz("non-integer sample".into()))?;
        Self::from_lukasiewicz(&ints)
    }

    /// Number of vertices in the subtree of every vertex.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let n = self.n();
        let mut size = vec![1; n];
        for v in (1..n).rev() {
            size[self.parent[v]] += size[v];
        }
        size
    }

    /// Distance to the root of every vertex.
    pub fn heights(&self) -> Vec<usize> {
        let n = self.n();
        let mut h = vec![0; n];
        for v in 1..n {
            h[v] = h[self.parent[v]] + 1;
        }
        h
    }

    pub fn height(&self) -> usize {
        self.heights().into_iter().max().unwrap_or(0)
    }

    /// Vertices of the given heavy kind for threshold `a`.
    pub fn find_heavy_vertices(&self, a: usize, kind: HeavyKind) -> Vec<usize> {
        assert!(a >= 1, "threshold must be positive");
        let sizes = self.subtree_sizes();
        (0..self.n())
            .filter(|&v| {
                let mut s: Vec<usize> = self.children(v).iter().map(|&c| sizes[c]).collect();
                match kind {
                    HeavyKind::BranchingPoint => s.iter().filter(|&&x| x >= a).count() >= 2,
                    HeavyKind::Node => splits_in_two(&mut s, a),
                }
            })
            .collect()
    }

    /// All plane trees with `n` vertices, in lexicographic order of their
    /// offspring sequences.
    pub fn enumerate(n: usize) -> Vec<PlaneTree> {
        assert!(n >= 1, "trees have at least one vertex");
        let mut out = Vec::new();
        let mut seq = Vec::with_capacity(n);
        enumerate_rec(n, 1, &mut seq, &mut out);
        out
    }
}

fn enumerate_rec(n: usize, open: usize, seq: &mut Vec<usize>, out: &mut Vec<PlaneTree>) {
    let placed = seq.len();
    if placed == n {
        if open == 0 {
            out.push(PlaneTree::from_offspring(seq).expect("enumerated sequence is valid"));
        }
        return;
    }
    if open == 0 {
        return;
    }
    let remaining = n - placed;
    for k in 0..remaining {
        let next_open = open - 1 + k;
        if next_open > remaining - 1 {
            break;
        }
        if next_open == 0 && remaining > 1 {
            continue;
        }
        seq.push(k);
        enumerate_rec(n, next_open, seq, out);
        seq.pop();
    }
}

/// Whether `sizes` can be split into two groups each summing to at least `a`.
fn splits_in_two(sizes: &mut [usize], a: usize) -> bool {
    let total: usize = sizes.iter().sum();
    if sizes.len() < 2 || total < 2 * a {
        return false;
    }
    sizes.sort_unstable_by(|x, y| y.cmp(x));
    if sizes[0] >= a && total - sizes[0] >= a {
        return true;
    }
    let mut prefix = 0;
    for &s in sizes.iter() {
        prefix += s;
        if prefix >= a {
            if total - prefix >= a {
                return true;
            }
            break;
        }
    }
    // Exact fallback: is some subset sum in [a, total - a]?
    let hi = total - a;
    let words = hi / 64 + 1;
    let mut reach = vec![0u64; words];
    reach[0] = 1;
    for &s in sizes.iter() {
        if s > hi {
            continue;
        }
        let (ws, bs) = (s / 64, s % 64);
        for w in (0..words).rev() {
            let mut add = 0u64;
            if w >= ws {
                add = reach[w - ws] << bs;
                if bs > 0 && w > ws {
                    add |= reach[w - ws - 1] >> (64 - bs);
                }
            }
            reach[w] |= add;
        }
    }
    (a..=hi).any(|x| reach[x / 64] >> (x % 64) & 1 == 1)
}
