//! Minimal factorizations of the cycle `(1 2 ... n)` into `n - 1` transpositions,
//! their chord diagrams, and the bijection with labelled trees.
//!
//! Transpositions are read from left to right: the product `t_1 t_2` is the map
//! `t_2 ∘ t_1`. The `i`-th transposition `(a, b)` is drawn as the chord between
//! circle points `a / n` and `b / n` and carries the label `i + 1`.
//!
//! The labelled tree of a factorization is the nesting tree of the chord
//! intervals `[a, b]`: the parent of label `j` is the label of the smallest
//! interval strictly containing the interval of `j`, or the root `1`.

use crate::lamination::{Chord, Lamination};
use crate::plane_tree::PlaneTree;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FactorizationError {
    #[error("transposition ({0} {1}) is malformed for n = {2}")]
    Malformed(usize, usize, usize),
    #[error("expected {expected} transpositions, found {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("the product is not the n-cycle")]
    NotMinimal,
    #[error("invalid labelled tree: {0}")]
    BadTree(String),
    #[error("cannot parse factorization text: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MinimalFactorization {
    pub n: usize,
    pub transpositions: Vec<(usize, usize)>,
}

impl MinimalFactorization {
    /// Validated constructor; each pair is stored with `a < b`.
    pub fn new(n: usize, pairs: Vec<(usize, usize)>) -> Result<Self, FactorizationError> {
        let f = Self::unchecked(n, pairs)?;
        if !f.verify_minimal()? {
            return Err(FactorizationError::NotMinimal);
        }
        Ok(f)
    }

    fn unchecked(n: usize, pairs: Vec<(usize, usize)>) -> Result<Self, FactorizationError> {
        let mut transpositions = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            if a == b || a == 0 || b == 0 || a > n || b > n {
                return Err(FactorizationError::Malformed(a, b, n));
            }
            transpositions.push((a.min(b), a.max(b)));
        }
        Ok(Self { n, transpositions })
    }

    /// Whether the left-to-right product is `(1 2 ... n)`, in `O(n)`.
    pub fn verify_minimal(&self) -> Result<bool, FactorizationError> {
        let n = self.n;
        if n == 0 {
            return Err(FactorizationError::Malformed(0, 0, 0));
        }
        if self.transpositions.len() + 1 != n {
            return Ok(false);
        }
        let sigma = product(n, &self.transpositions)?;
        Ok((1..=n).all(|i| sigma[i] == i % n + 1))
    }

    pub fn len(&self) -> usize {
        self.transpositions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transpositions.is_empty()
    }

    /// One line `a b` per transposition.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (a, b) in &self.transpositions {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }

    /// Parse the line format; `n` is the number of lines plus one.
    pub fn from_text(text: &str) -> Result<Self, FactorizationError> {
        let mut pairs = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(|x| x.parse().map_err(|_| FactorizationError::Parse(line.into())))
                .collect::<Result<_, _>>()?;
            if nums.len() != 2 {
                return Err(FactorizationError::Parse(line.into()));
            }
            pairs.push((nums[0], nums[1]));
        }
        Self::new(pairs.len() + 1, pairs)
    }

    /// Chords of the first `k` transpositions, or of the last `k` when `suffix` is set.
    pub fn prefix_lamination(&self, k: usize, suffix: bool) -> Lamination {
        let k = k.min(self.len());
        let range = if suffix { self.len() - k..self.len() } else { 0..k };
        let chords = range
            .map(|i| {
                let (a, b) = self.transpositions[i];
                Chord::labelled(a as u64, b as u64, (i + 2) as u32)
            })
            .collect();
        Lamination::new(self.n as u64, chords).expect("chords of a minimal factorization never cross")
    }

    /// Cycles of the partial product `t_1 ... t_k`, each listed from its smallest element.
    pub fn partial_cycles(&self, k: usize) -> Vec<Vec<usize>> {
        let sigma = product(self.n, &self.transpositions[..k.min(self.len())])
            .expect("validated factorization");
        let mut seen = vec![false; self.n + 1];
        let mut cycles = Vec::new();
        for start in 1..=self.n {
            if seen[start] {
                continue;
            }
            let mut c = vec![start];
            seen[start] = true;
            let mut x = sigma[start];
            while x != start {
                seen[x] = true;
                c.push(x);
                x = sigma[x];
            }
            cycles.push(c);
        }
        cycles
    }

    /// Chords between consecutive elements of every cycle of `t_1 ... t_k`, with
    /// the cycles of length at least three flagged as blocks.
    pub fn partition_process(&self, k: usize) -> PartitionLamination {
        let cycles = self.partial_cycles(k);
        let mut chords = Vec::new();
        let mut blocks = Vec::new();
        for c in &cycles {
            match c.len() {
                1 => {}
                2 => chords.push(Chord::new(c[0] as u64, c[1] as u64)),
                m => {
                    for i in 0..m {
                        chords.push(Chord::new(c[i] as u64, c[(i + 1) % m] as u64));
                    }
                    blocks.push(c.clone());
                }
            }
        }
        let lamination =
            Lamination::new(self.n as u64, chords).expect("partial products are noncrossing");
        PartitionLamination { n: self.n, lamination, blocks }
    }
}

/// `sigma[i]` for `i = 1..=n` (index 0 unused) of the left-to-right product.
fn product(n: usize, ts: &[(usize, usize)]) -> Result<Vec<usize>, FactorizationError> {
    let mut sigma: Vec<usize> = (0..=n).collect();
    let mut pos: Vec<usize> = (0..=n).collect();
    for &(a, b) in ts {
        if a == b || a == 0 || b == 0 || a > n || b > n {
            return Err(FactorizationError::Malformed(a, b, n));
        }
        // New map is t ∘ sigma: swap the preimages of a and b.
        let (i, j) = (pos[a], pos[b]);
        sigma[i] = b;
        sigma[j] = a;
        pos.swap(a, b);
    }
    Ok(sigma)
}

/// Noncrossing partition lamination of a partial product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionLamination {
    pub n: usize,
    pub lamination: Lamination,
    pub blocks: Vec<Vec<usize>>,
}

impl PartitionLamination {
    /// Number of elements of the largest block divided by `n`; zero without blocks.
    pub fn largest_block_mass(&self) -> f64 {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0) as f64 / self.n as f64
    }
}

/// Tree on the labels `1..=n`, rooted at `1`, without a plane structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelledTree {
    /// `parent[l - 1]` is the parent label of label `l`.
    parent: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelledTreeJson {
    pub parents: Vec<Option<usize>>,
    pub labels: Vec<usize>,
}

impl LabelledTree {
    /// `parent[l - 1]` is the parent label of `l`; label 1 must be the root.
    pub fn new(parent: Vec<Option<usize>>) -> Result<Self, FactorizationError> {
        let n = parent.len();
        if n == 0 || parent[0].is_some() {
            return Err(FactorizationError::BadTree("label 1 must be the root".into()));
        }
        for (i, p) in parent.iter().enumerate().skip(1) {
            match p {
                Some(p) if (1..=n).contains(p) && *p != i + 1 => {}
                _ => return Err(FactorizationError::BadTree(format!("bad parent for {}", i + 1))),
            }
        }
        let t = Self { parent };
        // Every label must reach the root.
        let mut state = vec![0u8; n + 1];
        state[1] = 2;
        for l in 2..=n {
            let mut path = Vec::new();
            let mut x = l;
            while state[x] == 0 {
                state[x] = 1;
                path.push(x);
                x = t.parent[x - 1].unwrap();
            }
            if state[x] == 1 {
                return Err(FactorizationError::BadTree("cycle in parent array".into()));
            }
            for y in path {
                state[y] = 2;
            }
        }
        Ok(t)
    }

    /// Tree from an undirected edge list on labels `1..=n`, rooted at 1.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, FactorizationError> {
        if edges.len() + 1 != n {
            return Err(FactorizationError::BadTree("a tree has n - 1 edges".into()));
        }
        let mut adj = vec![Vec::new(); n + 1];
        for &(a, b) in edges {
            if a == 0 || b == 0 || a > n || b > n {
                return Err(FactorizationError::BadTree(format!("edge ({a}, {b})")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut parent = vec![None; n];
        let mut seen = vec![false; n + 1];
        seen[1] = true;
        let mut stack = vec![1];
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y - 1] = Some(x);
                    stack.push(y);
                }
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(FactorizationError::BadTree("edges do not connect all labels".into()));
        }
        Self::new(parent)
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, label: usize) -> Option<usize> {
        self.parent[label - 1]
    }

    /// Children of `label` in canonical order: reading the label and then its
    /// children gives a cyclically decreasing sequence.
    pub fn canonical_children(&self, label: usize) -> Vec<usize> {
        let mut kids: Vec<usize> =
            (2..=self.n()).filter(|&l| self.parent[l - 1] == Some(label)).collect();
        sort_canonical(label, &mut kids);
        kids
    }

    fn all_canonical_children(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut kids = vec![Vec::new(); n + 1];
        for l in 2..=n {
            kids[self.parent[l - 1].unwrap()].push(l);
        }
        for (l, k) in kids.iter_mut().enumerate().skip(1) {
            sort_canonical(l, k);
        }
        kids
    }

    /// The plane tree of the canonical embedding and the label of each depth-first vertex.
    pub fn canonical_embedding(&self) -> PlanarLabelledTree {
        let kids = self.all_canonical_children();
        // Shift to 0-based indices for the plane tree builder.
        let lists: Vec<Vec<usize>> =
            (1..=self.n()).map(|l| kids[l].iter().map(|c| c - 1).collect()).collect();
        let (tree, order) = PlaneTree::from_child_lists(&lists, 0).expect("labelled tree is a tree");
        PlanarLabelledTree { tree, labels: order.iter().map(|i| i + 1).collect() }
    }

    /// Relabel every non-root label `e` as `n + 2 - e`.
    pub fn reverse_involution(&self) -> LabelledTree {
        let n = self.n();
        let map = |l: usize| if l == 1 { 1 } else { n + 2 - l };
        let mut parent = vec![None; n];
        for l in 2..=n {
            parent[map(l) - 1] = Some(map(self.parent[l - 1].unwrap()));
        }
        LabelledTree { parent }
    }

    pub fn to_json(&self) -> LabelledTreeJson {
        LabelledTreeJson {
            parents: self.parent.iter().map(|p| p.map(|x| x - 1)).collect(),
            labels: (1..=self.n()).collect(),
        }
    }

    /// `parents` indexes vertices, `labels[v]` is the label of vertex `v`.
    pub fn from_json(j: &LabelledTreeJson) -> Result<Self, FactorizationError> {
        let n = j.parents.len();
        if j.labels.len() != n {
            return Err(FactorizationError::BadTree("labels and parents differ in length".into()));
        }
        let mut seen = vec![false; n + 1];
        for &l in &j.labels {
            if l == 0 || l > n || seen[l] {
                return Err(FactorizationError::BadTree("labels must be a permutation of 1..n".into()));
            }
            seen[l] = true;
        }
        let mut parent = vec![None; n];
        for (v, p) in j.parents.iter().enumerate() {
            if let Some(p) = p {
                if *p >= n {
                    return Err(FactorizationError::BadTree("parent out of range".into()));
                }
                parent[j.labels[v] - 1] = Some(j.labels[*p]);
            }
        }
        Self::new(parent)
    }
}

fn sort_canonical(label: usize, kids: &mut [usize]) {
    kids.sort_unstable_by_key(|&c| (c > label, std::cmp::Reverse(c)));
}

/// A plane tree with labels on its depth-first vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarLabelledTree {
    pub tree: PlaneTree,
    /// `labels[v]` is the label of depth-first vertex `v`.
    pub labels: Vec<usize>,
}

impl PlanarLabelledTree {
    pub fn forget_plane(&self) -> LabelledTree {
        let n = self.tree.n();
        let mut parent = vec![None; n];
        for v in 1..n {
            parent[self.labels[v] - 1] = Some(self.labels[self.tree.parent(v).unwrap()]);
        }
        LabelledTree::new(parent).expect("root carries label 1")
    }

    /// Whether every vertex sees its label and its children's labels in cyclically
    /// decreasing order.
    pub fn satisfies_c_delta(&self) -> bool {
        (0..self.tree.n()).all(|v| {
            let own = self.labels[v];
            let mut kids: Vec<usize> =
                self.tree.children(v).iter().map(|&c| self.labels[c]).collect();
            let given = kids.clone();
            sort_canonical(own, &mut kids);
            kids == given
        })
    }

    /// Chord of the contour lamination for every label, indexed by label (entry 0 unused).
    pub fn contour_chords_by_label(&self) -> Vec<Chord> {
        let l = Lamination::from_tree_contour(&self.tree);
        let mut out = vec![Chord::new(0, 0); self.tree.n() + 1];
        for (v, c) in l.chords().iter().enumerate() {
            out[self.labels[v]] = Chord { label: Some(self.labels[v] as u32), ..*c };
        }
        out
    }
}

/// Forward bijection: labelled chord diagram and labelled tree of a factorization.
pub fn goulden_yong_forward(
    f: &MinimalFactorization,
) -> Result<(Lamination, LabelledTree), FactorizationError> {
    if !f.verify_minimal()? {
        return Err(FactorizationError::NotMinimal);
    }
    let n = f.n;
    let lam = f.prefix_lamination(n - 1, false);
    let mut order: Vec<usize> = (0..n - 1).collect();
    let tr = &f.transpositions;
    order.sort_unstable_by(|&i, &j| tr[i].0.cmp(&tr[j].0).then(tr[j].1.cmp(&tr[i].1)));
    let mut parent = vec![None; n];
    let mut stack: Vec<usize> = Vec::new();
    for i in order {
        let (a, b) = tr[i];
        while let Some(&top) = stack.last() {
            if tr[top].1 <= a {
                stack.pop();
            } else {
                break;
            }
        }
        parent[i + 1] = Some(stack.last().map_or(1, |&top| top + 2));
        debug_assert!(stack.last().is_none_or(|&top| tr[top].1 >= b));
        stack.push(i);
    }
    let tree = LabelledTree::new(parent)?;
    if cfg!(debug_assertions) {
        check_geometric_order(f, &tree)?;
    }
    Ok((lam, tree))
}

/// The children of each face, read along the circle, must follow the canonical order.
fn check_geometric_order(
    f: &MinimalFactorization,
    t: &LabelledTree,
) -> Result<(), FactorizationError> {
    let n = f.n;
    let mut kids = vec![Vec::new(); n + 1];
    for l in 2..=n {
        kids[t.parent(l).unwrap()].push(l);
    }
    for (l, k) in kids.iter_mut().enumerate().skip(1) {
        let mut geometric = k.clone();
        geometric.sort_unstable_by_key(|&c| f.transpositions[c - 2].0);
        sort_canonical(l, k);
        if *k != geometric {
            return Err(FactorizationError::BadTree(format!("order around label {l} violated")));
        }
    }
    Ok(())
}

/// Inverse bijection: lay out subtree blocks of the canonical embedding along the
/// circle, each vertex's own arc placed after its children of smaller label.
pub fn goulden_yong_inverse(t: &LabelledTree) -> MinimalFactorization {
    let n = t.n();
    let kids = t.all_canonical_children();
    let mut size = vec![1usize; n + 1];
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![1usize];
    while let Some(x) = stack.pop() {
        order.push(x);
        stack.extend(&kids[x]);
    }
    for &x in order.iter().rev() {
        if let Some(p) = t.parent(x) {
            size[p] += size[x];
        }
    }
    let mut start = vec![0usize; n + 1];
    start[1] = 1;
    for &x in &order {
        let before = if x == 1 { usize::MAX } else { kids[x].iter().filter(|&&c| c < x).count() };
        let mut pos = start[x];
        for (i, &c) in kids[x].iter().enumerate() {
            if i == before {
                pos += 1;
            }
            start[c] = pos;
            pos += size[c];
        }
    }
    let transpositions = (2..=n).map(|l| (start[l], start[l] + size[l])).collect();
    MinimalFactorization { n, transpositions }
}

/// Uniform labelled tree through a uniform Prüfer sequence.
pub fn sample_uniform_labelled_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LabelledTree {
    assert!(n >= 1, "n must be positive");
    if n <= 2 {
        return LabelledTree { parent: (0..n).map(|i| if i == 0 { None } else { Some(1) }).collect() };
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(1..=n)).collect();
    prufer_decode(n, &seq)
}

/// Labelled tree of a Prüfer sequence of length `n - 2` over `1..=n`.
pub fn prufer_decode(n: usize, seq: &[usize]) -> LabelledTree {
    assert_eq!(seq.len() + 2, n, "Prüfer sequences have length n - 2");
    let mut degree = vec![1usize; n + 1];
    for &x in seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut ptr = 1;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for &x in seq {
        edges.push((leaf, x));
        degree[x] -= 1;
        if degree[x] == 1 && x < ptr {
            leaf = x;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push((leaf, n));
    LabelledTree::from_edges(n, &edges).expect("Prüfer decoding yields a tree")
}

pub fn sample_uniform_factorization<R: Rng + ?Sized>(n: usize, rng: &mut R) -> MinimalFactorization {
    goulden_yong_inverse(&sample_uniform_labelled_tree(n, rng))
}

/// Every element of the set of minimal factorizations of the `n`-cycle, by brute force.
pub fn enumerate_minimal_factorizations(n: usize) -> Vec<MinimalFactorization> {
    assert!((1..=7).contains(&n), "brute force is limited to n <= 7");
    let pairs: Vec<(usize, usize)> =
        (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
    let len = n - 1;
    let mut out = Vec::new();
    let mut idx = vec![0usize; len];
    loop {
        let ts: Vec<(usize, usize)> = idx.iter().map(|&i| pairs[i]).collect();
        let f = MinimalFactorization { n, transpositions: ts };
        if f.verify_minimal().unwrap() {
            out.push(f);
        }
        let mut k = 0;
        loop {
            if k == len {
                return out;
            }
            idx[k] += 1;
            if idx[k] < pairs.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Every labelled tree on `1..=n`, through all Prüfer sequences.
pub fn enumerate_labelled_trees(n: usize) -> Vec<LabelledTree> {
    assert!((1..=8).contains(&n), "enumeration is limited to n <= 8");
    if n <= 2 {
        return vec![LabelledTree { parent: (0..n).map(|i| if i == 0 { None } else { Some(1) }).collect() }];
    }
    let total = n.pow((n - 2) as u32);
    (0..total)
        .map(|mut code| {
            let seq: Vec<usize> = (0..n - 2)
                .map(|_| {
                    let x = code % n + 1;
                    code /= n;
                    x
                })
                .collect();
            prufer_decode(n, &seq)
        })
        .collect()
}

/// Apply the label/subtree shuffling operations from the root down.
///
/// At a vertex whose children all have labels `> k`, the children's labels are
/// permuted uniformly while subtrees stay in place; otherwise the children are
/// permuted uniformly together with their subtrees.
pub fn shuffle_tree<R: Rng + ?Sized>(
    t: &PlanarLabelledTree,
    k: usize,
    rng: &mut R,
) -> PlanarLabelledTree {
    let n = t.tree.n();
    let mut labels = t.labels.clone();
    let mut kids: Vec<Vec<usize>> = (0..n).map(|v| t.tree.children(v).to_vec()).collect();
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        let ch = &mut kids[v];
        if ch.is_empty() {
            continue;
        }
        if ch.iter().all(|&c| labels[c] > k) {
            let mut ls: Vec<usize> = ch.iter().map(|&c| labels[c]).collect();
            ls.shuffle(rng);
            for (&c, l) in ch.iter().zip(ls) {
                labels[c] = l;
            }
        } else {
            ch.shuffle(rng);
        }
        stack.extend(ch.iter().copied());
    }
    let (tree, order) = PlaneTree::from_child_lists(&kids, 0).expect("shuffling keeps a tree");
    PlanarLabelledTree { tree, labels: order.iter().map(|&v| labels[v]).collect() }
}

/// Exact Hausdorff distance between two segments.
pub fn segment_hausdorff(p: ([f64; 2], [f64; 2]), q: ([f64; 2], [f64; 2])) -> f64 {
    use crate::lamination::point_segment_distance as d;
    d(p.0, q.0, q.1).max(d(p.1, q.0, q.1)).max(d(q.0, p.0, p.1)).max(d(q.1, p.0, p.1))
}

/// Largest distance between the chord of label `j` in the chord diagram and the
/// contour chord of the vertex labelled `j` in the canonical embedding.
pub fn max_dual_chord_distance(f: &MinimalFactorization) -> f64 {
    let (_, t) = goulden_yong_forward(f).expect("minimal factorization");
    let emb = t.canonical_embedding();
    let dual = emb.contour_chords_by_label();
    let n = f.n as u64;
    (2..=f.n)
        .map(|j| {
            let (a, b) = f.transpositions[j - 2];
            let c = Chord::new(a as u64, b as u64).points(n);
            segment_hausdorff(c, dual[j].points(2 * n))
        })
        .fold(0.0, f64::max)
}
