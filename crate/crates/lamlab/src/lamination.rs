//! Finite noncrossing chord systems of the closed unit disk.
//!
//! A point of the circle is stored as a fraction `x / den` of a full turn and
//! drawn at `exp(-2 i pi x / den)`. Every chord of a [`Lamination`] shares the
//! lamination's denominator, so face masses are exact integers over `den`.

use crate::plane_tree::{LatticePath, PlaneTree};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LaminationError {
    #[error("chord ({a}, {b}) is not a valid pair of positions over {den}")]
    BadChord { a: u64, b: u64, den: u64 },
    #[error("chords ({0}, {1}) and ({2}, {3}) cross")]
    Crossing(u64, u64, u64, u64),
    #[error("denominator must be positive")]
    ZeroDenominator,
    #[error("path is not a valid excursion: {0}")]
    BadPath(String),
}

/// Chord between the circle points `a / den` and `b / den`, with `a <= b <= den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Chord {
    pub a: u64,
    pub b: u64,
    pub label: Option<u32>,
}

impl Chord {
    pub fn new(a: u64, b: u64) -> Self {
        Self { a: a.min(b), b: a.max(b), label: None }
    }

    pub fn labelled(a: u64, b: u64, label: u32) -> Self {
        Self { label: Some(label), ..Self::new(a, b) }
    }

    /// Endpoints reduced modulo `den` and sorted, so that `(0, den)` and `(0, 0)`
    /// both become the single point `(0, 0)`.
    pub fn normalized(&self, den: u64) -> (u64, u64) {
        let (x, y) = (self.a % den, self.b % den);
        (x.min(y), x.max(y))
    }

    pub fn is_degenerate(&self, den: u64) -> bool {
        let (x, y) = self.normalized(den);
        x == y
    }

    /// Euclidean endpoints in the plane.
    pub fn points(&self, den: u64) -> ([f64; 2], [f64; 2]) {
        (circle_point(self.a, den), circle_point(self.b, den))
    }

    pub fn length(&self, den: u64) -> f64 {
        let (p, q) = self.points(den);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    }
}

/// The point `exp(-2 i pi x / den)`.
pub fn circle_point(x: u64, den: u64) -> [f64; 2] {
    let theta = 2.0 * PI * (x % den) as f64 / den as f64;
    [theta.cos(), -theta.sin()]
}

/// Nonincreasing masses of the faces of a lamination, as integers over `den`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassSequence {
    pub den: u64,
    pub nums: Vec<u64>,
}

impl MassSequence {
    pub fn from_nums(den: u64, mut nums: Vec<u64>) -> Self {
        nums.retain(|&x| x > 0);
        nums.sort_unstable_by(|a, b| b.cmp(a));
        Self { den, nums }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.nums.iter().map(|&x| x as f64 / self.den as f64).collect()
    }

    /// The `k` largest masses, padded with zeros.
    pub fn top(&self, k: usize) -> Vec<f64> {
        let mut v = self.to_f64();
        v.resize(k.max(v.len()), 0.0);
        v.truncate(k);
        v
    }

    pub fn total(&self) -> u64 {
        self.nums.iter().sum()
    }
}

/// How [`Lamination::from_path`] reads a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    /// Integer path `W_0 = 0, ..., W_n = -1`; chord `[a, d(a)]` with
    /// `d(a) = min{b > a : W_b < W_a}`.
    Lukasiewicz,
    /// Nonnegative step excursion; every upward jump at `s` is joined to the
    /// first later time where the path is back at or below its pre-jump value.
    CadlagExcursion,
}

/// A finite set of pairwise noncrossing chords with a common denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lamination {
    den: u64,
    chords: Vec<Chord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaminationJson {
    pub denominator: Option<u64>,
    pub chords: Vec<Vec<u64>>,
}

impl Lamination {
    pub fn new(den: u64, chords: Vec<Chord>) -> Result<Self, LaminationError> {
        if den == 0 {
            return Err(LaminationError::ZeroDenominator);
        }
        for c in &chords {
            if c.a > c.b || c.b > den {
                return Err(LaminationError::BadChord { a: c.a, b: c.b, den });
            }
        }
        check_noncrossing(den, &chords)?;
        Ok(Self { den, chords })
    }

    /// The circle alone.
    pub fn empty(den: u64) -> Self {
        assert!(den > 0, "denominator must be positive");
        Self { den, chords: Vec::new() }
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn chords(&self) -> &[Chord] {
        &self.chords
    }

    pub fn len(&self) -> usize {
        self.chords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chords.is_empty()
    }

    /// Distinct nondegenerate chords as normalized endpoint pairs, sorted.
    pub fn chord_set(&self) -> Vec<(u64, u64)> {
        let mut v: Vec<(u64, u64)> = self
            .chords
            .iter()
            .map(|c| c.normalized(self.den))
            .filter(|(x, y)| x != y)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Chord set of `self` contained in the chord set of `other` (same denominator).
    pub fn is_subset_of(&self, other: &Lamination) -> bool {
        assert_eq!(self.den, other.den, "denominators differ");
        let theirs = other.chord_set();
        self.chord_set().iter().all(|c| theirs.binary_search(c).is_ok())
    }

    pub fn from_path(p: &LatticePath, mode: PathMode) -> Result<Self, LaminationError> {
        match mode {
            PathMode::Lukasiewicz => {
                let w = p
                    .as_ints()
                    .ok_or_else(|| LaminationError::BadPath("non-integer sample".into()))?;
                Self::from_lukasiewicz(&w)
            }
            PathMode::CadlagExcursion => Self::from_step_excursion(&p.values),
        }
    }

    /// The lamination `[a/n, d(a)/n]`, `a = 0..n-1`, of a Lukasiewicz path.
    pub fn from_lukasiewicz(w: &[i64]) -> Result<Self, LaminationError> {
        if w.len() < 2 || w[0] != 0 || *w.last().unwrap() != -1 {
            return Err(LaminationError::BadPath("must start at 0 and end at -1".into()));
        }
        let n = w.len() - 1;
        for i in 0..n {
            if w[i + 1] - w[i] < -1 || (i + 1 < n && w[i + 1] < 0) {
                return Err(LaminationError::BadPath(format!("invalid step at index {i}")));
            }
        }
        let mut d = vec![n; n];
        let mut stack: Vec<usize> = Vec::new();
        for b in 0..=n {
            while let Some(&a) = stack.last() {
                if w[b] < w[a] {
                    d[a] = b;
                    stack.pop();
                } else {
                    break;
                }
            }
            if b < n {
                stack.push(b);
            }
        }
        let chords = (0..n).map(|a| Chord::new(a as u64, d[a] as u64)).collect();
        Ok(Self { den: n as u64, chords })
    }

    /// Chords of a nonnegative step path `f_0, ..., f_m` read on `[0, 1]` with
    /// `f(t) = f_i` for `t` in `[i/m, (i+1)/m)`.
    pub fn from_step_excursion(f: &[f64]) -> Result<Self, LaminationError> {
        if f.len() < 2 {
            return Err(LaminationError::BadPath("needs at least two samples".into()));
        }
        if f.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(LaminationError::BadPath("negative or non-finite value".into()));
        }
        let m = f.len() - 1;
        let ret = first_return_times(f);
        let chords = (1..m)
            .filter(|&s| f[s] > f[s - 1])
            .map(|s| Chord::new(s as u64, ret[s] as u64))
            .collect();
        Ok(Self { den: m as u64, chords })
    }

    /// One chord `[g_u / 2n, d_u / 2n]` per vertex, from first and last contour visits.
    pub fn from_tree_contour(t: &PlaneTree) -> Self {
        let (g, d) = t.contour_visits();
        let chords = (0..t.n()).map(|v| Chord::new(g[v] as u64, d[v] as u64)).collect();
        Self { den: 2 * t.n() as u64, chords }
    }

    /// Masses of all faces with positive mass, nonincreasing, summing to `den`.
    pub fn face_masses(&self) -> MassSequence {
        let set = self.chord_set();
        let mut inside: Vec<u64> = set.iter().map(|(x, y)| y - x).collect();
        let mut root = self.den;
        let mut stack: Vec<usize> = Vec::new();
        let mut order: Vec<usize> = (0..set.len()).collect();
        order.sort_unstable_by(|&i, &j| set[i].0.cmp(&set[j].0).then(set[j].1.cmp(&set[i].1)));
        for i in order {
            let (x, y) = set[i];
            while let Some(&top) = stack.last() {
                if set[top].1 <= x {
                    stack.pop();
                } else {
                    break;
                }
            }
            match stack.last() {
                Some(&p) => inside[p] -= y - x,
                None => root -= y - x,
            }
            stack.push(i);
        }
        inside.push(root);
        MassSequence::from_nums(self.den, inside)
    }

    /// Keep one chord per pair of arcs when the circle is cut into
    /// `floor(2 pi / eps) + 1` equal arcs.
    pub fn epsilon_sublamination(&self, eps: f64) -> Lamination {
        assert!(eps > 0.0, "eps must be positive");
        let r = (2.0 * PI / eps).floor() as u64 + 1;
        let arc = |x: u64| ((x as u128 * r as u128) / self.den as u128) as u64;
        let mut seen = std::collections::HashSet::new();
        let chords = self
            .chords
            .iter()
            .filter(|c| !c.is_degenerate(self.den))
            .filter(|c| {
                let (x, y) = c.normalized(self.den);
                seen.insert((arc(x), arc(y)))
            })
            .copied()
            .collect();
        Lamination { den: self.den, chords }
    }

    /// Same chords over a denominator that is a multiple of the current one.
    pub fn rescaled(&self, den: u64) -> Lamination {
        assert!(den % self.den == 0, "new denominator must be a multiple");
        let f = den / self.den;
        let chords = self
            .chords
            .iter()
            .map(|c| Chord { a: c.a * f, b: c.b * f, label: c.label })
            .collect();
        Lamination { den, chords }
    }

    pub fn to_json(&self) -> LaminationJson {
        LaminationJson {
            denominator: Some(self.den),
            chords: self
                .chords
                .iter()
                .map(|c| {
                    let mut v = vec![c.a, self.den, c.b, self.den];
                    if let Some(l) = c.label {
                        v.push(u64::from(l));
                    }
                    v
                })
                .collect(),
        }
    }

    pub fn from_json(j: &LaminationJson) -> Result<Self, LaminationError> {
        let mut den = j.denominator.unwrap_or(1).max(1);
        for c in &j.chords {
            if c.len() < 4 || c[1] == 0 || c[3] == 0 {
                return Err(LaminationError::BadPath("chord entries need 4 or 5 fields".into()));
            }
            den = lcm(den, lcm(c[1], c[3]));
        }
        let chords = j
            .chords
            .iter()
            .map(|c| {
                let a = c[0] * (den / c[1]);
                let b = c[2] * (den / c[3]);
                Chord { a: a.min(b), b: a.max(b), label: c.get(4).map(|&l| l as u32) }
            })
            .collect();
        Self::new(den, chords)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// For each index `s >= 1`, the least `j > s` with `f[j] <= f[s-1]` (or the last
/// index if there is none).
fn first_return_times(f: &[f64]) -> Vec<usize> {
    let m = f.len() - 1;
    let mut ret = vec![m; f.len()];
    // Prefix minima of f[s+1..], nearest on top; values increase toward the top.
    let mut stack: Vec<usize> = Vec::new();
    for s in (1..=m).rev() {
        let level = f[s - 1];
        let k = stack.partition_point(|&j| f[j] <= level);
        if k > 0 {
            ret[s] = stack[k - 1];
        }
        while let Some(&j) = stack.last() {
            if f[j] >= f[s] {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(s);
    }
    ret
}

/// Return an error naming one crossing pair, if any.
pub fn check_noncrossing(den: u64, chords: &[Chord]) -> Result<(), LaminationError> {
    let mut set: Vec<(u64, u64)> = chords
        .iter()
        .map(|c| c.normalized(den))
        .filter(|(x, y)| x != y)
        .collect();
    set.sort_unstable_by(|p, q| p.0.cmp(&q.0).then(q.1.cmp(&p.1)));
    set.dedup();
    let mut stack: Vec<(u64, u64)> = Vec::new();
    for &(x, y) in &set {
        while let Some(&(_, ty)) = stack.last() {
            if ty <= x {
                stack.pop();
            } else {
                break;
            }
        }
        if let Some(&(tx, ty)) = stack.last() {
            if y > ty {
                return Err(LaminationError::Crossing(tx, ty, x, y));
            }
        }
        stack.push((x, y));
    }
    Ok(())
}

/// Whether chords `{a,b}` and `{c,d}` (positions over a common denominator)
/// cross in the open disk.
pub fn chords_cross(den: u64, p: &Chord, q: &Chord) -> bool {
    let (a, b) = p.normalized(den);
    let (c, d) = q.normalized(den);
    if a == b || c == d || a == c || a == d || b == c || b == d {
        return false;
    }
    (a < c && c < b && b < d) || (c < a && a < d && d < b)
}

struct SegmentIndex {
    cells: usize,
    h: f64,
    buckets: Vec<Vec<usize>>,
    segs: Vec<([f64; 2], [f64; 2])>,
}

impl SegmentIndex {
    fn new(segs: Vec<([f64; 2], [f64; 2])>) -> Self {
        let cells = ((segs.len() as f64).sqrt().ceil() as usize).clamp(4, 512);
        let h = 2.0 / cells as f64;
        let mut buckets = vec![Vec::new(); cells * cells];
        for (i, (p, q)) in segs.iter().enumerate() {
            let len = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            let k = (len / (0.5 * h)).ceil() as usize + 1;
            let mut last = usize::MAX;
            for j in 0..=k {
                let t = j as f64 / k as f64;
                let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
                let id = Self::cell_of(cells, h, x);
                if id != last {
                    let b: &mut Vec<usize> = &mut buckets[id];
                    if b.last() != Some(&i) {
                        b.push(i);
                    }
                    last = id;
                }
            }
        }
        Self { cells, h, buckets, segs }
    }

    fn cell_of(cells: usize, h: f64, x: [f64; 2]) -> usize {
        let cx = (((x[0] + 1.0) / h).floor() as isize).clamp(0, cells as isize - 1) as usize;
        let cy = (((x[1] + 1.0) / h).floor() as isize).clamp(0, cells as isize - 1) as usize;
        cy * cells + cx
    }

    /// Distance from `x` to the union of the unit circle and the indexed segments.
    fn distance(&self, x: [f64; 2]) -> f64 {
        let mut best = (1.0 - (x[0] * x[0] + x[1] * x[1]).sqrt()).abs();
        let n = self.cells as isize;
        let cx = (((x[0] + 1.0) / self.h).floor() as isize).clamp(0, n - 1);
        let cy = (((x[1] + 1.0) / self.h).floor() as isize).clamp(0, n - 1);
        let mut r: isize = 0;
        loop {
            if (r as f64 - 1.0) * self.h >= best || r > n {
                break;
            }
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx.abs() != r && dy.abs() != r {
                        continue;
                    }
                    let (gx, gy) = (cx + dx, cy + dy);
                    if gx < 0 || gy < 0 || gx >= n || gy >= n {
                        continue;
                    }
                    for &i in &self.buckets[(gy * n + gx) as usize] {
                        let (p, q) = self.segs[i];
                        best = best.min(point_segment_distance(x, p, q));
                    }
                }
            }
            r += 1;
        }
        best
    }
}

pub fn point_segment_distance(x: [f64; 2], p: [f64; 2], q: [f64; 2]) -> f64 {
    let (vx, vy) = (q[0] - p[0], q[1] - p[1]);
    let (wx, wy) = (x[0] - p[0], x[1] - p[1]);
    let len2 = vx * vx + vy * vy;
    let t = if len2 == 0.0 { 0.0 } else { ((wx * vx + wy * vy) / len2).clamp(0.0, 1.0) };
    let (dx, dy) = (wx - t * vx, wy - t * vy);
    (dx * dx + dy * dy).sqrt()
}

fn segments(l: &Lamination) -> Vec<([f64; 2], [f64; 2])> {
    l.chord_set()
        .into_iter()
        .map(|(x, y)| (circle_point(x, l.den), circle_point(y, l.den)))
        .collect()
}

fn directed(from: &[([f64; 2], [f64; 2])], to: &SegmentIndex, resolution: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (p, q) in from {
        let len = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        let k = (len / resolution).ceil().max(1.0) as usize;
        for j in 0..=k {
            let t = j as f64 / k as f64;
            let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            worst = worst.max(to.distance(x));
        }
    }
    worst
}

/// Hausdorff distance between the two compact sets "circle plus chords",
/// evaluated on chord samples spaced at most `resolution` apart; the returned
/// value is within `resolution / 2` of the exact distance.
pub fn hausdorff_distance(l1: &Lamination, l2: &Lamination, resolution: f64) -> f64 {
    assert!(resolution > 0.0, "resolution must be positive");
    let s1 = segments(l1);
    let s2 = segments(l2);
    let i1 = SegmentIndex::new(s1.clone());
    let i2 = SegmentIndex::new(s2.clone());
    directed(&s1, &i2, resolution).max(directed(&s2, &i1, resolution))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_lukasiewicz_chords() {
        let l = Lamination::from_lukasiewicz(&[0, 1, 3, 2, 1, 0, 0, -1]).unwrap();
        let got: Vec<(u64, u64)> = l.chords().iter().map(|c| (c.a, c.b)).collect();
        assert_eq!(got, vec![(0, 7), (1, 5), (2, 3), (3, 4), (4, 5), (5, 7), (6, 7)]);
        assert_eq!(l.den(), 7);
        let single = Lamination::from_lukasiewicz(&[0, -1]).unwrap();
        assert_eq!(single.chords(), &[Chord::new(0, 1)]);
        assert!(single.chords()[0].is_degenerate(1));
    }

    #[test]
    fn simple_masses() {
        assert_eq!(Lamination::empty(4).face_masses().nums, vec![4]);
        let l = Lamination::new(2, vec![Chord::new(0, 1)]).unwrap();
        assert_eq!(l.face_masses(), MassSequence { den: 2, nums: vec![1, 1] });
    }

    #[test]
    fn masses_with_shared_endpoints() {
        // Triangle 0-2-4 inside a hexagon: three outer faces and an empty triangle.
        let l = Lamination::new(6, vec![Chord::new(0, 2), Chord::new(2, 4), Chord::new(0, 4)])
            .unwrap();
        assert_eq!(l.face_masses().nums, vec![2, 2, 2]);
    }

    #[test]
    fn crossing_detected() {
        let err = Lamination::new(8, vec![Chord::new(0, 4), Chord::new(2, 6)]).unwrap_err();
        assert!(matches!(err, LaminationError::Crossing(..)));
        assert!(Lamination::new(8, vec![Chord::new(0, 4), Chord::new(4, 6)]).is_ok());
        assert!(chords_cross(8, &Chord::new(1, 5), &Chord::new(3, 7)));
        assert!(!chords_cross(8, &Chord::new(1, 5), &Chord::new(5, 7)));
    }

    #[test]
    fn circle_versus_diameter() {
        let a = Lamination::empty(2);
        let b = Lamination::new(2, vec![Chord::new(0, 1)]).unwrap();
        let d = hausdorff_distance(&a, &b, 1e-3);
        assert!((d - 1.0).abs() < 1e-3, "{d}");
        assert!(hausdorff_distance(&b, &b, 1e-3) < 1e-12);
    }

    #[test]
    fn contour_chords_of_single_vertex() {
        let l = Lamination::from_tree_contour(&PlaneTree::singleton());
        assert_eq!(l.den(), 2);
        assert!(l.chords()[0].is_degenerate(2));
    }

    #[test]
    fn step_excursion_chords() {
        // Jump to 2 at s=1, decreasing steps back to 0.
        let l = Lamination::from_step_excursion(&[0.0, 2.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(l.chords(), &[Chord::new(1, 3)]);
    }

    #[test]
    fn json_roundtrip() {
        let l = Lamination::new(6, vec![Chord::labelled(0, 2, 3), Chord::new(2, 4)]).unwrap();
        assert_eq!(Lamination::from_json(&l.to_json()).unwrap(), l);
    }

    #[test]
    fn sublamination_keeps_small_sets() {
        let l = Lamination::new(4, vec![Chord::new(0, 2)]).unwrap();
        assert_eq!(l.epsilon_sublamination(0.5), l);
        assert!(Lamination::empty(3).epsilon_sublamination(0.1).is_empty());
    }
}
