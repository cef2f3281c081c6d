//! Poisson cut processes on trees and under excursion graphs, and the
//! lamination-valued and mass-valued processes they induce.
//!
//! Every cut carries its chord, so the lamination at time `c` is obtained by
//! filtering arrivals `<= c`; the processes at different times are coupled by
//! construction.

use crate::lamination::{Chord, Lamination, MassSequence};
use crate::plane_tree::{LatticePath, PlaneTree};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FragmentationError {
    #[error("rate and horizon must be positive")]
    BadRate,
    #[error("cut processes on trees need at least two vertices")]
    TooSmall,
    #[error("minimal chord extent must be positive")]
    BadDelta,
    #[error("path is not a nonnegative step excursion")]
    BadPath,
    #[error("this operation needs a cut process sampled on tree edges")]
    NotOnTree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CutLocation {
    /// On the edge from `vertex` to its parent, at relative `position` from the parent.
    Edge { vertex: usize, position: f64 },
    /// A point `(s, y)` below the graph of an excursion.
    Epigraph { s: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub location: CutLocation,
    pub time: f64,
    pub chord: Chord,
}

/// Cuts sorted by arrival time, all with chords over the same denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutProcess {
    pub den: u64,
    pub horizon: f64,
    pub cuts: Vec<Cut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentationTrace {
    pub times: Vec<f64>,
    pub mass_sequences: Vec<MassSequence>,
}

impl FragmentationTrace {
    /// One line per time: `time,mass_1,mass_2,...`, padded with zeros.
    pub fn to_csv(&self) -> String {
        let width = self.mass_sequences.iter().map(|m| m.nums.len()).max().unwrap_or(0);
        let mut out = String::from("time");
        for i in 1..=width {
            let _ = write!(out, ",mass_{i}");
        }
        out.push('\n');
        for (t, m) in self.times.iter().zip(&self.mass_sequences) {
            let _ = write!(out, "{t}");
            let v = m.to_f64();
            for i in 0..width {
                let _ = write!(out, ",{}", v.get(i).copied().unwrap_or(0.0));
            }
            out.push('\n');
        }
        out
    }
}

impl CutProcess {
    pub fn cuts_until(&self, c: f64) -> &[Cut] {
        let k = self.cuts.partition_point(|cut| cut.time <= c);
        &self.cuts[..k]
    }

    pub fn lamination_at(&self, c: f64) -> Lamination {
        let chords = self.cuts_until(c).iter().map(|cut| cut.chord).collect();
        Lamination::new(self.den, chords).expect("chords of a cut process never cross")
    }

    pub fn lamination_process(&self, times: &[f64]) -> Vec<Lamination> {
        times.iter().map(|&c| self.lamination_at(c)).collect()
    }

    /// Vertices whose parent edge carries a cut arriving no later than `c`.
    pub fn cut_vertices(&self, c: f64) -> Result<Vec<usize>, FragmentationError> {
        let mut v = Vec::new();
        for cut in self.cuts_until(c) {
            match cut.location {
                CutLocation::Edge { vertex, .. } => v.push(vertex),
                CutLocation::Epigraph { .. } => return Err(FragmentationError::NotOnTree),
            }
        }
        v.sort_unstable();
        v.dedup();
        Ok(v)
    }

    /// Component masses of the tree cut at every edge carrying an arrival `<= c`,
    /// for each requested time.
    pub fn fragmentation_masses(
        &self,
        t: &PlaneTree,
        times: &[f64],
    ) -> Result<FragmentationTrace, FragmentationError> {
        let mut mass_sequences = Vec::with_capacity(times.len());
        for &c in times {
            let mut cut = vec![false; t.n()];
            for v in self.cut_vertices(c)? {
                cut[v] = true;
            }
            mass_sequences.push(component_masses(t, &cut));
        }
        Ok(FragmentationTrace { times: times.to_vec(), mass_sequences })
    }
}

/// Masses of the components of `t` after removing the parent edges of the flagged
/// vertices. A component weighs twice the number of children of its vertices, plus
/// two for the root component, out of `2n`.
pub fn component_masses(t: &PlaneTree, cut: &[bool]) -> MassSequence {
    let n = t.n();
    let mut top = vec![0usize; n];
    let mut weight = vec![0u64; n];
    weight[0] = 2;
    for v in 1..n {
        let p = t.parent(v).unwrap();
        top[v] = if cut[v] { v } else { top[p] };
        weight[top[p]] += 2;
    }
    MassSequence::from_nums(2 * n as u64, weight)
}

/// Independent Poisson cuts of intensity `rate` per unit edge length on every
/// edge, with arrival times uniform on `[0, horizon]`.
pub fn sample_tree_cut_process<R: Rng + ?Sized>(
    t: &PlaneTree,
    rate: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<CutProcess, FragmentationError> {
    if !(rate > 0.0 && horizon > 0.0) {
        return Err(FragmentationError::BadRate);
    }
    let n = t.n();
    if n < 2 {
        return Err(FragmentationError::TooSmall);
    }
    let (g, d) = t.contour_visits();
    let total = poisson(rate * horizon * (n - 1) as f64, rng);
    let mut cuts: Vec<Cut> = (0..total)
        .map(|_| {
            let vertex = rng.random_range(1..n);
            Cut {
                location: CutLocation::Edge { vertex, position: rng.random::<f64>() },
                time: rng.random::<f64>() * horizon,
                chord: Chord::labelled(g[vertex] as u64, d[vertex] as u64, vertex as u32),
            }
        })
        .collect();
    cuts.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(CutProcess { den: 2 * n as u64, horizon, cuts })
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// Order in which vertices are revealed: the root first, then a uniform
/// permutation of the others.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexMarking {
    pub order: Vec<usize>,
    den: u64,
    chords: Vec<Chord>,
}

impl VertexMarking {
    /// Chords of the first `floor(s)` revealed vertices.
    pub fn lamination(&self, s: f64) -> Lamination {
        let k = (s.max(0.0).floor() as usize).min(self.order.len());
        let chords = self.order[..k].iter().map(|&v| self.chords[v]).collect();
        Lamination::new(self.den, chords).expect("contour chords never cross")
    }
}

pub fn vertex_marking_process<R: Rng + ?Sized>(t: &PlaneTree, rng: &mut R) -> VertexMarking {
    let mut rest: Vec<usize> = (1..t.n()).collect();
    rest.shuffle(rng);
    let mut order = vec![0];
    order.extend(rest);
    let full = Lamination::from_tree_contour(t);
    VertexMarking { order, den: full.den(), chords: full.chords().to_vec() }
}

/// Horizontal slab of the region under a step excursion on which the excursion
/// interval `[left, right)` (in cells) is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slab {
    pub left: usize,
    pub right: usize,
    pub bottom: f64,
    pub top: f64,
}

/// Slabs of the region `{(s, y): 0 <= y < f(s)}` where `f` equals `cells[i]` on cell `i`.
pub fn epigraph_slabs(cells: &[f64]) -> Vec<Slab> {
    let m = cells.len();
    let mut left = vec![0usize; m];
    let mut right = vec![m; m];
    // Cells equal to an earlier cell with nothing smaller in between share its slab.
    let mut dup = vec![false; m];
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..m {
        while let Some(&j) = stack.last() {
            if cells[j] >= cells[i] {
                if cells[j] == cells[i] {
                    dup[i] = true;
                }
                stack.pop();
            } else {
                break;
            }
        }
        left[i] = stack.last().map_or(0, |&j| j + 1);
        stack.push(i);
    }
    let mut stack: Vec<usize> = Vec::new();
    for i in (0..m).rev() {
        while let Some(&j) = stack.last() {
            if cells[j] >= cells[i] {
                stack.pop();
            } else {
                break;
            }
        }
        right[i] = stack.last().copied().unwrap_or(m);
        stack.push(i);
    }
    let mut slabs = Vec::new();
    for i in 0..m {
        if dup[i] || cells[i] <= 0.0 {
            continue;
        }
        let lo = if left[i] > 0 { cells[left[i] - 1] } else { 0.0 };
        let hi = if right[i] < m { cells[right[i]] } else { 0.0 };
        let bottom = lo.max(hi).max(0.0);
        if cells[i] > bottom {
            slabs.push(Slab { left: left[i], right: right[i], bottom, top: cells[i] });
        }
    }
    slabs
}

/// Expected number of epigraph points of chord extent `> delta` arriving by time `c`.
pub fn epigraph_expected_count(cells: &[f64], c: f64, delta: f64) -> f64 {
    let m = cells.len() as f64;
    epigraph_slabs(cells)
        .iter()
        .filter(|s| (s.right - s.left) as f64 / m > delta)
        .map(|s| 2.0 * c * (s.top - s.bottom))
        .sum()
}

/// Exact sample of the epigraph Poisson process of intensity
/// `2 / (d - g) ds dy dt` restricted to chord extents `d - g > delta` and
/// arrival times in `[0, c]`, for a step excursion given as a
/// [`LatticePath`] whose last sample is the terminal value.
pub fn epigraph_ppp_general<R: Rng + ?Sized>(
    f: &LatticePath,
    c: f64,
    delta: f64,
    rng: &mut R,
) -> Result<CutProcess, FragmentationError> {
    if !(delta > 0.0) {
        return Err(FragmentationError::BadDelta);
    }
    if !(c > 0.0) {
        return Err(FragmentationError::BadRate);
    }
    let v = &f.values;
    if v.len() < 2 || v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(FragmentationError::BadPath);
    }
    let cells = &v[..v.len() - 1];
    let m = cells.len();
    let mut cuts = Vec::new();
    for s in epigraph_slabs(cells) {
        let width = (s.right - s.left) as f64 / m as f64;
        if width <= delta {
            continue;
        }
        let k = poisson(2.0 * c * (s.top - s.bottom), rng);
        for _ in 0..k {
            let x = s.left as f64 / m as f64 + width * rng.random::<f64>();
            let y = s.bottom + (s.top - s.bottom) * rng.random::<f64>();
            cuts.push(Cut {
                location: CutLocation::Epigraph { s: x, y },
                time: c * rng.random::<f64>(),
                chord: Chord::new(s.left as u64, s.right as u64),
            });
        }
    }
    cuts.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(CutProcess { den: m as u64, horizon: c, cuts })
}

/// Step function on the `2n` unit contour cells of `t`, equal on each cell to the
/// lower of its two endpoint heights, times `scale`; followed by the terminal 0.
/// Its slabs are exactly the edges of `t`, each of height `scale`.
pub fn min_step_contour(t: &PlaneTree, scale: f64) -> LatticePath {
    let h = t.contour_heights();
    let mut values: Vec<f64> =
        h.windows(2).map(|w| w[0].min(w[1]) as f64 * scale).collect();
    values.push(0.0);
    LatticePath::step_path(values, 1.0 / (2 * t.n()) as f64)
}
