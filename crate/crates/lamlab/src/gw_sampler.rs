//! Critical offspring distributions and Galton-Watson trees conditioned on their size.

use crate::plane_tree::PlaneTree;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};
use thiserror::Error;

/// Default number of stored weights for the stable family; larger values are
/// produced on demand from an exact recurrence.
pub const DEFAULT_STABLE_TRUNCATION: usize = 1 << 20;

/// Conditioned sizes from which [`ConditionedSampler`] switches to drawing the
/// offspring counts through sequential binomials.
pub const MULTINOMIAL_THRESHOLD: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GwError {
    #[error("stability index {0} must lie in (1, 2)")]
    BadAlpha(f64),
    #[error("invalid offspring weights: {0}")]
    BadWeights(String),
    #[error("size must be at least 1")]
    ZeroSize,
    #[error("no tree with {0} vertices has positive probability")]
    Unreachable(usize),
    #[error("scaling equation did not converge (residual {0:e})")]
    NoConvergence(f64),
    #[error("unknown distribution descriptor: {0}")]
    BadDescriptor(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family {
    Poisson1,
    Stable,
    Tabulated,
}

/// Slowly varying function attached to a law in the domain of attraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SlowlyVarying {
    Constant(f64),
    /// `scale * ln(x)^power` for `x > e`, and `scale` below.
    LogPower { scale: f64, power: f64 },
}

impl SlowlyVarying {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant(c) => c,
            SlowlyVarying::LogPower { scale, power } => scale * x.ln().max(1.0).powf(power),
        }
    }
}

/// Probability weights on the nonnegative integers, together with their stability
/// index and slowly varying function.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringDistribution {
    name: String,
    family: Family,
    alpha: f64,
    l_spec: SlowlyVarying,
    head: Vec<f64>,
    head_tail: f64,
}

/// JSON descriptor of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionDescriptor {
    pub name: String,
    pub alpha: f64,
    pub truncation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_constant: Option<f64>,
}

impl OffspringDistribution {
    /// The Poisson law with mean 1.
    pub fn poisson1() -> Self {
        let mut head = vec![(-1.0f64).exp()];
        let mut k = 1;
        while *head.last().unwrap() > 1e-300 {
            let w = head[k - 1] / k as f64;
            head.push(w);
            k += 1;
        }
        let head_tail = (1.0 - head.iter().sum::<f64>()).max(0.0);
        Self {
            name: "poisson1".into(),
            family: Family::Poisson1,
            alpha: 2.0,
            l_spec: SlowlyVarying::Constant(1.0),
            head,
            head_tail,
        }
    }

    /// The law with generating function `s + (1 - s)^alpha / alpha`.
    pub fn stable(alpha: f64) -> Result<Self, GwError> {
        Self::stable_with_truncation(alpha, DEFAULT_STABLE_TRUNCATION)
    }

    pub fn stable_with_truncation(alpha: f64, k_max: usize) -> Result<Self, GwError> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(GwError::BadAlpha(alpha));
        }
        let k_max = k_max.max(2);
        let mut head = Vec::with_capacity(k_max + 1);
        head.push(1.0 / alpha);
        head.push(0.0);
        let mut c = -alpha;
        for k in 2..=k_max {
            c *= (k as f64 - 1.0 - alpha) / k as f64;
            head.push(c / alpha);
        }
        let head_tail = stable_tail_from(alpha, k_max + 1);
        Ok(Self {
            name: format!("stable({alpha})"),
            family: Family::Stable,
            alpha,
            l_spec: SlowlyVarying::Constant((alpha - 1.0) / gamma(3.0 - alpha)),
            head,
            head_tail,
        })
    }

    /// A finitely supported law. Weights are renormalized when their sum is
    /// within `1e-9` of 1.
    pub fn tabulated(
        name: &str,
        weights: Vec<f64>,
        alpha: f64,
        l_spec: SlowlyVarying,
    ) -> Result<Self, GwError> {
        if weights.is_empty() {
            return Err(GwError::BadWeights("empty".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(GwError::BadWeights("negative or non-finite weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(GwError::BadWeights(format!("weights sum to {total}")));
        }
        let head = weights.iter().map(|w| w / total).collect();
        Ok(Self {
            name: name.into(),
            family: Family::Tabulated,
            alpha,
            l_spec,
            head,
            head_tail: 0.0,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn l_spec(&self) -> SlowlyVarying {
        self.l_spec
    }

    /// Number of stored weights minus one.
    pub fn truncation(&self) -> usize {
        self.head.len() - 1
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    /// Constant `l` in `F(1 - s) - (1 - s) ~ s^alpha l` for a constant `L`.
    pub fn gf_constant(&self) -> f64 {
        let a = self.alpha;
        gamma(3.0 - a) / (a * (a - 1.0)) * self.l_spec.eval(1.0)
    }

    pub fn weight(&self, k: usize) -> f64 {
        if k < self.head.len() {
            return self.head[k];
        }
        match self.family {
            Family::Tabulated => 0.0,
            Family::Poisson1 => (-1.0 - ln_gamma(k as f64 + 1.0)).exp(),
            Family::Stable => {
                let last = self.head.len() - 1;
                let mut c = self.head[last] * self.alpha;
                for j in last + 1..=k {
                    c *= (j as f64 - 1.0 - self.alpha) / j as f64;
                }
                c / self.alpha
            }
        }
    }

    /// Weights `0..=m`, extending the stored ones exactly when needed.
    pub fn weights_upto(&self, m: usize) -> Vec<f64> {
        if m < self.head.len() {
            return self.head[..=m].to_vec();
        }
        let mut w = self.head.clone();
        match self.family {
            Family::Tabulated => w.resize(m + 1, 0.0),
            Family::Poisson1 => {
                for k in w.len()..=m {
                    w.push(self.weight(k));
                }
            }
            Family::Stable => {
                let mut c = *w.last().unwrap() * self.alpha;
                for k in w.len()..=m {
                    c *= (k as f64 - 1.0 - self.alpha) / k as f64;
                    w.push(c / self.alpha);
                }
            }
        }
        w
    }

    /// `P(X >= k)`.
    pub fn tail(&self, k: usize) -> f64 {
        match self.family {
            Family::Stable => {
                if k <= 1 {
                    1.0 - if k == 1 { self.head[0] } else { 0.0 }
                } else {
                    stable_tail_from(self.alpha, k)
                }
            }
            _ => {
                if k >= self.head.len() {
                    return self.head_tail;
                }
                self.head[k..].iter().rev().sum::<f64>() + self.head_tail
            }
        }
    }

    /// Exact mean (analytic for the built-in families).
    pub fn mean(&self) -> f64 {
        match self.family {
            Family::Poisson1 | Family::Stable => 1.0,
            Family::Tabulated => self.head.iter().enumerate().map(|(k, w)| k as f64 * w).sum(),
        }
    }

    /// Generating function `F(s) = sum_k mu_k s^k` on `|s| <= 1`.
    pub fn pgf(&self, s: Complex64) -> Complex64 {
        match self.family {
            Family::Poisson1 => (s - 1.0).exp(),
            Family::Stable => s + (Complex64::new(1.0, 0.0) - s).powf(self.alpha) / self.alpha,
            Family::Tabulated => {
                self.head.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &w| acc * s + w)
            }
        }
    }

    /// `F'(s)` for real `s` in `[0, 1]`.
    pub fn pgf_derivative(&self, s: f64) -> f64 {
        match self.family {
            Family::Poisson1 => (s - 1.0).exp(),
            Family::Stable => 1.0 - (1.0 - s).powf(self.alpha - 1.0),
            Family::Tabulated => self
                .head
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &w)| acc * s + k as f64 * w),
        }
    }

    pub fn descriptor(&self) -> DistributionDescriptor {
        let (weights, l_constant) = match self.family {
            Family::Tabulated => (Some(self.head.clone()), Some(self.l_spec.eval(1.0))),
            _ => (None, None),
        };
        DistributionDescriptor {
            name: match self.family {
                Family::Poisson1 => "poisson1".into(),
                Family::Stable => "stable".into(),
                Family::Tabulated => self.name.clone(),
            },
            alpha: self.alpha,
            truncation: self.truncation(),
            weights,
            l_constant,
        }
    }

    pub fn from_descriptor(d: &DistributionDescriptor) -> Result<Self, GwError> {
        match (d.name.as_str(), &d.weights) {
            ("poisson1", _) => Ok(Self::poisson1()),
            ("stable", _) => Self::stable_with_truncation(d.alpha, d.truncation),
            (name, Some(w)) => Self::tabulated(
                name,
                w.clone(),
                d.alpha,
                SlowlyVarying::Constant(d.l_constant.unwrap_or(1.0)),
            ),
            (name, None) => Err(GwError::BadDescriptor(name.into())),
        }
    }

    /// Unconditioned draw of one offspring count.
    pub fn sampler(&self) -> OffspringSampler<'_> {
        let alias = WeightedAliasIndex::new(self.head.clone()).expect("weights are valid");
        OffspringSampler { dist: self, alias }
    }
}

/// `P(X >= k)` for the stable family and `k >= 2`.
fn stable_tail_from(alpha: f64, k: usize) -> f64 {
    let mut b = 1.0;
    for j in 1..k {
        b *= (j as f64 - alpha) / j as f64;
    }
    -b / alpha
}

/// Alias-table sampler with exact inversion beyond the stored weights.
pub struct OffspringSampler<'a> {
    dist: &'a OffspringDistribution,
    alias: WeightedAliasIndex<f64>,
}

impl OffspringSampler<'_> {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let d = self.dist;
        let stored = 1.0 - d.head_tail;
        if d.head_tail > 0.0 && rng.random::<f64>() >= stored {
            let mut u = rng.random::<f64>() * d.head_tail;
            let mut k = d.head.len();
            let mut w = d.weight(k);
            loop {
                if u < w || w == 0.0 {
                    return k;
                }
                u -= w;
                k += 1;
                w = match d.family {
                    Family::Stable => w * (k as f64 - 1.0 - d.alpha) / k as f64,
                    _ => w / k as f64,
                };
            }
        }
        self.alias.sample(rng)
    }
}

/// Solution of `n L(B) / B^alpha = alpha (alpha - 1) / Gamma(3 - alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstant {
    pub n: u64,
    pub b_n: f64,
    pub relative_residual: f64,
}

pub fn compute_bn(d: &OffspringDistribution, n: u64) -> Result<ScalingConstant, GwError> {
    if n == 0 {
        return Err(GwError::ZeroSize);
    }
    let a = d.alpha;
    let kappa = a * (a - 1.0) / gamma(3.0 - a);
    let l = d.l_spec;
    let g = |x: f64| (n as f64).ln() + l.eval(x.exp()).ln() - kappa.ln() - a * x;
    let (mut lo, mut hi) = (-1.0, 1.0);
    while g(lo) < 0.0 {
        lo = lo * 2.0 - 1.0;
        if lo < -700.0 {
            return Err(GwError::NoConvergence(f64::NAN));
        }
    }
    while g(hi) > 0.0 {
        hi = hi * 2.0 + 1.0;
        if hi > 700.0 {
            return Err(GwError::NoConvergence(f64::NAN));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let b = x.exp();
    let relative_residual = ((n as f64) * l.eval(b) / b.powf(a) - kappa).abs() / kappa;
    if relative_residual > 1e-9 {
        return Err(GwError::NoConvergence(relative_residual));
    }
    Ok(ScalingConstant { n, b_n: b, relative_residual })
}

/// Index at which to start reading a sequence of steps `>= -1` with sum `-1` so
/// that the partial sums first reach `-1` at the end.
pub fn cycle_lemma_shift(steps: &[i64]) -> usize {
    let mut s = 0i64;
    let mut best = i64::MAX;
    let mut arg = 0;
    for (i, x) in steps.iter().enumerate() {
        s += x;
        if s < best {
            best = s;
            arg = i + 1;
        }
    }
    arg % steps.len().max(1)
}

/// Reusable exact sampler for a fixed law and conditioned size.
pub struct ConditionedSampler {
    n: usize,
    weights: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
    suffix: Vec<f64>,
    restricted_mass: f64,
}

/// A conditioned tree with the number of proposals it took.
#[derive(Debug, Clone)]
pub struct ConditionedSample {
    pub tree: PlaneTree,
    pub attempts: u64,
}

impl ConditionedSampler {
    pub fn new(d: &OffspringDistribution, n: usize) -> Result<Self, GwError> {
        if n == 0 {
            return Err(GwError::ZeroSize);
        }
        let mut weights = d.weights_upto(n - 1);
        while weights.len() > 1 && *weights.last().unwrap() == 0.0 {
            weights.pop();
        }
        if !reachable(&weights, n) {
            return Err(GwError::Unreachable(n));
        }
        let mut suffix = vec![0.0; weights.len() + 1];
        for k in (0..weights.len()).rev() {
            suffix[k] = suffix[k + 1] + weights[k];
        }
        let restricted_mass = suffix[0];
        let alias = WeightedAliasIndex::new(weights.clone())
            .map_err(|e| GwError::BadWeights(e.to_string()))?;
        Ok(Self { n, weights, alias, suffix, restricted_mass })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `P(X <= n - 1)`, the mass kept by the sampler.
    pub fn restricted_mass(&self) -> f64 {
        self.restricted_mass
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PlaneTree {
        self.sample_with_attempts(rng).tree
    }

    pub fn sample_with_attempts<R: Rng + ?Sized>(&self, rng: &mut R) -> ConditionedSample {
        if self.n >= MULTINOMIAL_THRESHOLD {
            self.sample_multinomial(rng)
        } else {
            self.sample_sequential(rng)
        }
    }

    /// Proposals of `n` independent alias draws, accepted when the total offspring is `n - 1`.
    pub fn sample_sequential<R: Rng + ?Sized>(&self, rng: &mut R) -> ConditionedSample {
        let n = self.n;
        let target = n - 1;
        let mut xs = vec![0usize; n];
        let mut attempts = 0;
        loop {
            attempts += 1;
            let mut sum = 0;
            let mut ok = true;
            for x in xs.iter_mut() {
                *x = self.alias.sample(rng);
                sum += *x;
                if sum > target {
                    ok = false;
                    break;
                }
            }
            if ok && sum == target {
                return ConditionedSample { tree: rotate_to_tree(&xs), attempts };
            }
        }
    }

    /// Proposals of offspring-count histograms via sequential binomials, followed
    /// by a uniform arrangement.
    pub fn sample_multinomial<R: Rng + ?Sized>(&self, rng: &mut R) -> ConditionedSample {
        let n = self.n as u64;
        let target = n - 1;
        let mut attempts = 0;
        let mut counts = vec![0u64; self.weights.len()];
        loop {
            attempts += 1;
            counts.iter_mut().for_each(|c| *c = 0);
            let mut left = n;
            let mut sum = 0u64;
            let mut ok = true;
            for k in 0..self.weights.len() {
                if left == 0 {
                    break;
                }
                let p = if self.suffix[k] > 0.0 {
                    (self.weights[k] / self.suffix[k]).min(1.0)
                } else {
                    1.0
                };
                let c = if p >= 1.0 { left } else { Binomial::new(left, p).unwrap().sample(rng) };
                counts[k] = c;
                left -= c;
                sum += c * k as u64;
                if sum > target {
                    ok = false;
                    break;
                }
            }
            if ok && left == 0 && sum == target {
                let mut xs = Vec::with_capacity(self.n);
                for (k, &c) in counts.iter().enumerate() {
                    xs.extend(std::iter::repeat_n(k, c as usize));
                }
                xs.shuffle(rng);
                return ConditionedSample { tree: rotate_to_tree(&xs), attempts };
            }
        }
    }
}

fn rotate_to_tree(xs: &[usize]) -> PlaneTree {
    let steps: Vec<i64> = xs.iter().map(|&x| x as i64 - 1).collect();
    let shift = cycle_lemma_shift(&steps);
    let rotated: Vec<usize> = xs[shift..].iter().chain(&xs[..shift]).copied().collect();
    PlaneTree::from_offspring(&rotated).expect("cycle lemma yields a valid tree")
}

/// Whether `n` draws from the support of `weights` can sum to `n - 1`.
fn reachable(weights: &[f64], n: usize) -> bool {
    if weights[0] <= 0.0 {
        return n == 1 && false;
    }
    if n == 1 {
        return true;
    }
    let target = n - 1;
    let support: Vec<usize> =
        (1..weights.len()).filter(|&k| weights[k] > 0.0 && k <= target).collect();
    if support.is_empty() {
        return false;
    }
    if support[0] == 1 {
        return true;
    }
    // Fewest positive draws reaching each total.
    let mut fewest = vec![usize::MAX; target + 1];
    fewest[0] = 0;
    for s in 1..=target {
        for &k in &support {
            if k > s {
                break;
            }
            if fewest[s - k] != usize::MAX {
                fewest[s] = fewest[s].min(fewest[s - k] + 1);
            }
        }
    }
    fewest[target] <= n
}

/// Convenience wrapper building a one-shot [`ConditionedSampler`].
pub fn sample_conditioned_gw<R: Rng + ?Sized>(
    d: &OffspringDistribution,
    n: usize,
    rng: &mut R,
) -> Result<PlaneTree, GwError> {
    Ok(ConditionedSampler::new(d, n)?.sample(rng))
}

/// Unconditioned Galton-Watson probability of a given tree.
pub fn tree_probability(d: &OffspringDistribution, t: &PlaneTree) -> f64 {
    (0..t.n()).map(|v| d.weight(t.offspring(v))).product()
}
