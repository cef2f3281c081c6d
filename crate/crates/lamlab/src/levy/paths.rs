//! Path sampling for `tau`, the Vervaat transform and reduced trees.

use rand::Rng;
use rand_distr::{Distribution, Exp1, InverseGaussian, StandardNormal};
use std::f64::consts::PI;

use crate::gw_sampler::{compute_bn, OffspringDistribution};
use crate::plane_tree::{LatticePath, PlaneTree};

use super::exponent::ExponentParams;
use super::mu_n::{mu_n_law, DEFAULT_MU_N_TERMS};
use super::LevyError;

/// Standard totally skewed stable variable `S_alpha(1, 1, 0)` by the
/// Chambers-Mallows-Stuck method, for `alpha` in `(1, 2)`.
pub fn sample_skewed_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    let tan = (PI * alpha / 2.0).tan();
    let b = tan.atan() / alpha;
    let s = (1.0 + tan * tan).powf(1.0 / (2.0 * alpha));
    s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha)
        * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Increment over time `dt` of the spectrally positive process with
/// `E[exp(-lambda Y_t)] = exp(t lambda^alpha)`.
pub fn sample_stable_increment<R: Rng + ?Sized>(alpha: f64, dt: f64, rng: &mut R) -> f64 {
    if alpha == 2.0 {
        let z: f64 = StandardNormal.sample(rng);
        return (2.0 * dt).sqrt() * z;
    }
    let sigma = (-(PI * alpha / 2.0).cos()).powf(1.0 / alpha);
    sigma * dt.powf(1.0 / alpha) * sample_skewed_stable(alpha, rng)
}

/// Offspring law and scale of the rescaled walk approximation.
#[derive(Debug, Clone)]
pub struct WalkModel {
    pub reduced: OffspringDistribution,
    pub b_n: f64,
    pub p_n: f64,
}

impl WalkModel {
    /// Host law `mu`, size parameter `n` and level `c`; marks have probability `c B_n / n`.
    pub fn new(mu: &OffspringDistribution, n: u64, c: f64) -> Result<Self, LevyError> {
        let b_n = compute_bn(mu, n).map_err(|e| LevyError::Law(e.to_string()))?.b_n;
        let p_n = c * b_n / n as f64;
        if !(p_n > 0.0 && p_n <= 1.0) {
            return Err(LevyError::BadProbability(p_n));
        }
        let law = mu_n_law(mu, p_n, DEFAULT_MU_N_TERMS)?;
        Ok(Self { reduced: law.law, b_n, p_n })
    }
}

#[derive(Debug, Clone)]
pub enum TauMode {
    /// Exact inverse-Gaussian increments when `alpha = 2`; otherwise an Euler
    /// scheme with `substeps` stable increments per unit of `s`.
    StableSkeleton { substeps: usize },
    /// `S_{floor(s c B_n)} / B_n` for the walk with steps `X - 1`, `X` from the reduced law.
    GwWalk(WalkModel),
}

/// Values of `tau` at `s = j * horizon / steps`, `j = 0..=steps`.
pub fn sample_tau_path<R: Rng + ?Sized>(
    p: &ExponentParams,
    mode: &TauMode,
    horizon: f64,
    steps: usize,
    rng: &mut R,
) -> Result<LatticePath, LevyError> {
    if steps == 0 || !(horizon > 0.0) {
        return Err(LevyError::BadMode("steps and horizon must be positive".into()));
    }
    let ds = horizon / steps as f64;
    let (a, c) = (p.alpha, p.c);
    let mut values = Vec::with_capacity(steps + 1);
    values.push(0.0);
    match mode {
        TauMode::StableSkeleton { .. } if a == 2.0 => {
            // T(x) = first time sqrt(2) B_t - sqrt(c) t < -x, at x = c^{3/2} s.
            let dx = c.powf(1.5) * ds;
            let ig = InverseGaussian::new(dx / c.sqrt(), dx * dx / 2.0)
                .map_err(|e| LevyError::BadMode(e.to_string()))?;
            let mut t = 0.0;
            for j in 1..=steps {
                t += ig.sample(rng);
                values.push(t - c * ds * j as f64);
            }
        }
        TauMode::StableSkeleton { substeps } => {
            if *substeps == 0 {
                return Err(LevyError::BadMode("substeps must be positive".into()));
            }
            let dt = 1.0 / *substeps as f64;
            let drift = c.powf(1.0 / a);
            let level = c.powf(1.0 + 1.0 / a);
            let (mut time, mut x) = (0.0, 0.0);
            for j in 1..=steps {
                let barrier = -level * ds * j as f64;
                while x >= barrier {
                    x += sample_stable_increment(a, dt, rng) - drift * dt;
                    time += dt;
                }
                values.push(time - c * ds * j as f64);
            }
        }
        TauMode::GwWalk(model) => {
            let sampler = model.reduced.sampler();
            let scale = c * model.b_n;
            let (mut k, mut s) = (0usize, 0i64);
            for j in 1..=steps {
                let target = (ds * j as f64 * scale).floor() as usize;
                while k < target {
                    s += sampler.sample(rng) as i64 - 1;
                    k += 1;
                }
                values.push(s as f64 / model.b_n);
            }
        }
    }
    Ok(LatticePath::step_path(values, ds))
}

/// Index of the right-most minimum of a bridge, reduced modulo its length.
pub fn vervaat_shift(values: &[f64]) -> usize {
    let m = values.len() - 1;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let last = values.iter().rposition(|&v| v == min).unwrap();
    last % m.max(1)
}

/// Cyclic shift of a bridge at its right-most minimum, minus the minimum.
pub fn vervaat_transform(p: &LatticePath) -> Result<LatticePath, LevyError> {
    let v = &p.values;
    if v.len() < 2 {
        return Err(LevyError::NotABridge("path needs two points".into()));
    }
    let m = v.len() - 1;
    let tol = 1e-12 * (1.0 + p.sup_norm());
    if v[0].abs() > tol || v[m].abs() > tol {
        return Err(LevyError::NotABridge(format!("endpoints {} and {}", v[0], v[m])));
    }
    let k = vervaat_shift(v);
    let min = v[k];
    let values = (0..=m).map(|i| v[(k + i) % m] - min).collect();
    Ok(LatticePath { values, ..p.clone() })
}

/// Tree on the marked vertices, each attached to its nearest marked strict
/// ancestor, children ordered as in the original depth-first order.
pub fn reduced_tree(t: &PlaneTree, marks: &[bool]) -> Result<PlaneTree, LevyError> {
    if marks.len() != t.n() || !marks[t.root()] {
        return Err(LevyError::BadMarks);
    }
    let mut new_index = vec![usize::MAX; t.n()];
    let mut nearest = vec![usize::MAX; t.n()];
    let mut kids: Vec<Vec<usize>> = Vec::new();
    for v in 0..t.n() {
        let above = t.parent(v).map(|u| if marks[u] { new_index[u] } else { nearest[u] });
        if marks[v] {
            new_index[v] = kids.len();
            kids.push(Vec::new());
            if let Some(a) = above {
                kids[a].push(new_index[v]);
            }
        } else {
            nearest[v] = above.expect("the root is marked");
        }
    }
    let (tree, _) = PlaneTree::from_child_lists(&kids, 0).map_err(|_| LevyError::BadMarks)?;
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gw_sampler::cycle_lemma_shift;
    use crate::levy::exponent::phibar;
    use crate::rng::stream;

    #[test]
    fn vervaat_examples() {
        let p = LatticePath::from_ints(&[0, -1, 1, 0]);
        assert_eq!(vervaat_transform(&p).unwrap().values, vec![0.0, 2.0, 1.0, 0.0]);
        let e = LatticePath::from_ints(&[0, 1, 0, 2, 1, 0]);
        assert_eq!(vervaat_transform(&e).unwrap(), e);
        assert!(vervaat_transform(&LatticePath::from_ints(&[0, 1])).is_err());
    }

    #[test]
    fn vervaat_brute_force_over_shifts() {
        // For integer bridges with steps >= -1 the nonnegative shift is unique up
        // to ties at zero; Vervaat must land on a nonnegative one.
        let mut rng = stream(3, "vervaat");
        for _ in 0..500 {
            let m = rng.random_range(2..12);
            let mut steps: Vec<i64> = Vec::new();
            let mut s = 0;
            for _ in 0..m - 1 {
                let x = rng.random_range(-1..3i64);
                steps.push(x);
                s += x;
            }
            steps.push(-s);
            let mut vals = vec![0i64];
            for x in &steps {
                vals.push(vals.last().unwrap() + x);
            }
            let out = vervaat_transform(&LatticePath::from_ints(&vals)).unwrap();
            assert!(out.values.iter().all(|&v| v >= 0.0));
            let ok: Vec<usize> = (0..m)
                .filter(|&k| (0..=m).all(|i| vals[(k + i) % m] >= vals[k]))
                .collect();
            assert!(ok.contains(&vervaat_shift(&vals.iter().map(|&v| v as f64).collect::<Vec<_>>())));
        }
    }

    #[test]
    fn vervaat_matches_cycle_lemma_on_drifted_walks() {
        let mut rng = stream(4, "cl");
        for _ in 0..500 {
            let m = rng.random_range(1..12);
            // Random steps >= -1 with sum -1.
            let mut steps = vec![-1i64; m];
            for _ in 0..m - 1 {
                let i = rng.random_range(0..m);
                steps[i] += 1;
            }
            let mut vals = vec![0.0];
            let mut s = 0i64;
            for (k, x) in steps.iter().enumerate() {
                s += x;
                vals.push(s as f64 + (k + 1) as f64 / m as f64);
            }
            vals[m] = 0.0;
            assert_eq!(vervaat_shift(&vals), cycle_lemma_shift(&steps));
        }
    }

    #[test]
    fn reduction_figure() {
        // Root with children A, B, C; A has children D (-> E -> F) and G; G has
        // children H and I (-> J). Marked: root, C, G, E, J.
        let parents = [None, Some(0), Some(1), Some(2), Some(3), Some(1), Some(5), Some(5), Some(7), Some(0), Some(0)];
        let t = PlaneTree::from_parents(&parents).unwrap();
        assert_eq!(t.n(), 11);
        let mut marks = vec![false; 11];
        for v in [0, 3, 5, 8, 10] {
            marks[v] = true;
        }
        let r = reduced_tree(&t, &marks).unwrap();
        assert_eq!(r.offspring_counts(), vec![3, 0, 1, 0, 0]);
        let all = reduced_tree(&t, &[true; 11]).unwrap();
        assert_eq!(all, t);
        let mut only_root = vec![false; 11];
        only_root[0] = true;
        assert_eq!(reduced_tree(&t, &only_root).unwrap().n(), 1);
    }

    #[test]
    fn stable_normalization() {
        // E[exp(-lambda Y_1)] = exp(lambda^alpha).
        let mut rng = stream(8, "cms");
        for alpha in [1.3, 1.5, 1.8] {
            for lambda in [1.0, 2.0] {
                let n = 200_000;
                let (mut s, mut s2) = (0.0, 0.0);
                for _ in 0..n {
                    let x = (-lambda * sample_stable_increment(alpha, 1.0, &mut rng)).exp();
                    s += x;
                    s2 += x * x;
                }
                let mean = s / n as f64;
                let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
                let target = lambda.powf(alpha).exp();
                assert!((mean - target).abs() < 4.0 * se, "{alpha} {lambda}: {mean} vs {target}");
            }
        }
    }

    #[test]
    fn brownian_laplace_exponent() {
        let p = ExponentParams::new(2.0, 1.0).unwrap();
        let mut rng = stream(10, "tau");
        let mode = TauMode::StableSkeleton { substeps: 1 };
        let n = 40_000;
        let taus: Vec<f64> = (0..n)
            .map(|_| *sample_tau_path(&p, &mode, 1.0, 4, &mut rng).unwrap().values.last().unwrap())
            .collect();
        for lambda in [0.5, 1.0, 2.0] {
            let xs: Vec<f64> = taus.iter().map(|t| (-lambda * t).exp()).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            let target = (-(phibar(lambda, &p) - lambda)).exp();
            assert!((mean - target).abs() < 3.5 * (var / n as f64).sqrt(), "{lambda}");
        }
    }

    #[test]
    fn euler_scheme_laplace_exponent() {
        let p = ExponentParams::new(1.5, 1.0).unwrap();
        let mut rng = stream(11, "euler");
        let mode = TauMode::StableSkeleton { substeps: 2000 };
        let n = 4000;
        let lambda = 1.0;
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let t = *sample_tau_path(&p, &mode, 0.5, 1, &mut rng).unwrap().values.last().unwrap();
                (-lambda * t).exp()
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let target = (-0.5 * (phibar(lambda, &p) - lambda)).exp();
        // The discrete barrier check overshoots slightly; allow the bias on top of noise.
        assert!((mean - target).abs() < 4.0 * (var / n as f64).sqrt() + 0.02, "{mean} vs {target}");
    }

    #[test]
    fn walk_mode_starts_at_zero_and_is_lattice_valued() {
        let mu = OffspringDistribution::poisson1();
        let model = WalkModel::new(&mu, 10_000, 1.0).unwrap();
        let p = ExponentParams::new(2.0, 1.0).unwrap();
        let mut rng = stream(12, "walk");
        let path = sample_tau_path(&p, &TauMode::GwWalk(model.clone()), 1.0, 10, &mut rng).unwrap();
        assert_eq!(path.values[0], 0.0);
        for v in &path.values {
            let k = v * model.b_n;
            assert!((k - k.round()).abs() < 1e-9);
        }
    }
}
