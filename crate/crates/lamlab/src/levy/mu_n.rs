//! Offspring law of the reduced tree of a marked Galton-Watson tree.
//!
//! `G(x) = F(p x + (1 - p) G(x))`, where `F` is the generating function of the
//! host law and `p` the marking probability. Differentiating gives
//! `G' = p F'(h) / (1 - (1 - p) F'(h))` with `h = p x + (1 - p) G`, which
//! determines the coefficients of `G` one at a time.

use crate::gw_sampler::{Family, OffspringDistribution};

use super::LevyError;

pub const DEFAULT_MU_N_TERMS: usize = 4096;

/// The law together with diagnostics of the truncation.
#[derive(Debug, Clone)]
pub struct MuNLaw {
    pub law: OffspringDistribution,
    /// Probability mass beyond the computed coefficients, before the repair.
    pub truncated_mass: f64,
    /// `|F'(1) - 1|` after the repair.
    pub criticality_error: f64,
}

/// Coefficients `a` of `b^beta` for a series `b` with `b[0] > 0`, extended by one
/// term given the next coefficient of `b`.
struct SeriesPower {
    beta: f64,
    b: Vec<f64>,
    a: Vec<f64>,
}

impl SeriesPower {
    fn new(b0: f64, beta: f64) -> Self {
        Self { beta, b: vec![b0], a: vec![b0.powf(beta)] }
    }

    fn push(&mut self, bk: f64) {
        self.b.push(bk);
        let k = self.b.len() - 1;
        let mut s = 0.0;
        for j in 1..=k {
            s += ((self.beta + 1.0) * j as f64 - k as f64) * self.b[j] * self.a[k - j];
        }
        self.a.push(s / (k as f64 * self.b[0]));
    }
}

fn solve_g0(mu: &OffspringDistribution, p: f64) -> Result<f64, LevyError> {
    // g0 = F((1 - p) g0) is a contraction with factor at most 1 - p.
    let f = |y: f64| mu.pgf(num_complex::Complex64::new(y, 0.0)).re;
    let mut g = mu.weight(0);
    for _ in 0..200 {
        let y = (1.0 - p) * g;
        let r = f(y) - g;
        let d = (1.0 - p) * mu.pgf_derivative(y) - 1.0;
        let next = (g - r / d).clamp(0.0, 1.0);
        if (next - g).abs() <= 4.0 * f64::EPSILON * g.max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        g = next;
    }
    if (f((1.0 - p) * g) - g).abs() <= 1e-14 {
        return Ok(g);
    }
    Err(LevyError::FixedPointStall(g))
}

/// Coefficients `0..terms` of the reduced-tree law, before any repair.
fn raw_coefficients(
    mu: &OffspringDistribution,
    p: f64,
    terms: usize,
) -> Result<Vec<f64>, LevyError> {
    let g0 = solve_g0(mu, p)?;
    let q = 1.0 - p;
    let mut g = vec![g0];
    match mu.family() {
        Family::Poisson1 => {
            // F' = F, so F'(h) = G and G' (1 - q G) = p G.
            let d0 = 1.0 - q * g0;
            for k in 0..terms - 1 {
                let mut s = p * g[k];
                for j in 1..=k {
                    s += q * g[j] * (k + 1 - j) as f64 * g[k + 1 - j];
                }
                g.push(s / ((k + 1) as f64 * d0));
            }
        }
        Family::Stable => {
            // F'(h) = 1 - (1 - h)^(alpha - 1), so G' = p (1 - P) / (p + q P)
            // with P = (1 - h)^(alpha - 1).
            let a = mu.alpha();
            let h0 = q * g0;
            let mut pw = SeriesPower::new(1.0 - h0, a - 1.0);
            // D = p + q P, N = p (1 - P); (k+1) g_{k+1} D_0 = N_k - sum_{j>=1} (k+1-j) g_{k+1-j} D_j.
            for k in 0..terms - 1 {
                if k > 0 {
                    let hk = if k == 1 { p + q * g[1] } else { q * g[k] };
                    pw.push(-hk);
                }
                let n_k = if k == 0 { p * (1.0 - pw.a[0]) } else { -p * pw.a[k] };
                let mut s = n_k;
                for j in 1..=k {
                    s -= (k + 1 - j) as f64 * g[k + 1 - j] * q * pw.a[j];
                }
                g.push(s / ((k + 1) as f64 * (p + q * pw.a[0])));
            }
        }
        Family::Tabulated => {
            let w = mu.head();
            let deg = w.len() - 1;
            // powers[j] holds the series h^j; F'(h) = sum_j (j+1) w_{j+1} h^j.
            let h0 = q * g0;
            let mut h = vec![h0];
            let mut powers: Vec<Vec<f64>> = (0..deg.max(1)).map(|j| vec![h0.powi(j as i32)]).collect();
            let mut fp = Vec::new();
            let fp_coef = |powers: &Vec<Vec<f64>>, k: usize| -> f64 {
                (0..deg).map(|j| (j + 1) as f64 * w[j + 1] * powers[j][k]).sum()
            };
            fp.push(fp_coef(&powers, 0));
            for k in 0..terms - 1 {
                if k > 0 {
                    h.push(if k == 1 { p + q * g[1] } else { q * g[k] });
                    for j in 0..powers.len() {
                        let v = if j == 0 {
                            0.0
                        } else {
                            (0..=k).map(|i| h[i] * powers[j - 1][k - i]).sum()
                        };
                        powers[j].push(v);
                    }
                    fp.push(fp_coef(&powers, k));
                }
                // G' (1 - q F'(h)) = p F'(h).
                let mut s = p * fp[k];
                for j in 1..=k {
                    s += (k + 1 - j) as f64 * g[k + 1 - j] * q * fp[j];
                }
                g.push(s / ((k + 1) as f64 * (1.0 - q * fp[0])));
            }
        }
    }
    Ok(g)
}

/// Reduced-tree law with `terms` exact coefficients. The mass and mean missing
/// beyond them are put on the two integers around the point that restores both.
pub fn mu_n_law(mu: &OffspringDistribution, p: f64, terms: usize) -> Result<MuNLaw, LevyError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(LevyError::BadProbability(p));
    }
    if terms < 2 {
        return Err(LevyError::BadTerms(terms));
    }
    let mut g = if p == 1.0 { mu.weights_upto(terms - 1) } else { raw_coefficients(mu, p, terms)? };
    if let Some(w) = g.iter().find(|w| **w < -1e-14) {
        return Err(LevyError::NegativeWeight(*w));
    }
    for w in g.iter_mut() {
        *w = w.max(0.0);
    }
    let mass: f64 = g.iter().sum();
    let mean: f64 = g.iter().enumerate().map(|(k, w)| k as f64 * w).sum();
    let missing = 1.0 - mass;
    let deficit = 1.0 - mean;
    let truncated_mass = missing.max(0.0);
    if missing > 1e-13 && deficit / missing >= g.len() as f64 {
        let at = deficit / missing;
        let lo = at.floor() as usize;
        let frac = at - lo as f64;
        g.resize(lo + 2, 0.0);
        g[lo] += missing * (1.0 - frac);
        g[lo + 1] += missing * frac;
    } else {
        // Rounding-level defects: rescale the total and fix the mean on the last bucket.
        let total: f64 = g.iter().sum();
        for w in g.iter_mut() {
            *w /= total;
        }
        let last = g.len() - 1;
        let mean: f64 = g.iter().enumerate().map(|(k, w)| k as f64 * w).sum();
        let excess = mean - 1.0;
        if excess < 0.0 {
            let shift = -excess / (last as f64 - 1.0);
            g[last] += shift;
            g[1] -= shift;
        } else if last >= 2 {
            // Moving mass from 2 to 1 lowers the mean without touching the far tail.
            g[2] -= excess;
            g[1] += excess;
        }
        if let Some(w) = g.iter().find(|w| **w < 0.0) {
            return Err(LevyError::NegativeWeight(*w));
        }
    }
    while g.len() > 2 && *g.last().unwrap() == 0.0 {
        g.pop();
    }
    let mean: f64 = g.iter().enumerate().map(|(k, w)| k as f64 * w).sum();
    let name = format!("{}-reduced(p={p})", mu.name());
    let law = OffspringDistribution::tabulated(&name, g, mu.alpha(), mu.l_spec())
        .map_err(|e| LevyError::Law(e.to_string()))?;
    Ok(MuNLaw { law, truncated_mass, criticality_error: (mean - 1.0).abs() })
}
