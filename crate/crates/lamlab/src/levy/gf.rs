//! Behaviour of offspring generating functions near 1 inside the unit disk.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::gw_sampler::{Family, OffspringDistribution};

use super::exponent::cpow;
use super::LevyError;

/// Exact terms summed before the tail of the integral is closed in form.
const TAIL_TERMS: usize = 1 << 22;

#[derive(Debug, Clone, Serialize)]
pub struct EstimatePoint {
    pub omega: [f64; 2],
    /// `(F(1+w) - (1+w)) / ((-w)^alpha l)`.
    pub ratio: [f64; 2],
    pub ratio_error: f64,
    /// `|F(e^v) - (1 + v - v I(v))|` at `v = log(1 + w)`.
    pub identity_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub law: String,
    pub gf_constant: f64,
    pub points: Vec<EstimatePoint>,
    pub max_ratio_error: f64,
    pub max_identity_residual: f64,
}

/// `F(1 + w) - (1 + w)` without cancellation for the built-in families.
pub fn gf_excess(mu: &OffspringDistribution, w: Complex64) -> Complex64 {
    match mu.family() {
        Family::Poisson1 => {
            // e^w - 1 - w by its series, exact to rounding for small |w|.
            if w.norm() < 0.5 {
                let mut term = w * w / 2.0;
                let mut s = term;
                for k in 3..40 {
                    term = term * w / k as f64;
                    s += term;
                }
                s
            } else {
                w.exp() - 1.0 - w
            }
        }
        Family::Stable => cpow(-w, mu.alpha()) / mu.alpha(),
        Family::Tabulated => mu.pgf(w + 1.0) - (w + 1.0),
    }
}

/// `I(v) = int_0^inf (1 - e^{v x}) P(X > x) dx` for `Re v < 0`.
pub fn tail_integral(mu: &OffspringDistribution, v: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    // On [k, k+1) the integrand is (1 - e^{v x}) P(X >= k + 1).
    let unit = if v.norm() < 1e-3 {
        // (e^v - 1) / v by its series.
        let mut term = one;
        let mut s = one;
        for k in 2..12 {
            term = term * v / k as f64;
            s += term;
        }
        s
    } else {
        (v.exp() - 1.0) / v
    };
    let mut total = Complex64::new(0.0, 0.0);
    let limit = match mu.family() {
        Family::Tabulated => mu.head().len(),
        Family::Poisson1 => 200,
        Family::Stable => TAIL_TERMS,
    };
    let weights = mu.weights_upto(limit);
    let mut tail = 1.0 - weights[0];
    let step = v.exp();
    let mut ek = one;
    for k in 0..limit {
        let m = tail.max(0.0);
        tail -= weights.get(k + 1).copied().unwrap_or(0.0);
        if k % 1024 == 0 {
            ek = (v * k as f64).exp();
        }
        total += (one - ek * unit) * m;
        ek *= step;
    }
    if mu.family() == Family::Stable {
        // P(X >= k) ~ A k^{-alpha}; the remaining terms sum to about
        // A (K + 1/2)^{1-alpha} / (alpha - 1) once e^{v x} is negligible.
        let k = limit as f64;
        let a = mu.alpha();
        let amp = mu.tail(limit + 1) * (k + 1.0).powf(a);
        let rest = amp * (k + 0.5).powf(1.0 - a) / (a - 1.0);
        let damp = (v * k).exp();
        total += rest * (one - damp);
    }
    total
}

/// Ratios on a grid of points `w` with `|1 + w| < 1`, and the integral identity
/// evaluated at `log(1 + w)`.
pub fn verify_generating_estimate(
    mu: &OffspringDistribution,
    grid: &[Complex64],
) -> Result<EstimateReport, LevyError> {
    let l = mu.gf_constant();
    let a = mu.alpha();
    let mut points = Vec::with_capacity(grid.len());
    for &w in grid {
        if (w + 1.0).norm() >= 1.0 {
            return Err(LevyError::OutsideDisk(w.re, w.im));
        }
        let ratio = gf_excess(mu, w) / (cpow(-w, a) * l);
        let v = (w + 1.0).ln();
        let lhs = mu.pgf(v.exp());
        let rhs = v + 1.0 - v * tail_integral(mu, v);
        points.push(EstimatePoint {
            omega: [w.re, w.im],
            ratio: [ratio.re, ratio.im],
            ratio_error: (ratio - 1.0).norm(),
            identity_residual: (lhs - rhs).norm(),
        });
    }
    let max_ratio_error = points.iter().map(|p| p.ratio_error).fold(0.0, f64::max);
    let max_identity_residual = points.iter().map(|p| p.identity_residual).fold(0.0, f64::max);
    Ok(EstimateReport {
        law: mu.name().to_string(),
        gf_constant: l,
        points,
        max_ratio_error,
        max_identity_residual,
    })
}

/// `count` points of modulus `radius` on rays with angles evenly spread in
/// `(pi/2, 3pi/2)`, keeping away from the two boundary directions.
pub fn admissible_rays(radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| {
            let th = PI / 2.0 + PI * (k as f64 + 0.5) / count as f64;
            Complex64::from_polar(radius, th)
        })
        .filter(|w| (w + 1.0).norm() < 1.0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_ratio_is_one() {
        let mu = OffspringDistribution::stable(1.5).unwrap();
        let grid = admissible_rays(1e-4, 16);
        assert_eq!(grid.len(), 16);
        let r = verify_generating_estimate(&mu, &grid).unwrap();
        assert!(r.max_ratio_error < 1e-12);
        assert!(r.max_identity_residual < 1e-8, "{}", r.max_identity_residual);
    }

    #[test]
    fn poisson_ratio_tends_to_one() {
        let mu = OffspringDistribution::poisson1();
        let r = verify_generating_estimate(&mu, &admissible_rays(1e-4, 16)).unwrap();
        assert!(r.max_ratio_error < 1e-3);
        assert!(r.max_identity_residual < 1e-12, "{}", r.max_identity_residual);
        let neg = verify_generating_estimate(&mu, &[Complex64::new(-1e-4, 0.0)]).unwrap();
        assert!(neg.max_ratio_error < 1e-3);
    }

    #[test]
    fn outside_disk_is_rejected() {
        let mu = OffspringDistribution::poisson1();
        assert!(verify_generating_estimate(&mu, &[Complex64::new(1e-4, 0.0)]).is_err());
    }
}
