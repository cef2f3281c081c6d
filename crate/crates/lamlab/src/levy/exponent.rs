//! Laplace and characteristic exponents of the drifted first-passage process.
//!
//! For `alpha` in `(1, 2]` and `c > 0`, `phibar(nu)` is the nonnegative root of
//! `x^alpha + c x - c nu = 0` and `psibar(t)` is the root with nonnegative real
//! part of `z^alpha + c z + i t c = 0`. Complex powers use the principal branch.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::LevyError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentParams {
    pub alpha: f64,
    pub c: f64,
}

impl ExponentParams {
    pub fn new(alpha: f64, c: f64) -> Result<Self, LevyError> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(LevyError::BadAlpha(alpha));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(LevyError::BadC(c));
        }
        Ok(Self { alpha, c })
    }
}

/// `z^a` with the cut on the negative real axis.
pub fn cpow(z: Complex64, a: f64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    (z.ln() * a).exp()
}

fn real_residual(x: f64, nu: f64, p: &ExponentParams) -> f64 {
    x.powf(p.alpha) + p.c * x - p.c * nu
}

/// Nonnegative root of `x^alpha + c x = c nu`.
pub fn phibar(nu: f64, p: &ExponentParams) -> f64 {
    assert!(nu >= 0.0, "phibar needs nu >= 0");
    if nu == 0.0 {
        return 0.0;
    }
    let (a, c) = (p.alpha, p.c);
    // The root lies below both nu and (c nu)^(1/alpha).
    let mut hi = nu.min((c * nu).powf(1.0 / a));
    let mut lo = 0.0;
    let mut x = hi;
    for _ in 0..200 {
        let f = real_residual(x, nu, p);
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let df = a * x.powf(a - 1.0) + c;
        let mut next = x - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-16 * x.max(1e-300) {
            x = next;
            break;
        }
        x = next;
    }
    x
}

/// Residual `|x^alpha + c x - c nu|` of a candidate root.
pub fn phibar_residual(x: f64, nu: f64, p: &ExponentParams) -> f64 {
    real_residual(x, nu, p).abs()
}

pub fn psi_equation(z: Complex64, t: f64, p: &ExponentParams) -> Complex64 {
    cpow(z, p.alpha) + p.c * z + Complex64::new(0.0, t * p.c)
}

fn psi_derivative(z: Complex64, p: &ExponentParams) -> Complex64 {
    p.alpha * cpow(z, p.alpha - 1.0) + p.c
}

/// `|psibar^alpha + c psibar + i t c|`.
pub fn psibar_residual(z: Complex64, t: f64, p: &ExponentParams) -> f64 {
    psi_equation(z, t, p).norm()
}

/// Newton from `z0`, step halving whenever the residual does not decrease or the
/// iterate leaves the closed right half-plane.
fn newton(z0: Complex64, t: f64, p: &ExponentParams) -> Option<Complex64> {
    let mut z = z0;
    let mut r = psibar_residual(z, t, p);
    let scale = 1.0 + (t * p.c).abs();
    for _ in 0..100 {
        if r <= 1e-15 * scale {
            return Some(z);
        }
        let step = psi_equation(z, t, p) / psi_derivative(z, p);
        let mut h = 1.0;
        loop {
            let mut cand = z - step * h;
            if cand.re < 0.0 {
                cand.re = 0.0;
            }
            let rc = psibar_residual(cand, t, p);
            if rc < r {
                if (cand - z).norm() <= 1e-16 * cand.norm() {
                    return Some(cand);
                }
                z = cand;
                r = rc;
                break;
            }
            h *= 0.5;
            if h < 1e-12 {
                return (r <= 1e-11 * scale).then_some(z);
            }
        }
    }
    (r <= 1e-11 * scale).then_some(z)
}

/// Initial value `(-i t c)^(1/alpha)` valid for large `|t|`.
pub fn psibar_asymptotic(t: f64, p: &ExponentParams) -> Complex64 {
    cpow(Complex64::new(0.0, -t * p.c), 1.0 / p.alpha)
}

const HOMOTOPY_START: f64 = 1e6;
const HOMOTOPY_RATIO: f64 = 0.7;

/// Root of the characteristic equation with nonnegative real part.
///
/// Continues from `|t| = 1e6` down to the target, where the asymptotic initializer
/// is accurate, taking geometric steps and halving a step whenever Newton fails.
pub fn psibar(t: f64, p: &ExponentParams) -> Result<Complex64, LevyError> {
    if t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if t < 0.0 {
        return psibar(-t, p).map(|z| z.conj());
    }
    let start = HOMOTOPY_START.max(t);
    let mut z = newton(psibar_asymptotic(start, p), start, p)
        .ok_or(LevyError::NoConvergence { t, residual: f64::NAN })?;
    let mut s = start;
    let mut ratio = HOMOTOPY_RATIO;
    while s > t {
        let next = (s * ratio).max(t);
        match newton(z, next, p) {
            Some(w) => {
                z = w;
                s = next;
                ratio = (ratio * ratio.sqrt()).max(HOMOTOPY_RATIO);
            }
            None => {
                ratio = ratio.sqrt();
                if ratio > 1.0 - 1e-9 {
                    return Err(LevyError::NoConvergence { t, residual: psibar_residual(z, s, p) });
                }
            }
        }
    }
    Ok(z)
}

/// `psibar` on a list of points, continuing from one point to the next in order
/// of decreasing `|t|` to avoid restarting the homotopy.
pub fn psibar_many(ts: &[f64], p: &ExponentParams) -> Result<Vec<Complex64>, LevyError> {
    let mut idx: Vec<usize> = (0..ts.len()).collect();
    idx.sort_by(|&i, &j| ts[j].abs().total_cmp(&ts[i].abs()));
    let mut out = vec![Complex64::new(0.0, 0.0); ts.len()];
    let mut prev: Option<(f64, Complex64)> = None;
    for i in idx {
        let t = ts[i].abs();
        let z = if t == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            let guess = match prev {
                Some((s, w)) if s <= 1.25 * t + 1e-12 => newton(w, t, p),
                _ => None,
            };
            match guess {
                Some(z) => z,
                None => psibar(t, p)?,
            }
        };
        prev = Some((t, z));
        out[i] = if ts[i] < 0.0 { z.conj() } else { z };
    }
    Ok(out)
}

/// Asymptotic real part `|t c|^(1/alpha) cos(pi / (2 alpha))`.
pub fn psibar_real_asymptotic(t: f64, p: &ExponentParams) -> f64 {
    (t * p.c).abs().powf(1.0 / p.alpha) * (PI / (2.0 * p.alpha)).cos()
}

/// Bound on the modulus of every root of the characteristic equation.
fn root_radius(t: f64, p: &ExponentParams) -> f64 {
    let a = p.alpha;
    let r1 = (2.0 * p.c).powf(1.0 / (a - 1.0));
    let r2 = (2.0 * (t * p.c).abs()).powf(1.0 / a);
    2.0 * r1.max(r2) + 1.0
}

/// Winding number of `g` along the closed polyline through `pts`, refining any
/// segment whose argument change exceeds `pi / 8`.
fn winding<F: Fn(Complex64) -> Complex64>(g: &F, pts: &[Complex64]) -> f64 {
    fn seg<F: Fn(Complex64) -> Complex64>(g: &F, a: Complex64, b: Complex64, depth: u32) -> f64 {
        let (ga, gb) = (g(a), g(b));
        let d = (gb / ga).arg();
        if d.abs() <= PI / 8.0 || depth > 40 {
            return d;
        }
        let m = (a + b) * 0.5;
        seg(g, a, m, depth + 1) + seg(g, m, b, depth + 1)
    }
    let mut total = 0.0;
    for i in 0..pts.len() {
        total += seg(g, pts[i], pts[(i + 1) % pts.len()], 0);
    }
    total / (2.0 * PI)
}

/// Count of roots of the characteristic equation in the open right half-plane,
/// by the argument principle on a half disk sampled at 64 points per side.
pub fn count_roots_right_half(t: f64, p: &ExponentParams) -> i64 {
    let r = root_radius(t, p);
    let g = |z: Complex64| psi_equation(z, t, p);
    let mut pts = Vec::with_capacity(128);
    for k in 0..64 {
        let th = -PI / 2.0 + PI * k as f64 / 64.0;
        pts.push(Complex64::from_polar(r, th));
    }
    for k in 0..64 {
        let y = r - 2.0 * r * k as f64 / 64.0;
        pts.push(Complex64::new(0.0, y));
    }
    winding(&g, &pts).round() as i64
}

/// Count of roots in the left half of the slit plane (argument in `(pi/2, pi)`
/// or `(-pi, -pi/2)`), for logging only.
pub fn count_roots_left_half(t: f64, p: &ExponentParams) -> i64 {
    let r = root_radius(t, p);
    let eps = 1e-9;
    let g = |z: Complex64| psi_equation(z, t, p);
    let mut total = 0;
    for sign in [1.0, -1.0] {
        let mut pts = Vec::with_capacity(192);
        // Quarter disk between the imaginary axis and one side of the cut.
        for k in 0..64 {
            let y = sign * (r * k as f64 / 64.0);
            pts.push(Complex64::new(0.0, y));
        }
        for k in 0..64 {
            let th = sign * (PI / 2.0 + (PI / 2.0) * k as f64 / 64.0);
            pts.push(Complex64::from_polar(r, th));
        }
        for k in 0..64 {
            let x = -r + r * k as f64 / 64.0;
            pts.push(Complex64::new(x, sign * eps));
        }
        if sign < 0.0 {
            pts.reverse();
        }
        total += winding(&g, &pts).round() as i64;
    }
    total
}
