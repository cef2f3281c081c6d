//! Density of the marginal `tau_u` by Fourier inversion of its characteristic
//! function `exp(-u (c psibar(t) + i t c))`.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::exponent::{psibar_many, ExponentParams};
use super::LevyError;

/// Integrand truncation level for `u c Re psibar(t)`.
pub const TAIL_EXPONENT: f64 = 40.0;

const GAUSS_16: [(f64, f64); 8] = [
    (0.095_012_509_837_637_44, 0.189_450_610_455_068_5),
    (0.281_603_550_779_258_9, 0.182_603_415_044_923_6),
    (0.458_016_777_657_227_4, 0.169_156_519_395_002_5),
    (0.617_876_244_402_643_7, 0.149_595_988_816_576_7),
    (0.755_404_408_355_003, 0.124_628_971_255_533_9),
    (0.865_631_202_387_831_8, 0.095_158_511_682_492_79),
    (0.944_575_023_073_232_6, 0.062_253_523_938_647_89),
    (0.989_400_934_991_649_9, 0.027_152_459_411_754_09),
];

/// Quadrature nodes and characteristic-function values for one `(u, params)`;
/// evaluating the density at many points reuses them.
#[derive(Debug, Clone)]
pub struct DensityTable {
    pub u: f64,
    pub params: ExponentParams,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    cf_pos: Vec<Complex64>,
    cf_neg: Vec<Complex64>,
    pub t_max: f64,
}

/// Density value together with the diagnostics of its computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub value: f64,
    pub imaginary_residue: f64,
    pub error_estimate: f64,
}

impl DensityTable {
    /// Gauss-Legendre panels of width `panel` on `[0, t_max]`, where `t_max`
    /// is the first panel end past the truncation level.
    pub fn new(u: f64, p: &ExponentParams, panel: f64) -> Result<Self, LevyError> {
        if !(u > 0.0) {
            return Err(LevyError::BadU(u));
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut cf_pos = Vec::new();
        let mut a = 0.0;
        loop {
            let b = a + panel;
            let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
            let mut ts = Vec::with_capacity(16);
            for &(x, w) in &GAUSS_16 {
                ts.push(mid - half * x);
                weights.push(half * w);
                ts.push(mid + half * x);
                weights.push(half * w);
            }
            let z = psibar_many(&ts, p)?;
            cf_pos.extend(
                z.iter().zip(&ts).map(|(z, t)| (-(z * p.c + Complex64::new(0.0, t * p.c)) * u).exp()),
            );
            nodes.extend(ts);
            let re_end = super::exponent::psibar(b, p)?.re;
            a = b;
            if u * p.c * re_end > TAIL_EXPONENT {
                break;
            }
        }
        let neg: Vec<f64> = nodes.iter().map(|t| -t).collect();
        let zn = psibar_many(&neg, p)?;
        let cf_neg = zn
            .iter()
            .zip(&neg)
            .map(|(z, t)| (-(z * p.c + Complex64::new(0.0, t * p.c)) * u).exp())
            .collect();
        Ok(Self { u, params: *p, nodes, weights, cf_pos, cf_neg, t_max: a })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn raw(&self, x: f64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.nodes.len() {
            let t = self.nodes[i];
            let e = Complex64::from_polar(1.0, -t * x);
            s += (e * self.cf_pos[i] + e.conj() * self.cf_neg[i]) * self.weights[i];
        }
        s / (2.0 * PI)
    }

    /// `q_u(x)` and its imaginary residue.
    pub fn eval(&self, x: f64) -> DensityValue {
        let z = self.raw(x);
        DensityValue { value: z.re, imaginary_residue: z.im.abs(), error_estimate: f64::NAN }
    }
}

/// Density of `tau_u` at every point of `xs`, computed at two panel widths; the
/// difference is the reported error. Fails when it exceeds `tol`.
pub fn density_q_many(
    u: f64,
    xs: &[f64],
    p: &ExponentParams,
    tol: f64,
) -> Result<Vec<DensityValue>, LevyError> {
    let span = xs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let panel = (2.0 / (1.0 + span)).min(1.0);
    let coarse = DensityTable::new(u, p, panel)?;
    let fine = DensityTable::new(u, p, panel / 2.0)?;
    let mut out = Vec::with_capacity(xs.len());
    let mut worst = 0.0f64;
    for &x in xs {
        let a = coarse.eval(x);
        let mut b = fine.eval(x);
        b.error_estimate = (a.value - b.value).abs();
        worst = worst.max(b.error_estimate);
        out.push(b);
    }
    if worst > tol {
        return Err(LevyError::Quadrature { error: worst });
    }
    Ok(out)
}

/// Density of `tau_u` at one point.
pub fn density_q(u: f64, x: f64, p: &ExponentParams) -> Result<DensityValue, LevyError> {
    Ok(density_q_many(u, &[x], p, 1e-6)?[0])
}

/// Exact density of `tau_u` for `alpha = 2`: `tau_u + c u` is inverse Gaussian
/// with mean `c u` and shape `c^3 u^2 / 2`.
pub fn density_q_brownian(u: f64, x: f64, c: f64) -> f64 {
    let y = x + c * u;
    if y <= 0.0 {
        return 0.0;
    }
    let (mu, lam) = (c * u, c * c * c * u * u / 2.0);
    (lam / (2.0 * PI * y * y * y)).sqrt() * (-lam * (y - mu).powi(2) / (2.0 * mu * mu * y)).exp()
}
