//! Numerics and simulation for the Levy process obtained from a spectrally
//! positive stable process by drifted first passage.

pub mod density;
pub mod exponent;
pub mod gf;
pub mod mu_n;
pub mod paths;

use thiserror::Error;

pub use density::{density_q, density_q_brownian, density_q_many, DensityTable, DensityValue};
pub use exponent::{phibar, psibar, psibar_many, ExponentParams};
pub use gf::{admissible_rays, verify_generating_estimate, EstimateReport};
pub use mu_n::{mu_n_law, MuNLaw, DEFAULT_MU_N_TERMS};
pub use paths::{reduced_tree, sample_tau_path, vervaat_shift, vervaat_transform, TauMode, WalkModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("alpha must lie in (1, 2], got {0}")]
    BadAlpha(f64),
    #[error("c must be positive, got {0}")]
    BadC(f64),
    #[error("u must be positive, got {0}")]
    BadU(f64),
    #[error("Newton continuation failed at t = {t} (residual {residual})")]
    NoConvergence { t: f64, residual: f64 },
    #[error("quadrature did not converge: achieved error {error}")]
    Quadrature { error: f64 },
    #[error("marking probability must lie in (0, 1], got {0}")]
    BadProbability(f64),
    #[error("at least two series terms are needed, got {0}")]
    BadTerms(usize),
    #[error("fixed point stalled at {0}")]
    FixedPointStall(f64),
    #[error("series coefficient {0} is negative beyond rounding")]
    NegativeWeight(f64),
    #[error("offspring law error: {0}")]
    Law(String),
    #[error("invalid path mode: {0}")]
    BadMode(String),
    #[error("not a bridge: {0}")]
    NotABridge(String),
    #[error("marks must cover every vertex and include the root")]
    BadMarks,
    #[error("grid point {0} + {1}i is not inside the disk |1 + w| < 1")]
    OutsideDisk(f64, f64),
}
