//! Deterministic Fourier-space numerics: random-walk integrals, triangle
//! diagrams, the Ornstein-Zernike relation, bootstrap functions and the
//! discretized second derivative.
//!
//! Transforms use `f̂(k) = ∫ f(x) e^{ik·x} dx` and integrals over `k` carry
//! the factor `(2π)^{-d}`.

pub mod bootstrap;
pub mod checks;
pub mod empirical;
pub mod export;
pub mod grid;
pub mod oze;
pub mod rw;
pub mod triangle;

use thiserror::Error;

use crate::model::ModelError;
pub use crate::radial::{radial_integral, radial_integral_with, Decay, RadialError, RadialFunction, RadialOptions};

pub use bootstrap::{bootstrap_f, bootstrap_f_with, delta_k, log_grid, mu_lambda, BootstrapOptions, BootstrapValues};
pub use checks::{cosine_split_check, tau_bound_check, TauBoundPoint};
pub use export::{table_csv, tabulate, TableRow};
pub use grid::{delta_k_identity, DeltaKIdentity};
pub use oze::{green_tau_hat, oze_solve, profile_tau_hat};
pub use rw::{related_integrals, rw_condition_integral, Related, RelatedIntegral};
pub use triangle::{b_epsilon, epsilon_triangle, open_triangle_at, triangle_mean_field, triangles, TauHat, Triangles};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourierError {
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("dimension {dimension} is not above the threshold {threshold}; the integral is reported as divergent")]
    BelowDimensionThreshold { dimension: usize, threshold: f64 },
    #[error("1 - λ(φ̂ + Π̂) = {denominator} is not positive at k = {k}")]
    Supercritical { k: f64, denominator: f64 },
    #[error("grid too coarse: successive refinements give {coarse} and {fine}")]
    GridTooCoarse { coarse: f64, fine: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, FourierError>;
