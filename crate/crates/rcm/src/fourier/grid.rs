//! Discrete transforms on a periodic grid, used to check the identity
//! `Δ_k â(l) = -2 â_k(l)` where `â_k` is the transform of `[1 - cos(k·x)] a(x)`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{FourierError, Result};

/// `â(l_m) = h Σ_j a(x_j) e^{-i l_m x_j}` on `x_j = -L/2 + jh`, `h = L/n`,
/// at the frequencies `l_m = 2πm/L`, `m = 0..n` (indices past `n/2` stand
/// for negative frequencies).
pub fn grid_transform<F: Fn(f64) -> f64>(a: F, n: usize, length: f64) -> Vec<Complex64> {
    let h = length / n as f64;
    let mut buf: Vec<Complex64> = (0..n).map(|j| Complex64::new(a(-0.5 * length + j as f64 * h), 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // e^{-i l_m x_0} = e^{iπm}.
    buf.iter().enumerate().map(|(m, v)| v * h * if m % 2 == 0 { 1.0 } else { -1.0 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaKIdentity {
    /// `k = 2π shift / L`.
    pub k: f64,
    /// `max_l |Δ_k â(l) + 2 â_k(l)|`.
    pub max_error: f64,
    /// `max_l |â(l)|`, for scale.
    pub max_transform: f64,
}

/// Evaluates both sides of `Δ_k â(l) = -2 â_k(l)` on the grid, with `k`
/// the grid frequency `2π shift / L`. The grid size must be even so that
/// frequency indices wrap without a phase.
pub fn delta_k_identity<F: Fn(f64) -> f64>(a: F, n: usize, length: f64, shift: usize) -> Result<DeltaKIdentity> {
    if n < 4 || !n.is_multiple_of(2) || !(length > 0.0) || shift >= n / 2 {
        return Err(FourierError::InvalidArgument("need an even grid size, L > 0 and shift < n/2".into()));
    }
    let k = 2.0 * PI * shift as f64 / length;
    let ah = grid_transform(&a, n, length);
    let akh = grid_transform(|x| (1.0 - (k * x).cos()) * a(x), n, length);
    let mut max_error: f64 = 0.0;
    for m in 0..n {
        let lo = ah[(m + n - shift) % n];
        let hi = ah[(m + shift) % n];
        let delta = lo + hi - 2.0 * ah[m];
        max_error = max_error.max((delta + 2.0 * akh[m]).norm());
    }
    let max_transform = ah.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(DeltaKIdentity { k, max_error, max_transform })
}
