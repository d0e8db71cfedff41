//! The bootstrap functions `f₁ = λ`, `f₂ = sup |τ̂|/Ĝ_μ` and
//! `f₃ = sup |Δ_k τ̂(l)|/Û_μ(k, l)`.
//!
//! Suprema are maxima over grids, refined twice around the maximizer.
//! Vector arguments are taken collinear along one axis.

use serde::{Deserialize, Serialize};

use super::rw::{check_rotation, green};
use super::{FourierError, Result};
use crate::model::ConnectionFunction;
use crate::radial::RadialFunction;

/// `μ_λ = 1 - 1/τ̂_λ(0)`.
pub fn mu_lambda(tau_hat_zero: f64) -> Result<f64> {
    if !(tau_hat_zero >= 1.0) {
        return Err(FourierError::InvalidArgument(format!("τ̂(0) must be at least 1, got {tau_hat_zero}")));
    }
    Ok(1.0 - 1.0 / tau_hat_zero)
}

/// `Δ_k a(l) = a(l - k) + a(l + k) - 2a(l)`.
pub fn delta_k<F: Fn(f64) -> f64>(a: F, k: f64, l: f64) -> f64 {
    a(l - k) + a(l + k) - 2.0 * a(l)
}

/// `0, lo, ..., hi` with the positive points spaced logarithmically.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let r = (hi / lo).ln() / (n - 1) as f64;
    std::iter::once(0.0).chain((0..n).map(|i| lo * (r * i as f64).exp())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    /// Largest relative change allowed between the last two refinements.
    pub refine_tol: f64,
    pub refinements: usize,
    /// Points per axis in each refinement window.
    pub window_points: usize,
    /// Below `series_below / scale` the `k → 0` limit replaces the ratio.
    pub series_below: f64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions { refine_tol: 0.01, refinements: 2, window_points: 17, series_below: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapValues {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub mu: f64,
    pub argmax_f2: f64,
    /// `(k, l)` attaining `f₃`.
    pub argmax_f3: (f64, f64),
    /// Maxima over the grids as given, before refinement.
    pub grid_f2: f64,
    pub grid_f3: f64,
}

struct Ratios<'a> {
    cf: &'a ConnectionFunction,
    tau: &'a RadialFunction,
    mu: f64,
    series_below: f64,
    /// Step of the second difference in the `k → 0` limit.
    h: f64,
}

impl Ratios<'_> {
    fn tau(&self, x: f64) -> f64 {
        self.tau.eval(x.abs())
    }

    fn g(&self, x: f64) -> f64 {
        green(self.cf, self.mu, x.abs())
    }

    fn f2(&self, k: f64) -> f64 {
        self.tau(k).abs() / self.g(k)
    }

    fn f3(&self, k: f64, l: f64) -> f64 {
        let (gm, g0, gp) = (self.g(l - k), self.g(l), self.g(l + k));
        if k.abs() < self.series_below {
            // Δ_k τ̂(l) ≈ k² τ̂''(l) and 1 - φ̂(k) ≈ q a k².
            let Some(a) = self.cf.small_k_coefficient() else {
                return 0.0;
            };
            let second = delta_k(|x| self.tau(x), self.h, l) / (self.h * self.h);
            return second.abs() / (84.0 * self.cf.q() * a * 3.0 * g0 * g0);
        }
        let u = 84.0 * self.cf.phi_hat_deficit(k) * (gm * g0 + g0 * gp + gm * gp);
        delta_k(|x| self.tau(x), k, l).abs() / u
    }
}

/// Window `[grid[i-1], grid[i+1]]` around index `i`.
fn window(grid: &[f64], i: usize, n: usize) -> Vec<f64> {
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}

fn argmax1<F: Fn(f64) -> f64>(grid: &[f64], f: F) -> (usize, f64) {
    grid.iter().enumerate().map(|(i, &x)| (i, f(x))).fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
}

fn check_refinement(levels: &[f64], tol: f64) -> Result<()> {
    if let [.., coarse, fine] = levels {
        if (fine - coarse).abs() > tol * fine.abs() {
            return Err(FourierError::GridTooCoarse { coarse: *coarse, fine: *fine });
        }
    }
    Ok(())
}

/// `f₁`, `f₂`, `f₃` for a radial `τ̂` with `μ_λ = 1 - 1/τ̂(0)`.
///
/// `k = 0` is always added to `k_grid`; there the ratio of `f₃` is 0/0 and
/// its limit `τ̂''(l)/(252 q a Ĝ(l)²)` is used, with `a` the small-`k`
/// coefficient of `1 - φ̂/q`. Fails with [`FourierError::GridTooCoarse`]
/// when the last two refinements differ by more than the tolerance.
pub fn bootstrap_f(
    cf: &ConnectionFunction,
    lambda: f64,
    tau_hat: &RadialFunction,
    k_grid: &[f64],
    l_grid: &[f64],
) -> Result<BootstrapValues> {
    bootstrap_f_with(cf, lambda, tau_hat, k_grid, l_grid, BootstrapOptions::default())
}

pub fn bootstrap_f_with(
    cf: &ConnectionFunction,
    lambda: f64,
    tau_hat: &RadialFunction,
    k_grid: &[f64],
    l_grid: &[f64],
    opts: BootstrapOptions,
) -> Result<BootstrapValues> {
    check_rotation(cf)?;
    let sorted = |g: &[f64]| {
        let mut v: Vec<f64> = g.iter().map(|x| x.abs()).collect();
        v.push(0.0);
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    };
    let (kg, lg) = (sorted(k_grid), sorted(l_grid));
    if kg.len() < 2 || lg.len() < 2 {
        return Err(FourierError::InvalidArgument("grids need at least one positive point".into()));
    }
    let mu = mu_lambda(tau_hat.eval(0.0))?;
    let scale = cf.tail_radius(0.5);
    let r = Ratios { cf, tau: tau_hat, mu, series_below: opts.series_below / scale, h: 1e-3 / scale };

    let (mut i, grid_f2) = argmax1(&kg, |k| r.f2(k));
    let mut levels2 = vec![grid_f2];
    let mut grid = kg.clone();
    let mut argmax_f2 = grid[i];
    for _ in 0..opts.refinements {
        grid = window(&grid, i, opts.window_points);
        let (j, v) = argmax1(&grid, |k| r.f2(k));
        i = j;
        argmax_f2 = grid[j];
        levels2.push(v.max(*levels2.last().unwrap()));
    }
    check_refinement(&levels2, opts.refine_tol)?;

    let mut best = (0, 0, f64::NEG_INFINITY);
    for (a, &k) in kg.iter().enumerate() {
        for (b, &l) in lg.iter().enumerate() {
            let v = r.f3(k, l);
            if v > best.2 {
                best = (a, b, v);
            }
        }
    }
    let grid_f3 = best.2;
    let mut levels3 = vec![grid_f3];
    let (mut gk, mut gl) = (kg, lg);
    let mut argmax_f3 = (gk[best.0], gl[best.1]);
    for _ in 0..opts.refinements {
        let (wk, wl) = (window(&gk, best.0, opts.window_points), window(&gl, best.1, opts.window_points));
        best = (0, 0, f64::NEG_INFINITY);
        for (a, &k) in wk.iter().enumerate() {
            for (b, &l) in wl.iter().enumerate() {
                let v = r.f3(k, l);
                if v > best.2 {
                    best = (a, b, v);
                }
            }
        }
        argmax_f3 = (wk[best.0], wl[best.1]);
        levels3.push(best.2.max(*levels3.last().unwrap()));
        gk = wk;
        gl = wl;
    }
    check_refinement(&levels3, opts.refine_tol)?;

    Ok(BootstrapValues {
        f1: lambda,
        f2: *levels2.last().unwrap(),
        f3: *levels3.last().unwrap(),
        mu,
        argmax_f2,
        argmax_f3,
        grid_f2,
        grid_f3,
    })
}
