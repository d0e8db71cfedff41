//! Transforms of radial profiles measured on a grid of radii.
//!
//! A profile is interpolated linearly between the measured radii and
//! continued past the last radius by an exponential fitted to the last few
//! points. The transform of the interpolated part is linear in the measured
//! values, so it is returned as a weight vector: standard errors of any
//! transform then follow from the covariance of the measurements.

use serde::{Deserialize, Serialize};

use crate::quadrature::{gauss_legendre, integrate, Tolerance};
use crate::special::{omega, sphere_area};

/// Points used for the tail fit.
pub const TAIL_POINTS: usize = 5;

/// `f(r) ≈ value · exp(-(r - start)/length)` for `r ≥ start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub start: f64,
    pub value: f64,
    pub length: f64,
}

impl TailFit {
    pub fn eval(&self, r: f64) -> f64 {
        self.value * (-(r - self.start) / self.length).exp()
    }
}

/// Least-squares fit of `ln f` against `r` over the last [`TAIL_POINTS`]
/// radii. `None` when a value there is not positive or the fit does not
/// decay.
pub fn fit_tail(radii: &[f64], values: &[f64]) -> Option<TailFit> {
    let n = radii.len();
    if n < TAIL_POINTS || values.len() != n {
        return None;
    }
    let r = &radii[n - TAIL_POINTS..];
    let v = &values[n - TAIL_POINTS..];
    if v.iter().any(|x| *x <= 0.0) {
        return None;
    }
    let logs: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    let fit = crate::stats::line_fit(r, &logs, None)?;
    if !(fit.slope < 0.0) {
        return None;
    }
    let start = radii[n - 1];
    Some(TailFit { start, value: fit.at(start).exp(), length: -1.0 / fit.slope })
}

/// `S_{d-1} r^{d-1} Ω_d(k r)`: the radial kernel of the `d`-dimensional
/// Fourier transform.
fn kernel(d: usize, k: f64, r: f64) -> f64 {
    sphere_area(d) * r.powi(d as i32 - 1) * if k == 0.0 { 1.0 } else { omega(d, k * r) }
}

/// Weights `w_i` with `∫_{|x| ≤ r_max} f(x) e^{ik·x} dx = Σ w_i f(r_i)` for
/// the piecewise-linear interpolant of a radial `f`.
pub fn transform_weights(radii: &[f64], d: usize, k: f64) -> Vec<f64> {
    let mut w = vec![0.0; radii.len()];
    for i in 0..radii.len().saturating_sub(1) {
        let (a, b) = (radii[i], radii[i + 1]);
        let h = b - a;
        if h <= 0.0 {
            continue;
        }
        let n = (8 + (2.0 * k * h) as usize).min(96);
        let (x, wt) = gauss_legendre(n);
        for (xj, wj) in x.iter().zip(&wt) {
            let t = 0.5 * (xj + 1.0);
            let r = a + h * t;
            let g = 0.5 * h * wj * kernel(d, k, r);
            w[i] += g * (1.0 - t);
            w[i + 1] += g * t;
        }
    }
    w
}

/// Transform of the exponential tail.
pub fn tail_transform(tail: &TailFit, d: usize, k: f64) -> f64 {
    let s = sphere_area(d);
    if k == 0.0 {
        // ∫_0^∞ e^{-t/ℓ} (R + t)^{d-1} dt = Σ_j C(d-1, j) R^{d-1-j} j! ℓ^{j+1}.
        let (r, l) = (tail.start, tail.length);
        let mut sum = 0.0;
        let mut binom = 1.0;
        let mut fact = 1.0;
        for j in 0..d {
            if j > 0 {
                binom *= (d - j) as f64 / j as f64;
                fact *= j as f64;
            }
            sum += binom * r.powi((d - 1 - j) as i32) * fact * l.powi(j as i32 + 1);
        }
        return s * tail.value * sum;
    }
    let end = tail.start + 60.0 * tail.length;
    let tol = Tolerance { abs: 1e-12, rel: 1e-9, max_panels: 2000 };
    integrate(|r| tail.eval(r) * kernel(d, k, r), tail.start, end, tol).value
}

/// Transform of a measured profile, tail included when given.
pub fn empirical_transform(radii: &[f64], values: &[f64], d: usize, k: f64, tail: Option<&TailFit>) -> f64 {
    let w = transform_weights(radii, d, k);
    let body: f64 = w.iter().zip(values).map(|(a, b)| a * b).sum();
    body + tail.map_or(0.0, |t| tail_transform(t, d, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_profile_transform() {
        // f(r) = exp(-r²/2) in d = 3 has transform (2π)^{3/2} exp(-k²/2).
        let radii: Vec<f64> = (0..=2400).map(|i| i as f64 * 0.005).collect();
        let vals: Vec<f64> = radii.iter().map(|r| (-0.5 * r * r).exp()).collect();
        for k in [0.0, 0.7, 2.0] {
            let got = empirical_transform(&radii, &vals, 3, k, None);
            let want = (2.0 * std::f64::consts::PI).powf(1.5) * (-0.5 * k * k).exp();
            assert!((got - want).abs() < 1e-4 * want.max(1e-3), "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn exponential_tail_integral() {
        let t = TailFit { start: 2.0, value: 0.5, length: 0.7 };
        for d in 1..5 {
            let exact = tail_transform(&t, d, 0.0);
            let tol = Tolerance { abs: 1e-13, rel: 1e-11, max_panels: 500 };
            let num = integrate(|r| t.eval(r) * kernel(d, 0.0, r), 2.0, 80.0, tol).value;
            assert!((exact - num).abs() < 1e-9 * exact, "d={d}");
        }
    }

    #[test]
    fn tail_fit_recovers_exponential() {
        let radii: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let vals: Vec<f64> = radii.iter().map(|r| 2.0 * (-r / 1.5f64).exp()).collect();
        let t = fit_tail(&radii, &vals).unwrap();
        assert!((t.length - 1.5).abs() < 1e-10);
        assert!((t.eval(6.0) - 2.0 * (-4.0f64).exp()).abs() < 1e-10);
    }
}
