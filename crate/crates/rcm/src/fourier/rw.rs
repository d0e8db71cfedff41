//! Random-walk integrals `∫ |φ̂|^m Ĝ_μ^s` and their shifted relatives.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FourierError, Result};
use crate::model::ConnectionFunction;
use crate::quadrature::{integrate, Quad, Tolerance};
use crate::radial::{radial_integral_with, radial_moment, RadialError, RadialFunction, RadialOptions};
use crate::special::{gamma_fn, sphere_area};

/// `Ĝ_μ(k) = q / (q - μ φ̂(k))`, `+∞` at the pole.
pub(crate) fn green(cf: &ConnectionFunction, mu: f64, k: f64) -> f64 {
    let q = cf.q();
    let denom = (1.0 - mu) * q + mu * cf.phi_hat_deficit(k);
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        q / denom
    }
}

/// Exponent `e` with `1 - φ̂(k)/q ≍ |k|^e` as `k → 0`.
pub(crate) fn deficit_exponent(cf: &ConnectionFunction) -> f64 {
    if cf.small_k_coefficient().is_some() {
        2.0
    } else {
        cf.params().alpha.unwrap_or(2.0).min(2.0)
    }
}

/// Wavenumber below which the small-`k` substitution is used.
pub(crate) fn origin_scale(cf: &ConnectionFunction) -> f64 {
    0.5 / cf.tail_radius(0.5)
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(FourierError::InvalidArgument(format!("mu must lie in [0, 1], got {mu}")));
    }
    Ok(())
}

pub(crate) fn check_rotation(cf: &ConnectionFunction) -> Result<()> {
    if !cf.is_rotation_invariant() {
        return Err(FourierError::InvalidArgument("the radial engine needs a rotation-invariant φ".into()));
    }
    Ok(())
}

/// `∫ f(|k|) dk/(2π)^d` when `f(t) t^e` stays bounded as `t → 0`.
///
/// On `[0, ε]` the substitution `t = ε u^{1/(d-e)}` absorbs the factor
/// `t^{d-1-e}` and leaves a bounded integrand; the rest goes to the radial
/// engine. Needs `e < d`.
pub(crate) fn singular_radial_integral(f: &RadialFunction, d: usize, e: f64, eps: f64, opts: RadialOptions) -> Result<Quad> {
    if e <= 0.0 {
        return Ok(radial_integral_with(f, d, opts)?);
    }
    let a1 = d as f64 - e;
    if a1 <= 0.0 {
        return Err(FourierError::BelowDimensionThreshold { dimension: d, threshold: e });
    }
    let h = |u: f64| {
        let t = (eps * u.powf(1.0 / a1)).max(1e-150);
        t.powf(e) * f.eval(t)
    };
    let tol = Tolerance { abs: opts.abs_tol, rel: opts.rel_tol, max_panels: 400 };
    let near = integrate(h, 0.0, 1.0, tol).scale(eps.powf(a1) / a1);
    let g = f.clone();
    let mut breaks = f.breakpoints.clone();
    breaks.push(eps);
    let far_f = RadialFunction::new(move |t| if t < eps { 0.0 } else { g.eval(t) }, f.decay).with_breakpoints(breaks);
    let far = radial_moment(&far_f, d, opts)?;
    let q = near.add(far).scale(sphere_area(d) / (2.0 * PI).powi(d as i32));
    if !q.value.is_finite() {
        return Err(RadialError::NotConverged { value: q.value, achieved: q.error }.into());
    }
    Ok(q)
}

/// `∫ |φ̂(k)|^m Ĝ_μ(k)^s dk/(2π)^d`.
///
/// At `μ = 1` the integrand is singular at `k = 0`. The integral is only
/// reported for dimensions above the threshold of the model class (`4s`
/// for finite-range models, `2s` for spread-out finite variance, `(α∧2)s`
/// for long range); below it the call fails with
/// [`FourierError::BelowDimensionThreshold`].
pub fn rw_condition_integral(cf: &ConnectionFunction, mu: f64, m: u32, s: u32) -> Result<Quad> {
    rw_condition_integral_with(cf, mu, m, s, RadialOptions::default())
}

pub fn rw_condition_integral_with(cf: &ConnectionFunction, mu: f64, m: u32, s: u32, opts: RadialOptions) -> Result<Quad> {
    check_mu(mu)?;
    check_rotation(cf)?;
    if m < 2 {
        return Err(FourierError::InvalidArgument(format!("m must be at least 2, got {m}")));
    }
    let d = cf.dimension();
    let singular = mu == 1.0 && s > 0;
    if singular {
        let threshold = cf.dimension_threshold(s as f64);
        if d as f64 <= threshold {
            return Err(FourierError::BelowDimensionThreshold { dimension: d, threshold });
        }
    }
    let c = Arc::new(cf.clone());
    let f = RadialFunction::new(
        move |k| {
            let p = c.phi_hat(k).abs().powi(m as i32);
            if s == 0 {
                p
            } else {
                p * green(&c, mu, k).powi(s as i32)
            }
        },
        cf.hat_decay(m as f64),
    );
    let e = if singular { s as f64 * deficit_exponent(cf) } else { 0.0 };
    singular_radial_integral(&f, d, e, origin_scale(cf), opts)
}

/// Which shifted integral [`related_integrals`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Related {
    /// `∫ |φ̂(l)|^m Ĝ(l)^{3-n} [Ĝ(l+k) + Ĝ(l-k)]^n`, `n ∈ {1, 2, 3}`.
    Sum(u32),
    /// `∫ |φ̂(l)|^m Ĝ(l) Ĝ(l+k) Ĝ(l-k)`.
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelatedIntegral {
    pub exact: Quad,
    /// Upper bound free of `k`:
    /// `c (∫ φ̂^{2m-2} Ĝ³)^{1/2} (∫ φ̂² Ĝ³)^{1/2}` with `c = 2^n` for the sums
    /// and `c = 1` for the product.
    pub bound: f64,
}

/// Average of `f(cos θ)` over the unit sphere, `θ` the angle to a fixed axis.
pub(crate) fn angular_average<F: Fn(f64) -> f64>(d: usize, f: F) -> f64 {
    if d == 1 {
        return 0.5 * (f(1.0) + f(-1.0));
    }
    let p = d as i32 - 2;
    let w = PI.sqrt() * gamma_fn((d as f64 - 1.0) / 2.0) / gamma_fn(d as f64 / 2.0);
    let tol = Tolerance { abs: 1e-14, rel: 1e-10, max_panels: 400 };
    integrate(|t: f64| f(t.cos()) * t.sin().powi(p), 0.0, PI, tol).value / w
}

/// The shifted integrals at `|k| = k`, with `l` ranging over `R^d`.
///
/// The exact value integrates over `|l|` and over the angle between `l`
/// and `k`, which is what is left of the symmetry once `Ĝ(l ± k)` is
/// written as the transform of `cos(k·x) G_μ(x)`. The bound is the one of
/// the Cauchy-Schwarz argument, using `Ĝ(l+k)Ĝ(l-k) ≤ Ĝ_{μ,k}(l)²` and
/// `|cos| ≤ 1` in position space.
pub fn related_integrals(cf: &ConnectionFunction, mu: f64, m: u32, which: Related, k: f64) -> Result<RelatedIntegral> {
    check_mu(mu)?;
    check_rotation(cf)?;
    if !(2..=3).contains(&m) {
        return Err(FourierError::InvalidArgument(format!("m must be 2 or 3, got {m}")));
    }
    let n = match which {
        Related::Sum(n) if (1..=3).contains(&n) => n,
        Related::Sum(n) => return Err(FourierError::InvalidArgument(format!("n must be 1, 2 or 3, got {n}"))),
        Related::Product => 0,
    };
    let d = cf.dimension();
    let k = k.abs();
    let opts = RadialOptions::default();
    let factor = if n > 0 { 2f64.powi(n as i32) } else { 1.0 };
    let bound = factor * (rw_condition_integral(cf, mu, 2 * m - 2, 3)?.value * rw_condition_integral(cf, mu, 2, 3)?.value).sqrt();
    if k == 0.0 {
        return Ok(RelatedIntegral { exact: rw_condition_integral(cf, mu, m, 3)?.scale(factor), bound });
    }
    let c = Arc::new(cf.clone());
    let (own, shifted) = if n > 0 { (3 - n, n) } else { (1, 0) };
    let f = RadialFunction::new(
        move |r| {
            let gp = |cos: f64| green(&c, mu, (r * r + k * k + 2.0 * r * k * cos).max(0.0).sqrt());
            let gm = |cos: f64| green(&c, mu, (r * r + k * k - 2.0 * r * k * cos).max(0.0).sqrt());
            let avg = if shifted > 0 {
                angular_average(d, |cos| (gp(cos) + gm(cos)).powi(shifted as i32))
            } else {
                angular_average(d, |cos| gp(cos) * gm(cos))
            };
            c.phi_hat(r).abs().powi(m as i32) * green(&c, mu, r).powi(own as i32) * avg
        },
        cf.hat_decay(m as f64),
    )
    .with_breakpoints(vec![k]);
    let e = if mu == 1.0 { own as f64 * deficit_exponent(cf) } else { 0.0 };
    let exact = singular_radial_integral(&f, d, e, origin_scale(cf).min(0.5 * k), opts)?;
    Ok(RelatedIntegral { exact, bound })
}
