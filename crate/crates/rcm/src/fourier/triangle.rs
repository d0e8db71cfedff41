//! Triangle diagrams evaluated on a model for `τ̂`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::rw::{check_mu, deficit_exponent, green, origin_scale, singular_radial_integral};
use super::{FourierError, Result};
use crate::model::ConnectionFunction;
use crate::quadrature::Quad;
use crate::radial::{Decay, RadialFunction, RadialOptions};
use crate::special::{omega, unit_ball_volume};

/// The two-point function in Fourier space that the diagrams are built from.
#[derive(Debug, Clone)]
pub enum TauHat {
    /// The random-walk surrogate `φ̂ Ĝ_μ`.
    Green { mu: f64 },
    /// Any radial `τ̂`, for example an empirical one.
    Radial(RadialFunction),
}

impl TauHat {
    /// `τ̂` and the exponent of its singularity at `k = 0`.
    fn function(&self, cf: &ConnectionFunction) -> Result<(RadialFunction, f64)> {
        match self {
            TauHat::Green { mu } => {
                check_mu(*mu)?;
                let c = Arc::new(cf.clone());
                let mu = *mu;
                let f = RadialFunction::new(move |k| c.phi_hat(k) * green(&c, mu, k), cf.hat_decay(1.0));
                let e = if mu == 1.0 { deficit_exponent(cf) } else { 0.0 };
                Ok((f, e))
            }
            TauHat::Radial(f) => Ok((f.clone(), 0.0)),
        }
    }
}

fn power_decay(decay: Decay, p: f64) -> Decay {
    match decay {
        Decay::Gaussian { scale } => Decay::Gaussian { scale: scale / p.sqrt() },
        Decay::Oscillatory { period, exponent } => Decay::Oscillatory { period, exponent: exponent * p },
        Decay::Algebraic { exponent } => Decay::Algebraic { exponent: exponent * p },
    }
}

fn decay_exponent(decay: Decay) -> f64 {
    match decay {
        Decay::Gaussian { .. } => f64::INFINITY,
        Decay::Oscillatory { exponent, .. } | Decay::Algebraic { exponent } => exponent,
    }
}

/// `∫ (a τ̂² + b τ̂³)(k) Ω_d(k r) dk/(2π)^d`.
fn diagram(cf: &ConnectionFunction, tau: &TauHat, a: f64, b: f64, r: f64) -> Result<Quad> {
    let d = cf.dimension();
    let (f, e) = tau.function(cf)?;
    // The cube is the more singular term at the origin, the square the
    // slower one at infinity.
    let pe = if b != 0.0 { 3.0 } else { 2.0 } * e;
    let p = if a != 0.0 { 2.0 } else { 3.0 };
    if e > 0.0 && d as f64 <= pe {
        return Err(FourierError::BelowDimensionThreshold { dimension: d, threshold: pe });
    }
    let decay = if r == 0.0 {
        power_decay(f.decay, p)
    } else {
        match f.decay {
            Decay::Gaussian { scale } => Decay::Gaussian { scale: scale / p.sqrt() },
            other => Decay::Algebraic { exponent: p * decay_exponent(other) + 0.5 * (d as f64 - 1.0) },
        }
    };
    let g = f.clone();
    let h = RadialFunction::new(
        move |k| {
            let t = g.eval(k);
            let w = if r == 0.0 { 1.0 } else { omega(d, k * r) };
            (a * t * t + b * t * t * t) * w
        },
        decay,
    )
    .with_breakpoints(f.breakpoints.clone());
    singular_radial_integral(&h, d, pe, origin_scale(cf), RadialOptions::default())
}

/// `Δ_λ = λ² ∫ τ̂³ dk/(2π)^d`, the triangle `λ²(τ⋆τ⋆τ)(0)`.
pub fn triangle_mean_field(cf: &ConnectionFunction, lambda: f64, tau: &TauHat) -> Result<Quad> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(FourierError::InvalidArgument(format!("intensity must be non-negative, got {lambda}")));
    }
    if lambda == 0.0 {
        tau.function(cf)?;
        return Ok(Quad::zero());
    }
    diagram(cf, tau, 0.0, lambda * lambda, 0.0)
}

/// The three triangles at `x = 0`, with `τ°(x) = δ_{x,0} + λτ(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangles {
    /// `∫ τ̂²`.
    pub bubble: f64,
    /// `Δ = λ² ∫ τ̂³`.
    pub triangle: f64,
    /// `Δ° = λ(τ°⋆τ⋆τ)(0) = λ ∫ τ̂² + Δ`.
    pub open: f64,
    /// `Δ°° = (τ°⋆τ°⋆τ)(0) = τ(0) + 2λ ∫ τ̂² + Δ` with `τ(0) = 1`.
    pub double: f64,
}

/// `Δ ≤ Δ° ≤ Δ°°` at the origin. When `τ̂ ≥ 0` the three convolutions are
/// largest at the origin, so these are the suprema.
pub fn triangles(cf: &ConnectionFunction, lambda: f64, tau: &TauHat) -> Result<Triangles> {
    let triangle = triangle_mean_field(cf, lambda, tau)?.value;
    let bubble = diagram(cf, tau, 1.0, 0.0, 0.0)?.value;
    let open = lambda * bubble + triangle;
    Ok(Triangles { bubble, triangle, open, double: 1.0 + 2.0 * lambda * bubble + triangle })
}

/// `Δ°(x) = λ(τ⋆τ)(x) + λ²(τ⋆τ⋆τ)(x)` at `|x| = r`.
pub fn open_triangle_at(cf: &ConnectionFunction, lambda: f64, tau: &TauHat, r: f64) -> Result<Quad> {
    diagram(cf, tau, lambda, lambda * lambda, r)
}

/// `Δ^(ε) = sup_{|x| ≥ ε} Δ°(x)`, as a maximum over `points` radii spread
/// evenly on `[ε, r_max]`. Returns the value and the radius attaining it.
pub fn epsilon_triangle(
    cf: &ConnectionFunction,
    lambda: f64,
    tau: &TauHat,
    eps: f64,
    r_max: f64,
    points: usize,
) -> Result<(f64, f64)> {
    if !(eps > 0.0 && r_max > eps && points >= 2) {
        return Err(FourierError::InvalidArgument("need 0 < ε < r_max and at least two points".into()));
    }
    let mut best = (f64::NEG_INFINITY, eps);
    for i in 0..points {
        let r = eps + (r_max - eps) * i as f64 / (points - 1) as f64;
        let v = open_triangle_at(cf, lambda, tau, r)?.value;
        if v > best.0 {
            best = (v, r);
        }
    }
    Ok(best)
}

/// `B^(ε) = (λ |B_ε|)^{1/2}` with `|B_ε|` the volume of the ε-ball.
pub fn b_epsilon(lambda: f64, d: usize, eps: f64) -> f64 {
    (lambda * unit_ball_volume(d) * eps.powi(d as i32)).sqrt()
}
