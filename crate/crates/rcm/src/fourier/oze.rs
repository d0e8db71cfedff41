//! The Ornstein-Zernike relation `τ̂ = (φ̂ + Π̂)/(1 - λ(φ̂ + Π̂))`.

use std::sync::Arc;

use super::rw::{check_mu, green};
use super::{FourierError, Result};
use crate::estimators::TauProfile;
use crate::model::ConnectionFunction;
use crate::radial::{Decay, RadialFunction};

/// `τ̂ = (φ̂ + Π̂)/(1 - λ(φ̂ + Π̂))` from a given `Π̂`.
///
/// The denominator is checked on `k_grid` (and at `k = 0`); a value that is
/// not positive means `λ` is supercritical for this `Π̂`, or `Π̂` is invalid.
pub fn oze_solve(cf: &ConnectionFunction, lambda: f64, pi_hat: &RadialFunction, k_grid: &[f64]) -> Result<RadialFunction> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(FourierError::InvalidArgument(format!("intensity must be non-negative, got {lambda}")));
    }
    for &k in std::iter::once(&0.0).chain(k_grid) {
        let denominator = 1.0 - lambda * (cf.phi_hat(k) + pi_hat.eval(k));
        if !(denominator > 0.0) {
            return Err(FourierError::Supercritical { k, denominator });
        }
    }
    let c = Arc::new(cf.clone());
    let p = pi_hat.clone();
    Ok(RadialFunction::new(
        move |k| {
            let a = c.phi_hat(k) + p.eval(k);
            a / (1.0 - lambda * a)
        },
        cf.hat_decay(1.0),
    )
    .with_breakpoints(pi_hat.breakpoints.clone()))
}

/// The random-walk surrogate `φ̂ Ĝ_μ`.
pub fn green_tau_hat(cf: &ConnectionFunction, mu: f64) -> Result<RadialFunction> {
    check_mu(mu)?;
    let c = Arc::new(cf.clone());
    Ok(RadialFunction::new(move |k| c.phi_hat(k) * green(&c, mu, k), cf.hat_decay(1.0)))
}

/// `τ̂` of a measured profile: the transform of its piecewise-linear
/// interpolant with the fitted exponential tail.
pub fn profile_tau_hat(p: &TauProfile) -> RadialFunction {
    let d = p.dimension as f64;
    let p = Arc::new(p.clone());
    RadialFunction::new(move |k| p.transform(k).0, Decay::Algebraic { exponent: 0.5 * (d + 1.0) })
}
