//! Inequalities used as self-tests.

use serde::{Deserialize, Serialize};

use super::rw::check_rotation;
use super::{FourierError, Result};
use crate::estimators::{ProfileKind, TauProfile};
use crate::model::ConnectionFunction;
use crate::quadrature::gauss_legendre;
use crate::special::{gamma_fn, sphere_area};

/// `1 - cos(Σ t_i) ≤ m Σ (1 - cos t_i)` with `m` the number of terms.
pub fn cosine_split_check(ts: &[f64]) -> bool {
    let m = ts.len() as f64;
    let lhs = 1.0 - ts.iter().sum::<f64>().cos();
    let rhs = m * ts.iter().map(|t| 1.0 - t.cos()).sum::<f64>();
    lhs <= rhs + 1e-12 * (1.0 + rhs)
}

/// One radius of [`tau_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauBoundPoint {
    pub radius: f64,
    pub tau: f64,
    /// `φ(x) + λ(φ⋆τ)(x)`.
    pub rhs: f64,
    /// `τ - rhs` and its standard error.
    pub margin: f64,
    pub margin_se: f64,
    pub holds: bool,
}

/// Composite Gauss-Legendre nodes on `[a, b]`.
fn composite(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

/// Checks `τ_λ(x) ≤ φ(x) + λ(φ⋆τ_λ)(x)` at every radius of a profile, with
/// the convolution taken of the piecewise-linear interpolant (zero past
/// the last radius, which only lowers the right side).
///
/// The convolution is linear in the measured values, so it is computed as
/// a weight vector by product Gauss-Legendre rules in the distance to `x`
/// and the angle to it, and the margin's standard error follows from the
/// covariance of the profile.
pub fn tau_bound_check(cf: &ConnectionFunction, tau: &TauProfile) -> Result<Vec<TauBoundPoint>> {
    check_rotation(cf)?;
    if tau.kind != ProfileKind::Tau || tau.dimension != cf.dimension() {
        return Err(FourierError::InvalidArgument("need a two-point profile of the model's dimension".into()));
    }
    let d = tau.dimension;
    let radii = &tau.radii;
    let m = radii.len();
    let reach = cf.support_radius().unwrap_or_else(|| cf.tail_radius(1e-10));
    let mut s_breaks: Vec<f64> = vec![0.0];
    s_breaks.extend(cf.radial_breakpoints().into_iter().filter(|b| *b < reach));
    s_breaks.push(reach);
    let mut s_nodes = Vec::new();
    for w in s_breaks.windows(2) {
        s_nodes.extend(composite(w[0], w[1], 64, 8));
    }
    let theta_nodes: Vec<(f64, f64)> = if d == 1 {
        vec![(0.0, 0.5), (std::f64::consts::PI, 0.5)]
    } else {
        let norm = std::f64::consts::PI.sqrt() * gamma_fn((d as f64 - 1.0) / 2.0) / gamma_fn(d as f64 / 2.0);
        composite(0.0, std::f64::consts::PI, 64, 8)
            .into_iter()
            .map(|(t, w)| (t, w * t.sin().powi(d as i32 - 2) / norm))
            .collect()
    };
    let means = tau.means();
    let mut out = Vec::with_capacity(m);
    for (j, &r) in radii.iter().enumerate() {
        let mut w = vec![0.0; m];
        for &(s, ws) in &s_nodes {
            let radial = ws * sphere_area(d) * s.powi(d as i32 - 1) * cf.phi_radial(s);
            if radial == 0.0 {
                continue;
            }
            for &(t, wt) in &theta_nodes {
                let rho = (r * r + s * s - 2.0 * r * s * t.cos()).max(0.0).sqrt();
                if rho > radii[m - 1] {
                    continue;
                }
                let i = radii.partition_point(|x| *x <= rho).clamp(1, m - 1);
                let (a, b) = (radii[i - 1], radii[i]);
                let u = if b > a { (rho - a) / (b - a) } else { 0.0 };
                w[i - 1] += radial * wt * (1.0 - u);
                w[i] += radial * wt * u;
            }
        }
        let conv: f64 = w.iter().zip(&means).map(|(a, b)| a * b).sum();
        let rhs = cf.phi_radial(r) + tau.lambda * conv;
        let mut c: Vec<f64> = w.iter().map(|x| -tau.lambda * x).collect();
        c[j] += 1.0;
        let margin = means[j] - rhs;
        let margin_se = tau.moments.linear_se(&c);
        out.push(TauBoundPoint { radius: r, tau: means[j], rhs, margin, margin_se, holds: margin <= 3.0 * margin_se + 1e-9 });
    }
    Ok(out)
}
