//! Integration of rotation-invariant functions over `R^d`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::quadrature::{integrate, integrate_breaks, richardson, Quad, Tolerance};
use crate::special::sphere_area;

/// How the radial profile behaves for large arguments. The engine picks its
/// truncation strategy from this hint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// Faster than any power beyond a few multiples of `scale`.
    Gaussian { scale: f64 },
    /// Envelope `t^{-exponent}` modulated with the given period.
    Oscillatory { period: f64, exponent: f64 },
    /// Envelope `t^{-exponent}` without a usable period.
    Algebraic { exponent: f64 },
}

/// A function of `|k|` together with what the quadrature needs to know
/// about it.
#[derive(Clone)]
pub struct RadialFunction {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub decay: Decay,
    /// Points where the integrand is singular or has a kink; panels are
    /// split there.
    pub breakpoints: Vec<f64>,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("decay", &self.decay)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl RadialFunction {
    pub fn new<F>(f: F, decay: Decay) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RadialFunction { f: Arc::new(f), decay, breakpoints: Vec::new() }
    }

    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.retain(|p| p.is_finite() && *p > 0.0);
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        self.breakpoints = points;
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadialError {
    #[error("integral diverges: tail exponent {exponent} does not exceed dimension {dimension}")]
    Divergent { exponent: f64, dimension: usize },
    #[error("radial quadrature did not converge (achieved error {achieved:e} on value {value:e})")]
    NotConverged { value: f64, achieved: f64 },
}

/// Settings for [`radial_integral`].
#[derive(Debug, Clone, Copy)]
pub struct RadialOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Number of periods integrated directly before the extrapolated tail.
    pub base_periods: usize,
    pub doublings: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions { rel_tol: 1e-9, abs_tol: 1e-14, base_periods: 24, doublings: 5 }
    }
}

/// `∫_0^∞ t^{d-1} f(t) dt`, with the error estimate.
pub fn radial_moment(f: &RadialFunction, d: usize, opts: RadialOptions) -> Result<Quad, RadialError> {
    let g = |t: f64| {
        if t == 0.0 {
            if d == 1 {
                f.eval(0.0)
            } else {
                0.0
            }
        } else {
            t.powi(d as i32 - 1) * f.eval(t)
        }
    };
    let tol = Tolerance { abs: opts.abs_tol, rel: opts.rel_tol, max_panels: 400 };
    let q = match f.decay {
        Decay::Gaussian { scale } => {
            let mut breaks = vec![0.0];
            breaks.extend(f.breakpoints.iter().copied());
            let start = *breaks.last().unwrap();
            let mut total = integrate_breaks(&g, &breaks, tol);
            let mut a = start;
            let mut quiet = 0;
            for _ in 0..400 {
                let b = a + scale;
                let piece = integrate(g, a, b, tol);
                total = total.add(piece);
                a = b;
                if a > 6.0 * scale && piece.value.abs() <= 1e-16 * total.value.abs().max(opts.abs_tol) {
                    quiet += 1;
                    if quiet >= 2 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
            total
        }
        Decay::Oscillatory { period, exponent } => {
            let p = exponent - d as f64;
            if p <= 0.0 {
                return Err(RadialError::Divergent { exponent, dimension: d });
            }
            let last_break = f.breakpoints.last().copied().unwrap_or(0.0);
            let first_aligned = ((last_break / period).ceil() as usize).max(opts.base_periods);
            let mut breaks = vec![0.0];
            breaks.extend(f.breakpoints.iter().copied().filter(|&b| b < period));
            let mut j = 1usize;
            let mut interior = f.breakpoints.iter().copied().filter(|&b| b >= period).peekable();
            while j <= first_aligned {
                let next = j as f64 * period;
                while let Some(&b) = interior.peek() {
                    if b < next {
                        if b > *breaks.last().unwrap() {
                            breaks.push(b);
                        }
                        interior.next();
                    } else {
                        break;
                    }
                }
                breaks.push(next);
                j += 1;
            }
            let mut partial = integrate_breaks(&g, &breaks, tol);
            let mut partials = vec![partial.value];
            let mut periods = first_aligned;
            let mut previous: Option<f64> = None;
            for _ in 0..opts.doublings {
                let upto = 2 * periods;
                let cells: Vec<f64> = (periods..=upto).map(|i| i as f64 * period).collect();
                partial = partial.add(integrate_breaks(&g, &cells, tol));
                partials.push(partial.value);
                periods = upto;
                // Stop once successive extrapolations agree.
                if partials.len() >= 3 {
                    let (v, _) = richardson(&partials, p);
                    if let Some(prev) = previous {
                        if (v - prev).abs() <= opts.abs_tol.max(opts.rel_tol * v.abs()) {
                            break;
                        }
                    }
                    previous = Some(v);
                }
            }
            let (value, rich_err) = richardson(&partials, p);
            Quad { value, error: partial.error + rich_err, ..partial }
        }
        Decay::Algebraic { exponent } => {
            let p = exponent - d as f64;
            if p <= 0.0 {
                return Err(RadialError::Divergent { exponent, dimension: d });
            }
            let mut breaks = vec![0.0];
            breaks.extend(f.breakpoints.iter().copied());
            let mut edge = breaks.last().copied().unwrap().max(1.0);
            if *breaks.last().unwrap() < edge {
                breaks.push(edge);
            }
            let mut total = integrate_breaks(&g, &breaks, tol);
            let mut tail_est = f64::INFINITY;
            for _ in 0..200 {
                let next = 2.0 * edge;
                total = total.add(integrate(g, edge, next, tol));
                edge = next;
                tail_est = (g(edge) * edge).abs() / p;
                if tail_est <= opts.rel_tol * total.value.abs() + opts.abs_tol {
                    break;
                }
            }
            Quad { error: total.error + tail_est, ..total }
        }
    };
    let q = Quad { converged: q.converged && q.error <= 1e3 * (opts.rel_tol * q.value.abs() + opts.abs_tol), ..q };
    if !q.value.is_finite() {
        return Err(RadialError::NotConverged { value: q.value, achieved: q.error });
    }
    Ok(q)
}

/// `∫_{R^d} f(|k|) dk / (2π)^d`.
pub fn radial_integral(f: &RadialFunction, d: usize) -> Result<Quad, RadialError> {
    radial_integral_with(f, d, RadialOptions::default())
}

pub fn radial_integral_with(f: &RadialFunction, d: usize, opts: RadialOptions) -> Result<Quad, RadialError> {
    let c = sphere_area(d) / (2.0 * PI).powi(d as i32);
    // In one dimension the "sphere" is the two points ±1, so c = 2/(2π).
    Ok(radial_moment(f, d, opts)?.scale(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integrates_to_density_at_origin() {
        for d in 1..=6 {
            let f = RadialFunction::new(|k: f64| (-0.5 * k * k).exp(), Decay::Gaussian { scale: 1.0 });
            let q = radial_integral(&f, d).unwrap();
            let exact = (2.0 * PI).powf(-(d as f64) / 2.0);
            assert!((q.value - exact).abs() < 1e-12 * exact.max(1.0), "d={d}");
        }
    }

    #[test]
    fn oscillatory_tail_is_extrapolated() {
        // ∫_0^∞ (sin t / t)^2 dt = π/2 in d = 1.
        let f = RadialFunction::new(
            |t: f64| if t == 0.0 { 1.0 } else { (t.sin() / t).powi(2) },
            Decay::Oscillatory { period: PI, exponent: 2.0 },
        );
        let q = radial_moment(&f, 1, RadialOptions::default()).unwrap();
        assert!((q.value - PI / 2.0).abs() < 1e-8, "{q:?}");
    }

    #[test]
    fn divergence_is_flagged() {
        let f = RadialFunction::new(|t: f64| 1.0 / (1.0 + t * t), Decay::Algebraic { exponent: 2.0 });
        assert!(matches!(radial_integral(&f, 2), Err(RadialError::Divergent { .. })));
        assert!(radial_integral(&f, 1).is_ok());
    }
}
