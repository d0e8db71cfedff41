//! Connection functions, their Fourier transforms, the random-walk Green's
//! function and the scalar constants attached to a model class.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use statrs::function::erf::erfc;
use statrs::function::beta::beta_reg;
use thiserror::Error;

use crate::quadrature::{integrate, Tolerance};
use crate::radial::{radial_integral, Decay, RadialError, RadialFunction};
use crate::special::{omega, omega_deficit, unit_ball_volume};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("point has dimension {got}, connection function has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Green's function has a pole at k = 0 for mu = 1")]
    Pole,
    #[error("quadrature did not converge (achieved error {achieved:e})")]
    QuadratureFailed { achieved: f64 },
    #[error("H1 model needs the decay base rho for g(d) = rho^d")]
    MissingRho,
    #[error("{0} is not rotation invariant; use the vector form")]
    NotRotationInvariant(&'static str),
    #[error(transparent)]
    Radial(#[from] RadialError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Model families shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    BooleanBall,
    Gaussian,
    SpreadOutBox,
    SpreadOutBall,
    LongRange,
}

/// Which truncation the long-range profile uses near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LongRangeCutoff {
    /// `h(x) = (|x| ∨ 1)^{-(d+α)}`.
    #[default]
    Unit,
    /// `h(x) ∝ (|x| ∨ r_d)^{-(d+α)}`, normalized to unit mass before spreading.
    UnitVolumeRadius,
}

/// User-facing parameters of a connection function. These are what the
/// config schema stores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionParams {
    pub kind: Kind,
    #[serde(alias = "d")]
    pub dimension: usize,
    /// Ball radius for `BooleanBall`, and for `SpreadOutBall` the radius of the
    /// unspread profile. Defaults: `r_d` and 1.
    #[serde(default)]
    pub radius: Option<f64>,
    /// Spread `L >= 1`.
    #[serde(default)]
    pub spread: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Half-widths of the unspread box; defaults to all ones.
    #[serde(default)]
    pub half_widths: Option<Vec<f64>>,
    #[serde(default)]
    pub cutoff: LongRangeCutoff,
    /// Rescale the argument so that `q_φ = 1`.
    #[serde(default = "default_true")]
    pub normalize: bool,
}

fn default_true() -> bool {
    true
}

impl ConnectionParams {
    pub fn new(kind: Kind, dimension: usize) -> Self {
        ConnectionParams {
            kind,
            dimension,
            radius: None,
            spread: None,
            alpha: None,
            half_widths: None,
            cutoff: LongRangeCutoff::Unit,
            normalize: true,
        }
    }
}

/// Shape after normalization, in the coordinates used for simulation.
#[derive(Debug, Clone, PartialEq)]
enum Profile {
    Ball { height: f64, radius: f64 },
    Gaussian,
    Box { height: f64, half: Vec<f64> },
    LongRange { height: f64, kink: f64, alpha: f64 },
}

/// A connection function `φ: R^d -> [0,1]`.
#[derive(Debug)]
pub struct ConnectionFunction {
    params: ConnectionParams,
    profile: Profile,
    q: f64,
    q_original: f64,
    lr_table: OnceLock<Option<UniformCubic>>,
    directions: OnceLock<Vec<f64>>,
}

impl Clone for ConnectionFunction {
    fn clone(&self) -> Self {
        ConnectionFunction {
            params: self.params.clone(),
            profile: self.profile.clone(),
            q: self.q,
            q_original: self.q_original,
            lr_table: OnceLock::new(),
            directions: OnceLock::new(),
        }
    }
}

impl PartialEq for ConnectionFunction {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
    }
}

/// Radius of the ball of unit volume in `d` dimensions.
pub fn unit_volume_radius(d: usize) -> f64 {
    unit_ball_volume(d).powf(-1.0 / d as f64)
}

impl ConnectionFunction {
    pub fn new(params: ConnectionParams) -> Result<Self> {
        let d = params.dimension;
        if d == 0 {
            return Err(ModelError::InvalidParameter("dimension must be positive".into()));
        }
        let df = d as f64;
        let spread = params.spread.unwrap_or(1.0);
        let needs_spread = matches!(params.kind, Kind::SpreadOutBox | Kind::SpreadOutBall | Kind::LongRange);
        if needs_spread && !(spread >= 1.0 && spread.is_finite()) {
            return Err(ModelError::InvalidParameter(format!("spread L must be >= 1, got {spread}")));
        }
        let positive = |name: &str, v: f64| -> Result<f64> {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(ModelError::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        // Raw profile and its mass.
        let (raw, q_raw) = match params.kind {
            Kind::BooleanBall => {
                let r = positive("radius", params.radius.unwrap_or_else(|| unit_volume_radius(d)))?;
                (Profile::Ball { height: 1.0, radius: r }, unit_ball_volume(d) * r.powi(d as i32))
            }
            Kind::Gaussian => (Profile::Gaussian, 1.0),
            Kind::SpreadOutBall => {
                let r = positive("radius", params.radius.unwrap_or(1.0))?;
                let height = spread.powi(-(d as i32));
                let radius = r * spread;
                (Profile::Ball { height, radius }, height * unit_ball_volume(d) * radius.powi(d as i32))
            }
            Kind::SpreadOutBox => {
                let half = params.half_widths.clone().unwrap_or_else(|| vec![1.0; d]);
                if half.len() != d {
                    return Err(ModelError::DimensionMismatch { expected: d, got: half.len() });
                }
                for &b in &half {
                    positive("half width", b)?;
                }
                let height = spread.powi(-(d as i32));
                let half: Vec<f64> = half.iter().map(|b| b * spread).collect();
                let vol: f64 = half.iter().map(|b| 2.0 * b).product();
                (Profile::Box { height, half }, height * vol)
            }
            Kind::LongRange => {
                let alpha = positive("alpha", params.alpha.unwrap_or(f64::NAN))?;
                let tail = 1.0 + df / alpha;
                match params.cutoff {
                    LongRangeCutoff::Unit => {
                        let height = spread.powi(-(d as i32));
                        let kink = spread;
                        (
                            Profile::LongRange { height, kink, alpha },
                            height * unit_ball_volume(d) * kink.powi(d as i32) * tail,
                        )
                    }
                    LongRangeCutoff::UnitVolumeRadius => {
                        let kink = spread * unit_volume_radius(d);
                        let height = 1.0 / (spread.powi(d as i32) * tail);
                        (Profile::LongRange { height, kink, alpha }, 1.0)
                    }
                }
            }
        };
        let s = if params.normalize { q_raw.powf(1.0 / df) } else { 1.0 };
        let profile = if (s - 1.0).abs() < 1e-15 {
            raw
        } else {
            match raw {
                Profile::Ball { height, radius } => Profile::Ball { height, radius: radius / s },
                Profile::Gaussian => Profile::Gaussian,
                Profile::Box { height, half } => Profile::Box { height, half: half.iter().map(|b| b / s).collect() },
                Profile::LongRange { height, kink, alpha } => Profile::LongRange { height, kink: kink / s, alpha },
            }
        };
        let q = if params.normalize { 1.0 } else { q_raw };
        let cf = ConnectionFunction { params, profile, q, q_original: q_raw, lr_table: OnceLock::new(), directions: OnceLock::new() };
        if cf.max_value() > 1.0 + 1e-12 {
            return Err(ModelError::InvalidParameter(format!("sup φ = {} exceeds 1", cf.max_value())));
        }
        Ok(cf)
    }

    /// Normalized Boolean model with radius `r_d` in dimension `d`.
    pub fn boolean(d: usize) -> Self {
        Self::new(ConnectionParams::new(Kind::BooleanBall, d)).expect("default Boolean model is valid")
    }

    /// Standard Gaussian density in dimension `d`.
    pub fn gaussian(d: usize) -> Self {
        Self::new(ConnectionParams::new(Kind::Gaussian, d)).expect("Gaussian model is valid")
    }

    pub fn spread_out_ball(d: usize, spread: f64) -> Result<Self> {
        let mut p = ConnectionParams::new(Kind::SpreadOutBall, d);
        p.spread = Some(spread);
        Self::new(p)
    }

    pub fn spread_out_box(d: usize, spread: f64) -> Result<Self> {
        let mut p = ConnectionParams::new(Kind::SpreadOutBox, d);
        p.spread = Some(spread);
        Self::new(p)
    }

    pub fn long_range(d: usize, spread: f64, alpha: f64) -> Result<Self> {
        let mut p = ConnectionParams::new(Kind::LongRange, d);
        p.spread = Some(spread);
        p.alpha = Some(alpha);
        Self::new(p)
    }

    pub fn params(&self) -> &ConnectionParams {
        &self.params
    }

    pub fn kind(&self) -> Kind {
        self.params.kind
    }

    pub fn dimension(&self) -> usize {
        self.params.dimension
    }

    /// `q_φ` in the coordinates used internally (1 when normalized).
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Mass of the profile before rescaling.
    pub fn q_original(&self) -> f64 {
        self.q_original
    }

    pub fn spread(&self) -> f64 {
        self.params.spread.unwrap_or(1.0)
    }

    pub fn is_rotation_invariant(&self) -> bool {
        !matches!(self.profile, Profile::Box { .. })
    }

    /// `sup_x φ(x)`.
    pub fn max_value(&self) -> f64 {
        match &self.profile {
            Profile::Ball { height, .. } | Profile::Box { height, .. } | Profile::LongRange { height, .. } => *height,
            Profile::Gaussian => (2.0 * PI).powf(-(self.dimension() as f64) / 2.0),
        }
    }

    /// Radius of the support, if compact.
    pub fn support_radius(&self) -> Option<f64> {
        match &self.profile {
            Profile::Ball { radius, .. } => Some(*radius),
            Profile::Box { half, .. } => Some(half.iter().map(|b| b * b).sum::<f64>().sqrt()),
            _ => None,
        }
    }

    /// Smallest radius outside of which `φ` carries relative mass at most `eps`.
    pub fn tail_radius(&self, eps: f64) -> f64 {
        let d = self.dimension() as f64;
        match &self.profile {
            Profile::Ball { radius, .. } => *radius,
            Profile::Box { half, .. } => half.iter().map(|b| b * b).sum::<f64>().sqrt(),
            Profile::Gaussian => {
                let chi = ChiSquared::new(d).expect("positive degrees of freedom");
                chi.inverse_cdf(1.0 - eps).sqrt()
            }
            Profile::LongRange { kink, alpha, .. } => {
                let out = d / (alpha + d);
                if eps >= out {
                    *kink
                } else {
                    kink * (out / eps).powf(1.0 / alpha)
                }
            }
        }
    }

    /// Period of the oscillation of `φ̂` at large `|k|`, when there is one.
    pub fn hat_period(&self) -> Option<f64> {
        match &self.profile {
            Profile::Ball { radius, .. } => Some(2.0 * PI / radius),
            Profile::LongRange { kink, .. } => Some(2.0 * PI / kink),
            _ => None,
        }
    }

    /// Power-law decay exponent of `|φ̂(k)|` (its envelope).
    pub fn hat_decay_exponent(&self) -> f64 {
        let d = self.dimension() as f64;
        match &self.profile {
            Profile::Ball { .. } => (d + 1.0) / 2.0,
            // Continuous at the kink, so one order smoother than the ball.
            Profile::LongRange { .. } => (d + 3.0) / 2.0,
            Profile::Box { .. } => 1.0,
            Profile::Gaussian => f64::INFINITY,
        }
    }

    /// `φ(x)` after a dimension check.
    pub fn eval_phi(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension() {
            return Err(ModelError::DimensionMismatch { expected: self.dimension(), got: x.len() });
        }
        Ok(self.phi(x))
    }

    /// `φ(x)` without checks; `x.len()` must be the dimension.
    #[inline]
    pub fn phi(&self, x: &[f64]) -> f64 {
        match &self.profile {
            Profile::Box { height, half } => {
                if x.iter().zip(half).all(|(xi, b)| xi.abs() <= *b) {
                    *height
                } else {
                    0.0
                }
            }
            _ => self.phi_sq_radius(x.iter().map(|v| v * v).sum()),
        }
    }

    /// `φ` as a function of `|x|^2`, for rotation-invariant kinds. For the box
    /// the displacement is taken along the first axis.
    #[inline]
    pub fn phi_sq_radius(&self, r2: f64) -> f64 {
        match &self.profile {
            Profile::Ball { height, radius } => {
                if r2 <= radius * radius {
                    *height
                } else {
                    0.0
                }
            }
            Profile::Gaussian => {
                let d = self.dimension() as f64;
                (-0.5 * r2).exp() * (2.0 * PI).powf(-d / 2.0)
            }
            Profile::LongRange { height, kink, alpha } => {
                let k2 = kink * kink;
                if r2 <= k2 {
                    *height
                } else {
                    let d = self.dimension() as f64;
                    height * (r2 / k2).powf(-(d + alpha) / 2.0)
                }
            }
            Profile::Box { height, half } => {
                if r2.sqrt() <= half[0] {
                    *height
                } else {
                    0.0
                }
            }
        }
    }

    /// `φ` at radius `r` (rotation-invariant kinds; first axis for the box).
    pub fn phi_radial(&self, r: f64) -> f64 {
        self.phi_sq_radius(r * r)
    }

    /// `φ̂(k)` for `|k| = k`. For the box this is the transform along the
    /// first coordinate axis.
    pub fn phi_hat(&self, k: f64) -> f64 {
        let k = k.abs();
        match &self.profile {
            Profile::Ball { radius, .. } => self.q * omega(self.dimension() + 2, k * radius),
            Profile::Gaussian => (-0.5 * k * k).exp(),
            Profile::Box { .. } => {
                let mut kv = vec![0.0; self.dimension()];
                kv[0] = k;
                self.phi_hat_vec(&kv)
            }
            Profile::LongRange { .. } => self.q - self.phi_hat_deficit(k),
        }
    }

    /// `φ̂(k)` for a wave vector.
    pub fn phi_hat_vec(&self, k: &[f64]) -> f64 {
        match &self.profile {
            Profile::Box { half, .. } => {
                self.q * k.iter().zip(half).map(|(ki, b)| sinc(ki * b)).product::<f64>()
            }
            _ => self.phi_hat(k.iter().map(|v| v * v).sum::<f64>().sqrt()),
        }
    }

    /// `φ̂(0) - φ̂(k)`, accurate for small `k`.
    pub fn phi_hat_deficit(&self, k: f64) -> f64 {
        let k = k.abs();
        match &self.profile {
            Profile::Ball { radius, .. } => self.q * omega_deficit(self.dimension() + 2, k * radius),
            Profile::Gaussian => -(-0.5 * k * k).exp_m1(),
            Profile::Box { .. } => {
                let mut kv = vec![0.0; self.dimension()];
                kv[0] = k;
                self.phi_hat_deficit_vec(&kv)
            }
            Profile::LongRange { kink, alpha, .. } => self.q * self.long_range_deficit(k * kink, *alpha),
        }
    }

    pub fn phi_hat_deficit_vec(&self, k: &[f64]) -> f64 {
        match &self.profile {
            Profile::Box { half, .. } => {
                let log_prod: f64 = k.iter().zip(half).map(|(ki, b)| sinc(ki * b).ln()).sum();
                let all_positive = k.iter().zip(half).all(|(ki, b)| sinc(ki * b) > 0.0);
                if all_positive {
                    -self.q * log_prod.exp_m1()
                } else {
                    self.q - self.phi_hat_vec(k)
                }
            }
            _ => self.phi_hat_deficit(k.iter().map(|v| v * v).sum::<f64>().sqrt()),
        }
    }

    /// The coefficient `a` in `1 - φ̂(k)/q = a |k|^2 + o(|k|^2)`, or `None`
    /// when the second moment is infinite.
    pub fn small_k_coefficient(&self) -> Option<f64> {
        let d = self.dimension() as f64;
        match &self.profile {
            Profile::Ball { radius, .. } => Some(radius * radius / (2.0 * (d + 2.0))),
            Profile::Gaussian => Some(0.5),
            Profile::Box { half, .. } => Some(half[0] * half[0] / 6.0),
            Profile::LongRange { kink, alpha, .. } => {
                if *alpha > 2.0 {
                    // Second moment over d, halved.
                    let inner = d / (d + 2.0);
                    let outer = d / (alpha - 2.0);
                    let m2 = kink * kink * (inner + outer) / (1.0 + d / alpha);
                    Some(m2 / (2.0 * d))
                } else {
                    None
                }
            }
        }
    }

    /// `φ^{⋆2}(x)`, when a closed form exists.
    pub fn conv2(&self, x: &[f64]) -> Option<f64> {
        let d = self.dimension();
        match &self.profile {
            Profile::Ball { height, radius } => {
                let t = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if t >= 2.0 * radius {
                    return Some(0.0);
                }
                let z = 1.0 - t * t / (4.0 * radius * radius);
                let lens = unit_ball_volume(d) * radius.powi(d as i32) * beta_reg((d as f64 + 1.0) / 2.0, 0.5, z);
                Some(height * height * lens)
            }
            Profile::Gaussian => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                Some((4.0 * PI).powf(-(d as f64) / 2.0) * (-r2 / 4.0).exp())
            }
            Profile::Box { height, half } => Some(
                height * height * x.iter().zip(half).map(|(xi, b)| (2.0 * b - xi.abs()).max(0.0)).product::<f64>(),
            ),
            Profile::LongRange { .. } => None,
        }
    }

    /// Draws a displacement with density `φ/q`.
    pub fn sample_displacement<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let d = self.dimension();
        match &self.profile {
            Profile::Gaussian => {
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
            }
            Profile::Box { half, .. } => {
                for (v, b) in out.iter_mut().zip(half) {
                    *v = rng.gen_range(-*b..=*b);
                }
            }
            Profile::Ball { radius, .. } => {
                let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
                random_direction(rng, out);
                out.iter_mut().for_each(|v| *v *= r);
            }
            Profile::LongRange { kink, alpha, .. } => {
                let df = d as f64;
                let inner_mass = alpha / (alpha + df);
                let u: f64 = rng.gen();
                let r = if u < inner_mass {
                    kink * (u / inner_mass).powf(1.0 / df)
                } else {
                    let v = (1.0 - u) / (1.0 - inner_mass);
                    kink * v.max(1e-300).powf(-1.0 / alpha)
                };
                random_direction(rng, out);
                out.iter_mut().for_each(|v| *v *= r);
            }
        }
    }

    /// `φ^{⋆m}(0) = ∫ φ̂(k)^m dk/(2π)^d`.
    pub fn conv_at_zero(&self, m: usize) -> Result<f64> {
        if m < 2 {
            return Err(ModelError::InvalidParameter("conv_at_zero needs m >= 2".into()));
        }
        let d = self.dimension();
        if let Profile::Box { height, half } = &self.profile {
            // Product of one-dimensional Irwin-Hall densities at the centre.
            let mut v = height.powi(m as i32);
            for b in half {
                v *= (2.0 * b).powi(m as i32 - 1) * irwin_hall_density(m, m as f64 / 2.0);
            }
            return Ok(v);
        }
        let f = self.hat_power_radial(m);
        let q = radial_integral(&f, d)?;
        if !q.converged {
            return Err(ModelError::QuadratureFailed { achieved: q.error });
        }
        Ok(q.value)
    }

    /// `k -> φ̂(k)^m` with the matching decay hint.
    pub fn hat_power_radial(&self, m: usize) -> RadialFunction {
        let me = self.clone();
        let me = std::sync::Arc::new(me);
        let decay = self.hat_decay(m as f64);
        let g = me.clone();
        RadialFunction::new(move |k| g.phi_hat(k).powi(m as i32), decay)
    }

    /// Decay hint for an integrand whose envelope is `|φ̂|^power`.
    pub fn hat_decay(&self, power: f64) -> Decay {
        match &self.profile {
            Profile::Gaussian => Decay::Gaussian { scale: 1.0 / power.max(1e-3).sqrt() },
            Profile::Ball { radius, .. } => {
                Decay::Oscillatory { period: 2.0 * PI / radius, exponent: power * self.hat_decay_exponent() }
            }
            Profile::LongRange { kink, .. } => {
                Decay::Oscillatory { period: 2.0 * PI / kink, exponent: power * self.hat_decay_exponent() }
            }
            Profile::Box { .. } => Decay::Algebraic { exponent: power },
        }
    }

    /// `1 - φ̂/q` for the long-range profile at `κ = |k| R_kink`.
    fn long_range_deficit(&self, kappa: f64, alpha: f64) -> f64 {
        const LO: f64 = 1e-3;
        // Above this the profile oscillates and direct evaluation is cheap.
        const HI: f64 = 8.0;
        if !(LO..=HI).contains(&kappa) {
            return long_range_deficit_direct(self.dimension(), alpha, kappa);
        }
        let table = self.lr_table.get_or_init(|| {
            let d = self.dimension();
            let per_decade = 200.0;
            let n = ((HI / LO).log10() * per_decade).ceil() as usize + 1;
            let h = (HI / LO).ln() / (n - 1) as f64;
            let tail = long_range_oscillating_tail(d, alpha, LR_SPLIT);
            let ys: Vec<f64> = (0..n)
                .map(|i| long_range_deficit_with_tail(d, alpha, (LO.ln() + h * i as f64).exp(), Some(tail)))
                .collect();
            Some(UniformCubic::new(LO.ln(), h, ys))
        });
        table.as_ref().expect("table built").eval(kappa.ln())
    }
}

impl ConnectionFunction {
    /// Radii at which `φ` jumps along the first axis.
    pub fn radial_breakpoints(&self) -> Vec<f64> {
        match &self.profile {
            Profile::Ball { radius, .. } => vec![*radius],
            Profile::Box { half, .. } => vec![half[0]],
            _ => Vec::new(),
        }
    }

    /// `P(|Y| > r)` for `Y` with density `φ/q`; `None` for the box.
    pub fn radial_survival(&self, r: f64) -> Option<f64> {
        let df = self.dimension() as f64;
        if r <= 0.0 {
            return Some(1.0);
        }
        match &self.profile {
            Profile::Ball { radius, .. } => Some(if r >= *radius { 0.0 } else { 1.0 - (r / radius).powf(df) }),
            Profile::Gaussian => {
                Some(ChiSquared::new(df).expect("positive degrees of freedom").sf(r * r))
            }
            Profile::LongRange { kink, alpha, .. } => {
                let inner = alpha / (alpha + df);
                Some(if r <= *kink { 1.0 - inner * (r / kink).powf(df) } else { (1.0 - inner) * (r / kink).powf(-alpha) })
            }
            Profile::Box { .. } => None,
        }
    }

    /// `∫_{Λ^c} φ(y - x) dy` for the cube `Λ = [-half, half)^d`.
    ///
    /// Exact for the Gaussian and the box. Other kinds average the radial
    /// survival function at the exit distance of the cube over a fixed set
    /// of directions (quasi-random, antithetic), which is exact up to the
    /// angular discretization.
    pub fn mass_outside_cube(&self, x: &[f64], half: f64) -> f64 {
        let d = self.dimension();
        match &self.profile {
            Profile::Gaussian => {
                let tail = |z: f64| 0.5 * erfc(z / std::f64::consts::SQRT_2);
                let log_in: f64 = x.iter().map(|xi| (-(tail(half - xi) + tail(half + xi))).ln_1p()).sum();
                -log_in.exp_m1()
            }
            Profile::Box { half: b, .. } => {
                let inside: f64 = x
                    .iter()
                    .zip(b)
                    .map(|(xi, bi)| ((xi + bi).min(half) - (xi - bi).max(-half)).max(0.0) / (2.0 * bi))
                    .product();
                self.q * (1.0 - inside)
            }
            _ => {
                let h = x.iter().map(|xi| half - xi.abs()).fold(f64::INFINITY, f64::min);
                if h > 0.0 && self.radial_survival(h) == Some(0.0) {
                    return 0.0;
                }
                let dirs = self.directions.get_or_init(|| direction_set(d));
                let n = dirs.len() / d;
                let mut s = 0.0;
                for w in dirs.chunks_exact(d) {
                    // Distance along `w` to the cube boundary.
                    let mut exit = f64::INFINITY;
                    for (xi, wi) in x.iter().zip(w) {
                        if *wi > 0.0 {
                            exit = exit.min((half - xi) / wi);
                        } else if *wi < 0.0 {
                            exit = exit.min((-half - xi) / wi);
                        }
                    }
                    s += self.radial_survival(exit.max(0.0)).unwrap_or(0.0);
                }
                self.q * s / n as f64
            }
        }
    }

    /// Cheap upper bound on [`mass_outside_cube`](Self::mass_outside_cube).
    pub fn mass_outside_cube_bound(&self, x: &[f64], half: f64) -> f64 {
        let h = x.iter().map(|xi| half - xi.abs()).fold(f64::INFINITY, f64::min);
        match self.radial_survival(h.max(0.0)) {
            Some(s) => self.q * s,
            None => self.q,
        }
    }
}

const DIRECTIONS: usize = 4096;

/// Unit vectors used for angular averages: exact pairs in `d = 1`, equally
/// spaced angles in `d = 2`, antithetic Halton points pushed through the
/// normal quantile otherwise.
fn direction_set(d: usize) -> Vec<f64> {
    match d {
        1 => vec![1.0, -1.0],
        2 => (0..DIRECTIONS)
            .flat_map(|i| {
                let t = 2.0 * PI * (i as f64 + 0.5) / DIRECTIONS as f64;
                [t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
            let normal = Normal::new(0.0, 1.0).expect("standard normal");
            let mut out = Vec::with_capacity(DIRECTIONS * d);
            let mut v = vec![0.0; d];
            for i in 1..=(DIRECTIONS / 2) as u64 {
                for (j, vj) in v.iter_mut().enumerate() {
                    *vj = normal.inverse_cdf(radical_inverse(i, PRIMES[j % PRIMES.len()]));
                }
                let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                out.extend(v.iter().map(|a| a / n));
                out.extend(v.iter().map(|a| -a / n));
            }
            out
        }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn random_direction<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut n2 = 0.0;
        for v in out.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v = z;
            n2 += z * z;
        }
        if n2 > 1e-20 {
            let n = n2.sqrt();
            out.iter_mut().for_each(|v| *v /= n);
            return;
        }
    }
}

/// `sin(x)/x` with the removable singularity filled in.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Density of the sum of `m` independent uniforms on `[0,1]` at `x`.
fn irwin_hall_density(m: usize, x: f64) -> f64 {
    let mut s = 0.0;
    let mut binom = 1.0;
    for j in 0..=m {
        if (j as f64) > x {
            break;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binom * (x - j as f64).powi(m as i32 - 1);
        binom = binom * (m - j) as f64 / (j + 1) as f64;
    }
    let fact: f64 = (1..m).map(|i| i as f64).product();
    s / fact
}

/// `1 - φ̂(k)/q` for the long-range profile with unit kink radius, evaluated
/// from scratch.
///
/// With `κ = |k|`, the inner ball contributes `1 - Ω_{d+2}(κ)` and the
/// power-law shell contributes `d κ^α ∫_κ^∞ z^{-1-α} (1 - Ω_d(z)) dz`; the two
/// are weighted by the masses `α/(α+d)` and `d/(α+d)` after normalization.
pub fn long_range_deficit_direct(d: usize, alpha: f64, kappa: f64) -> f64 {
    long_range_deficit_with_tail(d, alpha, kappa, None)
}

const LR_SPLIT: f64 = 8.0 * PI;

fn long_range_deficit_with_tail(d: usize, alpha: f64, kappa: f64, tail_at_split: Option<f64>) -> f64 {
    if kappa == 0.0 {
        return 0.0;
    }
    let df = d as f64;
    let inner = omega_deficit(d + 2, kappa);
    let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_panels: 400 };
    let z0 = LR_SPLIT.max(kappa);
    let near = integrate(|z: f64| z.powf(-1.0 - alpha) * omega_deficit(d, z), kappa, z0, tol).value;
    let osc = match tail_at_split {
        Some(t) if z0 == LR_SPLIT => t,
        _ => long_range_oscillating_tail(d, alpha, z0),
    };
    // ∫_{z0}^∞ z^{-1-α} (1 - Ω_d(z)) dz = z0^{-α}/α - ∫_{z0}^∞ z^{-1-α} Ω_d(z) dz.
    let far = z0.powf(-alpha) / alpha - osc;
    let shell = df * kappa.powf(alpha) * (near + far);
    alpha * (inner + shell) / (alpha + df)
}

/// `∫_{z0}^∞ z^{-1-α} Ω_d(z) dz`.
///
/// The integrand changes sign roughly every `π`, so partial integrals over
/// half periods form a nearly alternating series whose sum is recovered by
/// repeated averaging of the partial sums. The cost does not grow with `z0`.
fn long_range_oscillating_tail(d: usize, alpha: f64, z0: f64) -> f64 {
    const PIECES: usize = 32;
    let tol = Tolerance { abs: 1e-18, rel: 1e-12, max_panels: 400 };
    let g = |z: f64| z.powf(-1.0 - alpha) * omega(d, z);
    let mut sums = Vec::with_capacity(PIECES);
    let mut s = 0.0;
    for j in 0..PIECES {
        let a = z0 + j as f64 * PI;
        s += integrate(g, a, a + PI, tol).value;
        sums.push(s);
    }
    while sums.len() > 1 {
        sums = sums.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    sums[0]
}

/// Cubic Hermite interpolant on a uniform grid, with slopes from fourth-order
/// finite differences.
#[derive(Debug, Clone)]
pub struct UniformCubic {
    x0: f64,
    h: f64,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl UniformCubic {
    /// Values `ys[i]` at `x0 + i h`; needs at least five nodes.
    pub fn new(x0: f64, h: f64, ys: Vec<f64>) -> Self {
        let n = ys.len();
        assert!(n >= 5 && h > 0.0);
        let y = &ys;
        let mut m = vec![0.0; n];
        for i in 2..n - 2 {
            m[i] = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h);
        }
        m[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * h);
        m[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / (12.0 * h);
        m[n - 1] = (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] - 16.0 * y[n - 4] + 3.0 * y[n - 5])
            / (12.0 * h);
        m[n - 2] = (3.0 * y[n - 1] + 10.0 * y[n - 2] - 18.0 * y[n - 3] + 6.0 * y[n - 4] - y[n - 5]) / (12.0 * h);
        UniformCubic { x0, h, ys, slopes: m }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.ys.len();
        let u = (x - self.x0) / self.h;
        let i = (u.floor().max(0.0) as usize).min(n - 2);
        let t = u - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * self.h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * self.h * self.slopes[i + 1]
    }
}

/// Green's function `Ĝ_μ` of the random walk with step density `φ/q`.
#[derive(Debug, Clone)]
pub struct GreenFunctionSpec<'a> {
    pub cf: &'a ConnectionFunction,
    pub mu: f64,
}

impl<'a> GreenFunctionSpec<'a> {
    pub fn new(cf: &'a ConnectionFunction, mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(ModelError::InvalidParameter(format!("mu must lie in [0,1], got {mu}")));
        }
        Ok(GreenFunctionSpec { cf, mu })
    }

    /// `φ̂(0) / (φ̂(0) - μ φ̂(k))`.
    pub fn green_hat(&self, k: f64) -> Result<f64> {
        if self.mu == 1.0 && k == 0.0 {
            return Err(ModelError::Pole);
        }
        Ok(self.green_hat_unchecked(k))
    }

    /// Same as [`green_hat`](Self::green_hat) but returns `+inf` at the pole.
    #[inline]
    pub fn green_hat_unchecked(&self, k: f64) -> f64 {
        let q = self.cf.q();
        let denom = (1.0 - self.mu) * q + self.mu * self.cf.phi_hat_deficit(k);
        if denom <= 0.0 {
            f64::INFINITY
        } else {
            q / denom
        }
    }

    pub fn green_hat_vec(&self, k: &[f64]) -> f64 {
        let q = self.cf.q();
        let denom = (1.0 - self.mu) * q + self.mu * self.cf.phi_hat_deficit_vec(k);
        if denom <= 0.0 {
            f64::INFINITY
        } else {
            q / denom
        }
    }
}

pub fn green_hat(spec: &GreenFunctionSpec<'_>, k: f64) -> Result<f64> {
    spec.green_hat(k)
}

pub fn eval_phi(cf: &ConnectionFunction, x: &[f64]) -> Result<f64> {
    cf.eval_phi(x)
}

pub fn phi_hat(cf: &ConnectionFunction, k: f64) -> f64 {
    cf.phi_hat(k)
}

pub fn conv_at_zero(cf: &ConnectionFunction, m: usize) -> Result<f64> {
    cf.conv_at_zero(m)
}

/// Hypothesis class a connection function belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelClass {
    /// Finite-range models whose convolutions decay in `d` (Boolean, Gaussian).
    H1,
    /// Spread-out finite variance.
    H2,
    /// Spread-out long range.
    H3,
}

impl ConnectionFunction {
    pub fn class(&self) -> ModelClass {
        match self.kind() {
            Kind::BooleanBall | Kind::Gaussian => ModelClass::H1,
            Kind::SpreadOutBall | Kind::SpreadOutBox => ModelClass::H2,
            Kind::LongRange => ModelClass::H3,
        }
    }

    /// Dimension threshold `D` so that `∫ φ̂^m/(1-φ̂)^s` is within the
    /// hypothesis domain exactly when `d > D`.
    pub fn dimension_threshold(&self, s: f64) -> f64 {
        match self.class() {
            ModelClass::H1 => 4.0 * s,
            ModelClass::H2 => 2.0 * s,
            ModelClass::H3 => self.params.alpha.unwrap_or(2.0).min(2.0) * s,
        }
    }
}

/// Scalar constants attached to a model class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub r_d: f64,
    /// Decay base in `g(d) = ρ^d`. This is a bound surrogate, not a proven value.
    pub rho: Option<f64>,
}

impl ModelConstants {
    pub const DEFAULT_RHO: f64 = 0.9;

    pub fn new(d: usize) -> Self {
        ModelConstants { r_d: unit_volume_radius(d), rho: Some(Self::DEFAULT_RHO) }
    }

    pub fn with_rho(d: usize, rho: Option<f64>) -> Self {
        ModelConstants { r_d: unit_volume_radius(d), rho }
    }

    /// `g(d) = ρ^d`.
    pub fn g_d(&self, d: usize) -> Result<f64> {
        self.rho.map(|r| r.powi(d as i32)).ok_or(ModelError::MissingRho)
    }
}

/// `β = g(d)^{1/4}` under H1 and `L^{-d}` under H2/H3.
pub fn model_beta(consts: &ModelConstants, cf: &ConnectionFunction) -> Result<f64> {
    let d = cf.dimension();
    match cf.class() {
        ModelClass::H1 => Ok(consts.g_d(d)?.powf(0.25)),
        ModelClass::H2 | ModelClass::H3 => Ok(cf.spread().powi(-(d as i32))),
    }
}
