//! Finite-size estimates of the critical intensity and checks of the
//! mean-field statements around it.
//!
//! Both estimators work on a ladder of box sides. Each side yields a
//! pseudo-critical point, and the points of the three largest sides are
//! extrapolated linearly in `1/side`. Confidence intervals come from a
//! percentile bootstrap over blocks of replicas, each block being an
//! independent seed stream.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::{estimate_chi_coupled, estimate_theta_n_with, ChiOptions, EstimatorError, DEFAULT_CAPS};
pub use crate::fourier::mu_lambda;
use crate::model::ConnectionFunction;
use crate::sampler::{derive_seed, Boundary, BoxSpec, Caps};
use crate::stats::{bootstrap_ci, line_fit, LineFit};

const TAG_THETA_SCAN: u64 = 0xc100;
const TAG_CHI_SCAN: u64 = 0xc101;
const TAG_BOOT: u64 = 0xc102;
const TAG_GAMMA: u64 = 0xc103;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriticalError {
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, CriticalError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Logistic fits of `θ̂_n(λ)` per side; the pseudo-critical point is
    /// where the fit crosses a fixed level (1/2 by default).
    CrossingSigmoid,
    /// Linear fits of `χ̂(λ)^{-1/γ}` per side; the pseudo-critical point is
    /// the root (the fitted pole of `χ̂`).
    ChiDivergence,
}

/// Scan settings shared by both methods.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalOptions {
    /// Intensities of the scan. `None` picks them from a coarse search.
    pub lambdas: Option<Vec<f64>>,
    /// Independent replica blocks; `replicas` is split evenly among them.
    pub blocks: usize,
    pub resamples: usize,
    pub level: f64,
    pub caps: Caps,
    pub chi_exponent: ChiExponent,
    /// Level of `θ̂_n` defining the crossing point.
    pub crossing_level: f64,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        CriticalOptions { lambdas: None, blocks: 20, resamples: 200, level: 0.95, caps: DEFAULT_CAPS, chi_exponent: ChiExponent::Fixed(1.0), crossing_level: 0.5 }
    }
}

/// The pseudo-critical point of one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideFit {
    pub side: f64,
    pub point: f64,
    pub point_se: f64,
    /// Logistic width for the sigmoid, exponent `γ` for the pole fit.
    pub shape: f64,
}

/// Raw scan data, kept for re-analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanData {
    pub lambdas: Vec<f64>,
    /// `[block][side][lambda]` pairs of (sum, accepted replicas): hits for
    /// the sigmoid, total cluster size for the pole fit.
    pub blocks: Vec<Vec<Vec<(f64, f64)>>>,
    /// `[block][side][lambda]` sum of squared cluster sizes (pole fit only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub squares: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalEstimate {
    pub lambda_c: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: Method,
    pub box_ladder: Vec<f64>,
    pub sides: Vec<SideFit>,
    /// Linear fit of the pseudo-critical points in `1/side`.
    pub extrapolation: LineFit,
    pub residuals: Vec<f64>,
    /// Free-exponent fit `χ ∝ (λ_c - λ)^{-γ}` on the largest side (pole fit only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_hat: Option<f64>,
    pub scan: ScanData,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CriticalEstimate {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn is_reliable(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Logistic regression `p = 1/(1 + exp(-(a + bλ)))` on binomial counts by
/// Newton's method. Returns `(a, b)` and their covariance.
fn logistic_fit(x: &[f64], hits: &[f64], n: &[f64]) -> Option<([f64; 2], [f64; 3])> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let spread = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64).sqrt().max(1e-12);
    let (mut a, mut b) = (0.0, 0.0);
    // Work in standardized λ; a tiny ridge keeps separated data finite.
    let ridge = 1e-6;
    let mut info = [0.0; 3];
    for _ in 0..100 {
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, ridge, 0.0, ridge);
        for i in 0..x.len() {
            let t = (x[i] - mean) / spread;
            let p = 1.0 / (1.0 + (-(a + b * t)).exp());
            let r = hits[i] - n[i] * p;
            let w = n[i] * p * (1.0 - p);
            ga += r;
            gb += r * t;
            haa += w;
            hab += w * t;
            hbb += w * t * t;
        }
        ga -= ridge * a;
        gb -= ridge * b;
        let det = haa * hbb - hab * hab;
        if !(det > 0.0) {
            return None;
        }
        let da = (hbb * ga - hab * gb) / det;
        let db = (haa * gb - hab * ga) / det;
        a += da;
        b += db;
        info = [hbb / det, -hab / det, haa / det];
        if da.abs() + db.abs() < 1e-10 {
            break;
        }
    }
    if !(a.is_finite() && b.is_finite()) {
        return None;
    }
    // Back to λ: p = σ(a' + b'λ) with b' = b/spread, a' = a - b mean/spread.
    let bb = b / spread;
    let aa = a - b * mean / spread;
    // Covariance of (a', b') from that of (a, b).
    let (vaa, vab, vbb) = (info[0], info[1], info[2]);
    let c = mean / spread;
    let v_aa = vaa - 2.0 * c * vab + c * c * vbb;
    let v_ab = (vab - c * vbb) / spread;
    let v_bb = vbb / (spread * spread);
    Some(([aa, bb], [v_aa, v_ab, v_bb]))
}

/// Logistic fit of hit counts `hits[i]` out of `n[i]` at intensities `x[i]`.
/// Returns the intensity where the fit crosses `level`, its delta-method
/// standard error, and the width `1/b`.
pub fn fit_sigmoid(x: &[f64], hits: &[f64], n: &[f64], level: f64) -> Option<(f64, f64, f64)> {
    let ([a, b], [vaa, vab, vbb]) = logistic_fit(x, hits, n)?;
    if !(b > 0.0 && level > 0.0 && level < 1.0) {
        return None;
    }
    let logit = (level / (1.0 - level)).ln();
    let m = (logit - a) / b;
    let (gi, gs) = (-1.0 / b, -(logit - a) / (b * b));
    let var = gi * gi * vaa + gs * gs * vbb + 2.0 * gi * gs * vab;
    Some((m, var.max(0.0).sqrt(), 1.0 / b))
}

/// Exponent used by the pole fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChiExponent {
    /// `χ ∝ (λ_c - λ)^{-γ}` with this `γ`; 1 is the mean-field value.
    Fixed(f64),
    /// `γ` fitted per side together with the pole.
    Free,
}

/// Means and standard errors of `χ̂` from sums, sums of squares and counts.
fn chi_moments(x: &[f64], sum: &[f64], sq: &[f64], n: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ms = Vec::new();
    let mut ss = Vec::new();
    for i in 0..x.len() {
        if n[i] < 2.0 {
            continue;
        }
        let m = sum[i] / n[i];
        xs.push(x[i]);
        ms.push(m);
        ss.push(((sq[i] / n[i] - m * m) / (n[i] - 1.0)).max(0.0).sqrt().max(1e-9));
    }
    (xs, ms, ss)
}

/// Weighted line through `χ̂^{-1/γ}` and its chi-square.
fn power_line(x: &[f64], m: &[f64], se: &[f64], g: f64) -> Option<(LineFit, f64)> {
    let y: Vec<f64> = m.iter().map(|m| m.powf(-1.0 / g)).collect();
    let s: Vec<f64> = m.iter().zip(se).map(|(m, e)| (e / g) * m.powf(-1.0 / g - 1.0)).collect();
    let f = line_fit(x, &y, Some(&s))?;
    let chi2 = (0..x.len()).map(|i| ((y[i] - f.at(x[i])) / s[i]).powi(2)).sum();
    Some((f, chi2))
}

/// `γ` minimizing the residual of [`power_line`], by golden section on `[0.3, 4]`.
fn best_exponent(x: &[f64], m: &[f64], se: &[f64]) -> Option<f64> {
    if x.len() < 3 {
        return None;
    }
    let cost = |g: f64| power_line(x, m, se, g).map(|r| r.1).unwrap_or(f64::INFINITY);
    let (mut a, mut b) = (0.3f64, 4.0f64);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if cost(c) < cost(d) {
            b = d;
        } else {
            a = c;
        }
    }
    Some(0.5 * (a + b))
}

/// Root of the weighted line through `χ̂^{-1/γ}`, the fitted pole of `χ̂`,
/// from per-intensity sums, sums of squares and counts of cluster sizes.
/// Returns the pole, its standard error and the exponent used.
pub fn fit_pole(x: &[f64], sum: &[f64], sq: &[f64], n: &[f64], exponent: ChiExponent) -> Option<(f64, f64, f64)> {
    let (xs, ms, ss) = chi_moments(x, sum, sq, n);
    let g = match exponent {
        ChiExponent::Fixed(g) => g,
        ChiExponent::Free => best_exponent(&xs, &ms, &ss)?,
    };
    let (fit, _) = power_line(&xs, &ms, &ss, g)?;
    if !(fit.slope < 0.0) {
        return None;
    }
    let (r, se) = fit.root();
    Some((r, se, g))
}

/// Pseudo-critical points per side from summed blocks, then the linear
/// extrapolation in `1/side` over the three largest sides.
fn analyse(
    method: Method,
    exponent: ChiExponent,
    level: f64,
    ladder: &[f64],
    lambdas: &[f64],
    blocks: &[Vec<Vec<(f64, f64)>>],
    squares: &[Vec<Vec<f64>>],
) -> Option<(Vec<SideFit>, LineFit, Vec<f64>)> {
    let nl = lambdas.len();
    let mut sides = Vec::with_capacity(ladder.len());
    for (s, &side) in ladder.iter().enumerate() {
        let mut sum = vec![0.0; nl];
        let mut n = vec![0.0; nl];
        let mut sq = vec![0.0; nl];
        for (b, blk) in blocks.iter().enumerate() {
            for j in 0..nl {
                sum[j] += blk[s][j].0;
                n[j] += blk[s][j].1;
                if method == Method::ChiDivergence {
                    sq[j] += squares[b][s][j];
                }
            }
        }
        let (point, point_se, shape) = match method {
            Method::CrossingSigmoid => fit_sigmoid(lambdas, &sum, &n, level)?,
            Method::ChiDivergence => fit_pole(lambdas, &sum, &sq, &n, exponent)?,
        };
        sides.push(SideFit { side, point, point_se, shape });
    }
    let top = &sides[sides.len() - 3..];
    let x: Vec<f64> = top.iter().map(|s| 1.0 / s.side).collect();
    let y: Vec<f64> = top.iter().map(|s| s.point).collect();
    let sig: Vec<f64> = top.iter().map(|s| s.point_se.max(1e-9)).collect();
    let fit = line_fit(&x, &y, Some(&sig))?;
    let residuals = x.iter().zip(&y).map(|(x, y)| y - fit.at(*x)).collect();
    Some((sides, fit, residuals))
}

/// `θ̂_n` at the midpoint of a bracket on the smallest side, bisected to
/// the intensity where it crosses 1/2. Used to place the scans.
fn coarse_crossing(cf: &Arc<ConnectionFunction>, side: f64, replicas: usize, seed: u64, caps: Caps) -> Result<f64> {
    let q = cf.q();
    let (mut lo, mut hi) = (0.5 / q, 8.0 / q);
    for step in 0..10 {
        let mid = 0.5 * (lo + hi);
        let t = estimate_theta_n_with(mid, cf, &[side], replicas, derive_seed(seed, &[step]), caps)?;
        if t[0].value > 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The scan grid when none is given: around the coarse crossing of the
/// smallest side for the sigmoid, below it for the pole fit.
pub fn default_scan(method: Method, coarse: f64) -> Vec<f64> {
    match method {
        Method::CrossingSigmoid => (0..13).map(|i| coarse * (0.7 + 0.1 * i as f64)).collect(),
        Method::ChiDivergence => (0..6).map(|i| coarse * (0.35 + 0.08 * i as f64)).collect(),
    }
}

/// Estimates `λ_c` from a ladder of at least three box sides.
///
/// The sigmoid method uses free boxes with the ghost-vertex rule for
/// `θ̂_n`. The pole method uses tori of the ladder sides. Without an
/// explicit grid, a coarse bisection of `θ̂ = 1/2` on the smallest side
/// places the scan, and the pole scan stays at or below 75% of that point.
pub fn find_lambda_c(
    cf: &Arc<ConnectionFunction>,
    ladder: &[f64],
    replicas: usize,
    method: Method,
    seed: u64,
) -> Result<CriticalEstimate> {
    find_lambda_c_with(cf, ladder, replicas, method, seed, &CriticalOptions::default())
}

pub fn find_lambda_c_with(
    cf: &Arc<ConnectionFunction>,
    ladder: &[f64],
    replicas: usize,
    method: Method,
    seed: u64,
    opts: &CriticalOptions,
) -> Result<CriticalEstimate> {
    if ladder.len() < 3 || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CriticalError::InvalidArgument("need an increasing ladder of at least three sides".into()));
    }
    if opts.blocks < 2 || replicas < opts.blocks {
        return Err(CriticalError::InvalidArgument("need at least two blocks and one replica per block".into()));
    }
    let lambdas = match &opts.lambdas {
        Some(l) => l.clone(),
        None => {
            let coarse = coarse_crossing(cf, ladder[0], 200.min(replicas), derive_seed(seed, &[TAG_THETA_SCAN, u64::MAX]), opts.caps)?;
            default_scan(method, coarse)
        }
    };
    if lambdas.len() < 3 || lambdas.windows(2).any(|w| w[1] <= w[0]) || lambdas[0] <= 0.0 {
        return Err(CriticalError::InvalidArgument("need at least three positive increasing intensities".into()));
    }
    let per_block = replicas / opts.blocks;
    let d = cf.dimension();
    let mut blocks = Vec::with_capacity(opts.blocks);
    let mut squares = Vec::new();
    let mut warnings = Vec::new();
    for b in 0..opts.blocks {
        match method {
            Method::CrossingSigmoid => {
                let mut blk = vec![vec![(0.0, 0.0); lambdas.len()]; ladder.len()];
                for (j, &l) in lambdas.iter().enumerate() {
                    let s = derive_seed(seed, &[TAG_THETA_SCAN, b as u64, j as u64]);
                    let res = estimate_theta_n_with(l, cf, ladder, per_block, s, opts.caps)?;
                    for (i, r) in res.iter().enumerate() {
                        let n = ((1.0 - r.censored_fraction) * per_block as f64).round();
                        blk[i][j] = ((r.value * n).round(), n);
                    }
                }
                blocks.push(blk);
            }
            Method::ChiDivergence => {
                let mut blk = vec![vec![(0.0, 0.0); lambdas.len()]; ladder.len()];
                let mut sq = vec![vec![0.0; lambdas.len()]; ladder.len()];
                for (i, &side) in ladder.iter().enumerate() {
                    let s = derive_seed(seed, &[TAG_CHI_SCAN, b as u64, i as u64]);
                    let bx = BoxSpec::new(side, d, Boundary::Torus);
                    let c = estimate_chi_coupled(&lambdas, cf, bx, per_block, s, ChiOptions { caps: opts.caps, guard: None })?;
                    for row in &c.sizes {
                        for (j, v) in row.iter().enumerate() {
                            blk[i][j].0 += v;
                            blk[i][j].1 += 1.0;
                            sq[i][j] += v * v;
                        }
                    }
                }
                blocks.push(blk);
                squares.push(sq);
            }
        }
    }
    let (sides, extrapolation, residuals) = analyse(method, opts.chi_exponent, opts.crossing_level, ladder, &lambdas, &blocks, &squares)
        .ok_or_else(|| CriticalError::Fit("a per-side fit or the extrapolation failed".into()))?;
    let lambda_c = extrapolation.intercept;
    if !(lambda_c > 0.0) {
        return Err(CriticalError::Fit(format!("extrapolated λ_c = {lambda_c} is not positive")));
    }
    // Steps against the trend smaller than two standard errors count as noise.
    let against = |sign: f64| {
        sides.windows(2).any(|w| sign * (w[0].point - w[1].point) > 2.0 * w[0].point_se.hypot(w[1].point_se))
    };
    if against(1.0) && against(-1.0) {
        warnings.push("pseudo-critical points are not monotone in the side; the extrapolation is unreliable".into());
    }
    let last = *lambdas.last().unwrap();
    match method {
        Method::CrossingSigmoid if lambda_c < lambdas[0] || lambda_c > last => {
            warnings.push(format!("extrapolated λ_c = {lambda_c:.4} lies outside the scanned range"))
        }
        Method::ChiDivergence if lambda_c <= last => {
            warnings.push(format!("fitted pole {lambda_c:.4} does not lie above the scanned range"))
        }
        _ => {}
    }

    let idx: Vec<usize> = (0..opts.blocks).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[TAG_BOOT]));
    let (lo, hi) = bootstrap_ci(&idx, opts.resamples, opts.level, &mut rng, |pick| {
        let bl: Vec<_> = pick.iter().map(|&b| blocks[b].clone()).collect();
        let sq: Vec<_> = if method == Method::ChiDivergence { pick.iter().map(|&b| squares[b].clone()).collect() } else { Vec::new() };
        analyse(method, opts.chi_exponent, opts.crossing_level, ladder, &lambdas, &bl, &sq).map(|r| r.1.intercept).unwrap_or(f64::NAN)
    });
    if !(lo.is_finite() && hi.is_finite()) {
        warnings.push("bootstrap resamples all failed; the interval is degenerate".into());
    }
    let gamma_hat = if method == Method::ChiDivergence { gamma_exponent(&lambdas, &blocks, &squares, ladder.len() - 1) } else { None };
    Ok(CriticalEstimate {
        lambda_c,
        ci_low: if lo.is_finite() { lo.min(lambda_c) } else { lambda_c },
        ci_high: if hi.is_finite() { hi.max(lambda_c) } else { lambda_c },
        method,
        box_ladder: ladder.to_vec(),
        sides,
        extrapolation,
        residuals,
        gamma_hat,
        scan: ScanData { lambdas, blocks, squares },
        warnings,
    })
}

/// Best `γ` in `χ ∝ (λ_c - λ)^{-γ}` on one side of the ladder.
fn gamma_exponent(lambdas: &[f64], blocks: &[Vec<Vec<(f64, f64)>>], squares: &[Vec<Vec<f64>>], side: usize) -> Option<f64> {
    let nl = lambdas.len();
    let (mut sum, mut sq, mut n) = (vec![0.0; nl], vec![0.0; nl], vec![0.0; nl]);
    for (b, blk) in blocks.iter().enumerate() {
        for j in 0..nl {
            sum[j] += blk[side][j].0;
            n[j] += blk[side][j].1;
            sq[j] += squares[b][side][j];
        }
    }
    let (x, m, se) = chi_moments(lambdas, &sum, &sq, &n);
    best_exponent(&x, &m, &se)
}

/// One intensity of [`gamma_bounded_ratio`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPoint {
    pub lambda: f64,
    pub chi: f64,
    pub chi_se: f64,
    /// `λ/(λ̂_c - λ)`.
    pub lower: f64,
    /// `χ̂` and `λ̂_c` errors combined to first order.
    pub error: f64,
    pub holds: bool,
    pub inconclusive: bool,
    /// `χ̂ (λ̂_c - λ)/λ - 1`, the constant the upper bound would need.
    pub implied_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub lambda_c: f64,
    pub points: Vec<GammaPoint>,
    pub all_hold: bool,
    /// Implied constants at the three largest intensities within a factor 1.5.
    pub implied_c_stable: bool,
}

/// Checks `χ(λ) ≥ λ/(λ_c - λ)` with the estimated `λ_c`, and reports the
/// constant implied by the matching upper bound. The error of `λ̂_c` is
/// taken as the half width of its interval over 1.96.
pub fn gamma_bounded_ratio(
    cf: &Arc<ConnectionFunction>,
    lambda_c: &CriticalEstimate,
    grid: &[f64],
    bx: BoxSpec,
    replicas: usize,
    seed: u64,
) -> Result<GammaReport> {
    if grid.is_empty() || grid.iter().any(|&l| !(l > 0.0 && l < lambda_c.ci_low)) {
        return Err(CriticalError::InvalidArgument("intensities must be positive and below the interval's lower end".into()));
    }
    let coupled = estimate_chi_coupled(grid, cf, bx, replicas, derive_seed(seed, &[TAG_GAMMA]), ChiOptions::default())?;
    let lc = lambda_c.lambda_c;
    let sc = lambda_c.half_width() / 1.96;
    let points: Vec<GammaPoint> = grid
        .iter()
        .zip(&coupled.results)
        .map(|(&l, r)| {
            let gap = lc - l;
            let lower = l / gap;
            let error = (r.stderr.powi(2) + (l / (gap * gap) * sc).powi(2)).sqrt();
            GammaPoint {
                lambda: l,
                chi: r.value,
                chi_se: r.stderr,
                lower,
                error,
                holds: r.value >= lower - 3.0 * error,
                inconclusive: 3.0 * error > lower,
                implied_c: r.value * gap / l - 1.0,
            }
        })
        .collect();
    let all_hold = points.iter().all(|p| p.holds);
    let top: Vec<f64> = points.iter().rev().take(3).map(|p| p.implied_c).collect();
    let implied_c_stable = top.len() == 3 && {
        let (mn, mx) = top.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &v| (a.0.min(v), a.1.max(v)));
        mn.is_finite() && mn.abs() > 0.0 && mx / mn <= 1.5 && mn > 0.0
    };
    Ok(GammaReport { lambda_c: lc, points, all_hold, implied_c_stable })
}

/// Comparison of `λ̂_c` with `1/(q + Π̂_{λ_c}(0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lambda_c: f64,
    pub predicted: f64,
    pub predicted_se: f64,
    /// `1/q`, the prediction with `Π̂ = 0`.
    pub mean_field: f64,
    pub discrepancy: f64,
    pub mean_field_discrepancy: f64,
    /// Combined error of `λ̂_c` and the prediction.
    pub error: f64,
    /// Whether `Π̂` moves the prediction closer to `λ̂_c`.
    pub improves: bool,
}

/// `λ_c = 1/(q + Π̂_{λ_c}(0))` as a consistency indicator. A truncated
/// `Π̂` omits higher alternating terms, so nothing is asserted.
pub fn lambda_c_identity_check(cf: &ConnectionFunction, lambda_c: &CriticalEstimate, pi_hat_zero: (f64, f64)) -> IdentityReport {
    let q = cf.q();
    let (p, ps) = pi_hat_zero;
    let predicted = 1.0 / (q + p);
    let predicted_se = ps / (q + p).powi(2);
    let lc = lambda_c.lambda_c;
    let discrepancy = lc - predicted;
    let mean_field_discrepancy = lc - 1.0 / q;
    IdentityReport {
        lambda_c: lc,
        predicted,
        predicted_se,
        mean_field: 1.0 / q,
        discrepancy,
        mean_field_discrepancy,
        error: ((lambda_c.half_width() / 1.96).powi(2) + predicted_se.powi(2)).sqrt(),
        improves: discrepancy.abs() < mean_field_discrepancy.abs(),
    }
}
