//! Monte Carlo estimators for the two-point function, the expected cluster
//! size, the one-arm probabilities of finite boxes and the first lace
//! expansion coefficients.
//!
//! Every estimator runs independent replicas with seeds derived from one
//! master seed. Replicas are processed in fixed chunks and the chunk results
//! are reduced in order, so the output does not depend on the thread count.

mod lace;
mod output;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fourier::empirical::{fit_tail, tail_transform, transform_weights, TailFit};
use crate::model::ConnectionFunction;
use crate::sampler::{
    derive_seed, explore_cluster, phi_between, BoxSpec, Boundary, Caps, CoupledPpp, GraphView, Marks,
    Realization, SamplerError,
};
use crate::stats::{MultiRunning, Running};

pub use lace::{
    e_event, estimate_pi0, estimate_pi1, estimate_pi1_with, oze_residual, pi1_integrand, ImportanceDiagnostics,
    OzeResidual, Pi1Options,
};
pub use output::{profile_csv, results_csv, write_json};

/// Replicas per work unit.
const CHUNK: usize = 32;

/// Censored fractions above this make a result unreliable.
pub const CENSOR_LIMIT: f64 = 0.05;

const TAG_TAU: u64 = 0x7a0;
const TAG_CHI: u64 = 0xc41;
const TAG_THETA: u64 = 0x7e7a;
const TAG_COUPLED: u64 = 0xc0c1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error("box side {side} is too small for the requested radii (need at least {required})")]
    BoxTooSmall { side: f64, required: f64 },
    #[error("intensity {lambda} is above the supercritical guard {guard}")]
    AboveGuard { lambda: f64, guard: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, EstimatorError>;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub value: f64,
    /// Sample standard deviation over `sqrt(replicas)`.
    pub stderr: f64,
    /// Replicas that entered the mean.
    pub replicas: usize,
    /// Fraction of the requested replicas that were discarded.
    pub censored_fraction: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EstimatorResult {
    fn from_running(r: &Running, requested: usize, seed: u64) -> Self {
        let censored_fraction = if requested == 0 { 0.0 } else { 1.0 - r.n as f64 / requested as f64 };
        let mut warnings = Vec::new();
        if censored_fraction > CENSOR_LIMIT {
            warnings.push(format!("censored fraction {censored_fraction:.3} exceeds {CENSOR_LIMIT}"));
        }
        EstimatorResult {
            value: r.mean,
            stderr: if r.n >= 2 { r.se() } else { 0.0 },
            replicas: r.n as usize,
            censored_fraction,
            seed,
            warnings,
        }
    }

    /// Exact value with no sampling error.
    fn exact(value: f64, replicas: usize, seed: u64) -> Self {
        EstimatorResult { value, stderr: 0.0, replicas, censored_fraction: 0.0, seed, warnings: Vec::new() }
    }

    pub fn is_reliable(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Which function a [`TauProfile`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Tau,
    Pi0,
    Pi1,
}

/// A radial profile estimated at a list of radii, with the covariance of
/// the per-radius estimates so that integrals and transforms carry errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauProfile {
    pub kind: ProfileKind,
    pub lambda: f64,
    pub dimension: usize,
    pub radii: Vec<f64>,
    pub values: Vec<EstimatorResult>,
    /// Moments of the per-replica rows.
    pub moments: MultiRunning,
    pub replicas: usize,
    pub censored: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub importance: Option<ImportanceDiagnostics>,
}

/// `∫ f(x) dx` of a profile, split into the measured range and the fitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileIntegral {
    pub value: f64,
    /// Standard error of the measured part (the tail is treated as exact).
    pub stderr: f64,
    pub tail: f64,
}

impl TauProfile {
    fn from_moments(
        kind: ProfileKind,
        lambda: f64,
        dimension: usize,
        radii: Vec<f64>,
        moments: MultiRunning,
        requested: usize,
        seed: u64,
    ) -> Self {
        let replicas = moments.n as usize;
        let censored = requested - replicas;
        let se = moments.se();
        let censored_fraction = if requested == 0 { 0.0 } else { censored as f64 / requested as f64 };
        let mut warnings = Vec::new();
        if censored_fraction > CENSOR_LIMIT {
            warnings.push(format!("censored fraction {censored_fraction:.3} exceeds {CENSOR_LIMIT}"));
        }
        let values = moments
            .mean
            .iter()
            .zip(&se)
            .map(|(&value, &stderr)| EstimatorResult {
                value,
                stderr: if replicas >= 2 { stderr } else { 0.0 },
                replicas,
                censored_fraction,
                seed,
                warnings: Vec::new(),
            })
            .collect();
        TauProfile {
            kind,
            lambda,
            dimension,
            radii,
            values,
            moments,
            replicas,
            censored,
            seed,
            warnings,
            importance: None,
        }
    }

    pub fn means(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.value).collect()
    }

    /// Exponential tail fitted to the last radii, if the profile decays there.
    pub fn tail_fit(&self) -> Option<TailFit> {
        fit_tail(&self.radii, &self.means())
    }

    /// `∫ f(x) dx`: linear interpolation between the radii plus the fitted tail.
    pub fn integral(&self) -> ProfileIntegral {
        let w = transform_weights(&self.radii, self.dimension, 0.0);
        let tail = self.tail_fit().map_or(0.0, |t| tail_transform(&t, self.dimension, 0.0));
        ProfileIntegral { value: self.moments.linear(&w) + tail, stderr: self.moments.linear_se(&w), tail }
    }

    /// `f̂(k)` with its standard error, for the radial profile.
    pub fn transform(&self, k: f64) -> (f64, f64) {
        let w = transform_weights(&self.radii, self.dimension, k);
        let tail = self.tail_fit().map_or(0.0, |t| tail_transform(&t, self.dimension, k));
        (self.moments.linear(&w) + tail, self.moments.linear_se(&w))
    }
}

/// Radii `0, h, 2h, ..., r_max` with every jump of `φ` doubled as
/// `(r, r + ε)`, so that linear interpolation reproduces the jump.
pub fn default_radii(cf: &ConnectionFunction, r_max: f64, steps: usize) -> Vec<f64> {
    assert!(r_max > 0.0 && steps > 0);
    let h = r_max / steps as f64;
    let mut radii: Vec<f64> = (0..=steps).map(|i| i as f64 * h).collect();
    for b in cf.radial_breakpoints() {
        if b < r_max {
            radii.push(b);
            radii.push(b * (1.0 + 1e-9));
        }
    }
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * b.abs().max(1.0));
    radii
}

/// Runs `step` on every replica, one accumulator per chunk, and reduces the
/// chunks in order.
pub(crate) fn accumulate<A, I, F, M>(replicas: usize, init: I, step: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, usize) + Sync,
    M: Fn(A, A) -> A,
{
    let chunks = replicas.div_ceil(CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for r in c * CHUNK..((c + 1) * CHUNK).min(replicas) {
                step(&mut acc, r);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(init(), merge)
}

/// Per-replica results in replica order.
pub(crate) fn collect<T, F>(replicas: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..replicas).into_par_iter().with_min_len(CHUNK).map(f).collect()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(SamplerError::InvalidIntensity(lambda).into());
    }
    Ok(())
}

fn check_dimension(cf: &ConnectionFunction, bx: &BoxSpec) -> Result<()> {
    if cf.dimension() != bx.dimension {
        return Err(SamplerError::DimensionMismatch { expected: bx.dimension, got: cf.dimension() }.into());
    }
    Ok(())
}

/// Relative mass of `φ` beyond the range used by [`check_box`].
pub const BOX_TAIL: f64 = 1e-4;

/// The box must hold a ball of radius `reach` plus one interaction range
/// around the origin, on both sides. For unbounded `φ` the range is the
/// radius holding all but [`BOX_TAIL`] of its mass.
pub(crate) fn check_box(cf: &ConnectionFunction, bx: &BoxSpec, reach: f64) -> Result<()> {
    let range = cf.tail_radius(BOX_TAIL);
    let required = 2.0 * (reach + range);
    if bx.side < required {
        return Err(EstimatorError::BoxTooSmall { side: bx.side, required });
    }
    Ok(())
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(EstimatorError::InvalidArgument("no radii given".into()));
    }
    if radii.iter().any(|r| !(*r >= 0.0 && r.is_finite())) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EstimatorError::InvalidArgument("radii must be non-negative and strictly increasing".into()));
    }
    Ok(())
}

/// Test directions for a radius: the axes in both orientations for
/// rotation-invariant kinds, the first axis otherwise.
pub(crate) fn directions(cf: &ConnectionFunction) -> Vec<Vec<f64>> {
    let d = cf.dimension();
    let axes = if cf.is_rotation_invariant() { d } else { 1 };
    let mut out = Vec::with_capacity(2 * axes);
    for i in 0..axes {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            out.push(e);
        }
    }
    out
}

/// Default caps for estimator explorations.
pub const DEFAULT_CAPS: Caps = Caps { max_size: 500_000, max_depth: usize::MAX };

/// Estimates `τ_λ(x) = P(0 ↔ x in ξ^{0,x})` at `|x| = r` for each radius.
///
/// One realization per replica with the origin inserted. The point `x` joins
/// the origin exactly when it has an edge to the cluster `C` of the origin
/// in `ξ^0`, which happens with probability `1 - φ̄(C, x)` given `C`; the
/// estimator averages this conditional probability over the replicas and
/// over the axis directions. It has the law of the two-point insertion
/// estimator with less variance. Radius 0 is the same point and gives 1.
pub fn estimate_tau(
    lambda: f64,
    cf: &Arc<ConnectionFunction>,
    radii: &[f64],
    bx: BoxSpec,
    replicas: usize,
    seed: u64,
) -> Result<TauProfile> {
    check_lambda(lambda)?;
    check_dimension(cf, &bx)?;
    check_radii(radii)?;
    check_box(cf, &bx, *radii.last().unwrap())?;
    let d = bx.dimension;
    let dirs = directions(cf);
    let origin = vec![0.0; d];
    let m = radii.len();
    let failure: std::sync::Mutex<Option<SamplerError>> = std::sync::Mutex::new(None);
    let moments = accumulate(
        replicas,
        || MultiRunning::new(m),
        |acc, r| {
            let s = derive_seed(seed, &[TAG_TAU, r as u64]);
            let real = match Realization::sample(cf.clone(), lambda, bx, s) {
                Ok(x) => x,
                Err(e) => {
                    *failure.lock().unwrap() = Some(e);
                    return;
                }
            };
            let w = real.view(&[&origin]);
            let c = explore_cluster(&w, w.inserted(0), None, DEFAULT_CAPS);
            if c.censored {
                return;
            }
            let members: Vec<&[f64]> = c.members.iter().map(|&v| w.pos(v)).collect();
            let mut row = vec![0.0; m];
            let mut x = vec![0.0; d];
            for (i, &rad) in radii.iter().enumerate() {
                if rad == 0.0 {
                    row[i] = 1.0;
                    continue;
                }
                let mut s = 0.0;
                for e in &dirs {
                    for (xi, ei) in x.iter_mut().zip(e) {
                        *xi = rad * ei;
                    }
                    let miss: f64 =
                        members.iter().map(|y| 1.0 - phi_between(cf, &bx, f64::INFINITY, y, &x)).product();
                    s += 1.0 - miss;
                }
                row[i] = s / dirs.len() as f64;
            }
            acc.push(&row);
        },
        |a, b| a.merge(&b),
    );
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e.into());
    }
    Ok(TauProfile::from_moments(ProfileKind::Tau, lambda, d, radii.to_vec(), moments, replicas, seed))
}

/// Options for the cluster-size estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiOptions {
    pub caps: Caps,
    /// Refuse intensities above this value.
    pub guard: Option<f64>,
}

impl Default for ChiOptions {
    fn default() -> Self {
        ChiOptions { caps: DEFAULT_CAPS, guard: None }
    }
}

/// `χ(λ) = E|C(0)|`, the mean size of the cluster of an inserted origin
/// (the origin included).
///
/// Replicas whose exploration hits a cap, or whose cluster comes within
/// interaction range of a free boundary, are censored.
pub fn estimate_chi(
    lambda: f64,
    cf: &Arc<ConnectionFunction>,
    bx: BoxSpec,
    replicas: usize,
    seed: u64,
) -> Result<EstimatorResult> {
    estimate_chi_with(lambda, cf, bx, replicas, seed, ChiOptions::default())
}

pub fn estimate_chi_with(
    lambda: f64,
    cf: &Arc<ConnectionFunction>,
    bx: BoxSpec,
    replicas: usize,
    seed: u64,
    opts: ChiOptions,
) -> Result<EstimatorResult> {
    let c = estimate_chi_coupled(&[lambda], cf, bx, replicas, seed, opts)?;
    Ok(c.results.into_iter().next().expect("one intensity"))
}

/// Cluster sizes at several intensities on nested configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledChi {
    pub lambdas: Vec<f64>,
    pub results: Vec<EstimatorResult>,
    /// Per accepted replica, the cluster sizes at every intensity.
    #[serde(skip)]
    pub sizes: Vec<Vec<f64>>,
}

/// `χ̂` on an increasing grid of intensities from coupled samples: the
/// process at a larger intensity contains the one at a smaller intensity
/// and edge marks are shared, so cluster sizes increase along the grid in
/// every replica. A replica censored at any intensity is dropped at all.
pub fn estimate_chi_coupled(
    lambdas: &[f64],
    cf: &Arc<ConnectionFunction>,
    bx: BoxSpec,
    replicas: usize,
    seed: u64,
    opts: ChiOptions,
) -> Result<CoupledChi> {
    check_dimension(cf, &bx)?;
    if lambdas.is_empty() || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EstimatorError::InvalidArgument("intensities must be strictly increasing".into()));
    }
    for &l in lambdas {
        check_lambda(l)?;
        if let Some(g) = opts.guard {
            if l > g {
                return Err(EstimatorError::AboveGuard { lambda: l, guard: g });
            }
        }
    }
    let d = bx.dimension;
    let origin = vec![0.0; d];
    let free = bx.boundary == Boundary::Free;
    let tag = if lambdas.len() == 1 { TAG_CHI } else { TAG_COUPLED };
    let rows: Vec<std::result::Result<Option<Vec<f64>>, SamplerError>> = collect(replicas, |r| {
        let s = derive_seed(seed, &[tag, r as u64]);
        let mut row = Vec::with_capacity(lambdas.len());
        if lambdas.len() == 1 {
            let real = Realization::sample(cf.clone(), lambdas[0], bx, s)?;
            let w = real.view(&[&origin]);
            let c = explore_cluster(&w, w.inserted(0), None, opts.caps);
            if c.censored || (free && c.touched_boundary) {
                return Ok(None);
            }
            row.push(c.len() as f64);
            return Ok(Some(row));
        }
        let layers = CoupledPpp::sample(lambdas, &bx, s)?;
        for (j, &l) in lambdas.iter().enumerate() {
            let real = Realization::from_points(cf.clone(), l, bx, layers.at(j), Marks::new(s))?;
            let w = real.view(&[&origin]);
            let c = explore_cluster(&w, w.inserted(0), None, opts.caps);
            if c.censored || (free && c.touched_boundary) {
                return Ok(None);
            }
            row.push(c.len() as f64);
        }
        Ok(Some(row))
    });
    let mut sizes = Vec::with_capacity(replicas);
    for r in rows {
        if let Some(row) = r? {
            sizes.push(row);
        }
    }
    let results = (0..lambdas.len())
        .map(|j| {
            if lambdas[j] == 0.0 {
                return EstimatorResult::exact(1.0, replicas, seed);
            }
            let run: Running = sizes.iter().map(|row| row[j]).collect();
            EstimatorResult::from_running(&run, replicas, seed)
        })
        .collect();
    Ok(CoupledChi { lambdas: lambdas.to_vec(), results, sizes })
}

/// `1 - exp(-∫_{Λ^c} φ(y - v) dy)`: the probability that `v` has an edge to
/// the ghost vertex standing for the outside of the cube `[-half, half)^d`.
pub fn ghost_probability(cf: &ConnectionFunction, v: &[f64], half: f64) -> f64 {
    -(-cf.mass_outside_cube(v, half)).exp_m1()
}

/// `θ_n(λ) = P(0 ↔ Λ_n^c)` for boxes `Λ_n = [-side/2, side/2)^d` with free
/// boundary, one result per side.
///
/// Every vertex `v` of the origin's cluster gets an edge to a ghost vertex
/// with probability `1 - exp(-∫_{Λ^c} φ(y - v) dy)`, and the origin is
/// connected to the outside when its cluster reaches the ghost. Replicas
/// whose exploration hits the cap before reaching the ghost are censored.
pub fn estimate_theta_n(
    lambda: f64,
    cf: &Arc<ConnectionFunction>,
    sides: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<Vec<EstimatorResult>> {
    estimate_theta_n_with(lambda, cf, sides, replicas, seed, DEFAULT_CAPS)
}

pub fn estimate_theta_n_with(
    lambda: f64,
    cf: &Arc<ConnectionFunction>,
    sides: &[f64],
    replicas: usize,
    seed: u64,
    caps: Caps,
) -> Result<Vec<EstimatorResult>> {
    check_lambda(lambda)?;
    let d = cf.dimension();
    let origin = vec![0.0; d];
    let mut out = Vec::with_capacity(sides.len());
    for (si, &side) in sides.iter().enumerate() {
        if !(side > 0.0 && side.is_finite()) {
            return Err(EstimatorError::InvalidArgument(format!("box side must be positive, got {side}")));
        }
        let bx = BoxSpec::new(side, d, Boundary::Free);
        let half = 0.5 * side;
        let hits: Vec<std::result::Result<Option<f64>, SamplerError>> = collect(replicas, |r| {
            let s = derive_seed(seed, &[TAG_THETA, si as u64, r as u64]);
            let real = Realization::sample(cf.clone(), lambda, bx, s)?;
            let w = real.view(&[&origin]);
            Ok(reaches_ghost(&w, w.inserted(0), cf, &real.marks, half, caps).map(|b| if b { 1.0 } else { 0.0 }))
        });
        let mut run = Running::default();
        for h in hits {
            if let Some(v) = h? {
                run.push(v);
            }
        }
        out.push(EstimatorResult::from_running(&run, replicas, seed));
    }
    Ok(out)
}

/// Breadth-first search from `start` that stops at the first ghost edge.
/// `None` when the cap is reached first.
fn reaches_ghost<G: GraphView>(g: &G, start: usize, cf: &ConnectionFunction, marks: &Marks, half: f64, caps: Caps) -> Option<bool> {
    let ghost = |v: usize| {
        let x = g.pos(v);
        let u = marks.ghost(g.id(v));
        // The bound is cheap and settles most interior points.
        u < -(-cf.mass_outside_cube_bound(x, half)).exp_m1() && u < ghost_probability(cf, x, half)
    };
    let mut seen = std::collections::HashSet::from([start]);
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        if ghost(v) {
            return Some(true);
        }
        let mut found = Vec::new();
        g.for_each_neighbor(v, &mut |w| found.push(w));
        for w in found {
            if seen.insert(w) {
                if seen.len() > caps.max_size {
                    return None;
                }
                queue.push_back(w);
            }
        }
    }
    Some(false)
}

/// One grid point of [`chi_derivative_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativePoint {
    pub lambda: f64,
    /// `τ̂_λ(0) = (χ̂ - 1)/λ`.
    pub tau_hat: f64,
    pub tau_hat_se: f64,
    /// Finite difference of `τ̂(0)` in `λ`.
    pub derivative: f64,
    pub derivative_se: f64,
    /// Standard error of `derivative - tau_hat²`.
    pub margin_se: f64,
    pub one_sided: bool,
    pub holds: bool,
    pub inconclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub points: Vec<DerivativePoint>,
    pub replicas: usize,
    pub censored_fraction: f64,
    pub all_hold: bool,
}

/// Checks `d/dλ τ̂_λ(0) ≤ τ̂_λ(0)²` on a grid of intensities.
///
/// Cluster sizes come from coupled samples, so differences between grid
/// points are computed replica by replica. Interior points use central
/// differences and end points one-sided ones; `λ = 0` has no `τ̂(0)` and
/// is skipped. The error of `derivative - τ̂²` is propagated to first order.
pub fn chi_derivative_check(
    grid: &[f64],
    cf: &Arc<ConnectionFunction>,
    bx: BoxSpec,
    replicas: usize,
    seed: u64,
) -> Result<DerivativeReport> {
    let coupled = estimate_chi_coupled(grid, cf, bx, replicas, seed, ChiOptions::default())?;
    let idx: Vec<usize> = (0..grid.len()).filter(|&j| grid[j] > 0.0).collect();
    if idx.len() < 2 {
        return Err(EstimatorError::InvalidArgument("need at least two positive intensities".into()));
    }
    let tau = |row: &[f64], j: usize| (row[j] - 1.0) / grid[j];
    let rows = &coupled.sizes;
    let mut points = Vec::new();
    for (p, &j) in idx.iter().enumerate() {
        let (lo, hi, one_sided) = match (p.checked_sub(1).map(|q| idx[q]), idx.get(p + 1).copied()) {
            (Some(a), Some(b)) => (a, b, false),
            (None, Some(b)) => (j, b, true),
            (Some(a), None) => (a, j, true),
            (None, None) => unreachable!(),
        };
        let h = grid[hi] - grid[lo];
        let t: Running = rows.iter().map(|r| tau(r, j)).collect();
        let fd: Running = rows.iter().map(|r| (tau(r, hi) - tau(r, lo)) / h).collect();
        let infl: Running = rows.iter().map(|r| (tau(r, hi) - tau(r, lo)) / h - 2.0 * t.mean * tau(r, j)).collect();
        let margin = fd.mean - t.mean * t.mean;
        let margin_se = infl.se();
        points.push(DerivativePoint {
            lambda: grid[j],
            tau_hat: t.mean,
            tau_hat_se: t.se(),
            derivative: fd.mean,
            derivative_se: fd.se(),
            margin_se,
            one_sided,
            holds: margin <= 3.0 * margin_se,
            inconclusive: fd.se() > fd.mean.abs(),
        });
    }
    let all_hold = points.iter().all(|p| p.holds);
    let censored_fraction = 1.0 - rows.len() as f64 / replicas.max(1) as f64;
    Ok(DerivativeReport { points, replicas: rows.len(), censored_fraction, all_hold })
}

/// `1 + λ ∫ τ̂` from a two-point profile, with its standard error and the
/// tail share.
pub fn chi_from_profile(tau: &TauProfile) -> ProfileIntegral {
    let i = tau.integral();
    ProfileIntegral { value: 1.0 + tau.lambda * i.value, stderr: tau.lambda * i.stderr, tail: tau.lambda * i.tail }
}
