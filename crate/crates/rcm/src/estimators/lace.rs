//! The lace-expansion coefficients `Π^(0)`, `Π^(1)` and the remainder of the
//! expansion identity.

use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    accumulate, check_box, check_dimension, check_lambda, check_radii, collect, directions, EstimatorError,
    ProfileKind, Result, TauProfile, DEFAULT_CAPS,
};
use crate::model::ConnectionFunction;
use crate::sampler::{
    collect_points, derive_seed, double_connected, explore_cluster, pivotal_points, survives_thinning,
    BoxSpec, Boundary, Caps, GraphView, Marks, PointSet, Realization, SamplerError,
};
use crate::special::unit_ball_volume;
use crate::stats::{quantile, MultiRunning};

const TAG_PI0: u64 = 0x9100;
const TAG_PI1: u64 = 0x9101;

/// A graph with one edge removed.
struct DropEdge<'a, G: ?Sized> {
    g: &'a G,
    a: usize,
    b: usize,
}

impl<G: GraphView + ?Sized> GraphView for DropEdge<'_, G> {
    fn vertex_count(&self) -> usize {
        self.g.vertex_count()
    }

    fn id(&self, v: usize) -> u64 {
        self.g.id(v)
    }

    fn pos(&self, v: usize) -> &[f64] {
        self.g.pos(v)
    }

    fn for_each_neighbor(&self, v: usize, f: &mut dyn FnMut(usize)) {
        let (a, b) = (self.a, self.b);
        self.g.for_each_neighbor(v, &mut |w| {
            if !((v == a && w == b) || (v == b && w == a)) {
                f(w)
            }
        });
    }

    fn near_boundary(&self, v: usize) -> bool {
        self.g.near_boundary(v)
    }
}

/// Estimates `Π^(0)(x) = P(0 ⇔ x in ξ^{0,x}) - φ(x)` at `|x| = r`.
///
/// Given everything but the mark of the direct edge, `0 ⇔ x` holds when the
/// edge is present, and otherwise exactly when there are two interior
/// disjoint paths avoiding it. The estimator averages
/// `(1 - φ(x)) · 1{two disjoint paths without the direct edge}`, which has
/// mean `Π^(0)(x)` and is never negative. Radius 0 gives `1 - φ(0)`.
pub fn estimate_pi0(
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
    let phi0 = cf.phi(&origin);
    let failure: std::sync::Mutex<Option<SamplerError>> = std::sync::Mutex::new(None);
    let moments = accumulate(
        replicas,
        || MultiRunning::new(m),
        |acc, r| {
            let s = derive_seed(seed, &[TAG_PI0, r as u64]);
            let real = match Realization::sample(cf.clone(), lambda, bx, s) {
                Ok(x) => x,
                Err(e) => {
                    *failure.lock().unwrap() = Some(e);
                    return;
                }
            };
            let mut row = vec![0.0; m];
            let mut x = vec![0.0; d];
            for (i, &rad) in radii.iter().enumerate() {
                if rad == 0.0 {
                    row[i] = 1.0 - phi0;
                    continue;
                }
                if lambda == 0.0 {
                    continue;
                }
                let mut sum = 0.0;
                for e in &dirs {
                    for (xi, ei) in x.iter_mut().zip(e) {
                        *xi = rad * ei;
                    }
                    let phi = cf.phi(&x);
                    if phi >= 1.0 {
                        continue;
                    }
                    let w = real.view(&[&origin, &x]);
                    let g = DropEdge { g: &w, a: w.inserted(0), b: w.inserted(1) };
                    match double_connected(&g, g.a, g.b, DEFAULT_CAPS.max_size) {
                        Ok(Some(true)) => sum += 1.0 - phi,
                        Ok(Some(false)) => {}
                        Ok(None) => return,
                        Err(e) => {
                            *failure.lock().unwrap() = Some(e);
                            return;
                        }
                    }
                }
                row[i] = sum / dirs.len() as f64;
            }
            acc.push(&row);
        },
        |a, b| a.merge(&b),
    );
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e.into());
    }
    Ok(TauProfile::from_moments(ProfileKind::Pi0, lambda, d, radii.to_vec(), moments, replicas, seed))
}

/// Whether `E(v, u; A, ξ)` occurs in `g`, which must contain `v` and `u`.
///
/// The event asks that `v ↔ u`, that this connection does not survive an
/// `A`-thinning of all points but `v`, and that no pivotal point `w` for
/// `v ↔ u` is itself cut off from `v` by the thinning. With `K` the cluster
/// of `v` after thinning, this reads `u ∈ C(v)`, `u ∉ K`, and every pivotal
/// point lies in `K`. Thinning marks are `Y_{w, a}` with `a` the id of a
/// point of `A`. `None` when a cluster exceeds `cap`.
#[allow(clippy::too_many_arguments)]
pub fn e_event<G: GraphView + ?Sized>(
    g: &G,
    v: usize,
    u: usize,
    a: &PointSet,
    cf: &ConnectionFunction,
    bx: &BoxSpec,
    marks: &Marks,
    cap: usize,
) -> Option<bool> {
    let full = explore_cluster(g, v, None, Caps::size(cap));
    if full.censored {
        return None;
    }
    if !full.members.contains(&u) {
        return Some(false);
    }
    let alive = |w: usize| w == v || survives_thinning(cf, bx, f64::INFINITY, marks, g.id(w), g.pos(w), a);
    let kept = explore_cluster(g, v, Some(&alive), Caps::size(cap));
    let kept: HashSet<usize> = kept.members.into_iter().collect();
    if kept.contains(&u) {
        return Some(false);
    }
    let piv = pivotal_points(g, v, u, cap).ok()?;
    if piv.censored {
        return None;
    }
    Some(piv.points.iter().all(|w| kept.contains(w)))
}

/// Settings of the `Π^(1)` importance sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pi1Options {
    /// Weight of the uniform component of the proposal.
    pub defensive: f64,
    /// Weights above this quantile are clipped to it.
    pub clip_quantile: f64,
    /// Radius of the uniform component; `None` picks twice the radius
    /// holding all but `10^-3` of `φ`.
    pub uniform_radius: Option<f64>,
    pub cap: usize,
}

impl Default for Pi1Options {
    fn default() -> Self {
        Pi1Options { defensive: 0.1, clip_quantile: 0.999, uniform_radius: None, cap: DEFAULT_CAPS.max_size }
    }
}

/// Weight diagnostics of an importance-sampled profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImportanceDiagnostics {
    /// Effective sample size of the weights over the number of replicas.
    pub ess_fraction: f64,
    pub clipped_fraction: f64,
    pub clip_at: f64,
}

/// Proposal for `u₀`: `(1-ε)·ρ + ε·uniform(ball)`, with `ρ = φ⋆φ/q²` when it
/// has a closed form and `φ/q` otherwise.
struct Proposal<'a> {
    cf: &'a ConnectionFunction,
    eps: f64,
    radius: f64,
    conv: bool,
}

impl Proposal<'_> {
    fn new(cf: &ConnectionFunction, eps: f64, radius: f64) -> Proposal<'_> {
        let conv = cf.conv2(&vec![0.0; cf.dimension()]).is_some();
        Proposal { cf, eps, radius, conv }
    }

    fn density(&self, u: &[f64]) -> f64 {
        let d = self.cf.dimension();
        let q = self.cf.q();
        let main = if self.conv { self.cf.conv2(u).unwrap() / (q * q) } else { self.cf.phi(u) / q };
        let r2: f64 = u.iter().map(|v| v * v).sum();
        let uni =
            if r2 <= self.radius * self.radius { 1.0 / (unit_ball_volume(d) * self.radius.powi(d as i32)) } else { 0.0 };
        (1.0 - self.eps) * main + self.eps * uni
    }

    fn sample<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        let d = out.len();
        if rng.gen::<f64>() < self.eps {
            loop {
                for v in out.iter_mut() {
                    *v = rng.gen_range(-self.radius..self.radius);
                }
                if out.iter().map(|v| v * v).sum::<f64>() <= self.radius * self.radius {
                    return;
                }
            }
        }
        self.cf.sample_displacement(rng, out);
        if self.conv {
            let mut y = vec![0.0; d];
            self.cf.sample_displacement(rng, &mut y);
            out.iter_mut().zip(&y).for_each(|(a, b)| *a += b);
        }
    }
}

/// Per replica: the importance weight and the event indicator per radius,
/// or `None` when censored.
type Pi1Row = Option<(f64, Vec<bool>)>;

/// Estimates `Π^(1)(x) = λ ∫ P({0 ⇔ u₀ in ξ₀^{0,u₀}} ∩ E(u₀, x; C₀, ξ₁^{u₀,x})) du₀`
/// with `C₀` the cluster of the origin in `ξ₀^0`.
///
/// Each replica draws `u₀` from a defensive mixture proposal, samples two
/// independent realizations `ξ₀`, `ξ₁`, and evaluates the event for every
/// radius with `x = r e₁`. Weights above the configured quantile are
/// clipped; the clipped fraction and the effective sample size are
/// reported, and an effective sample size below 10% of the replicas adds a
/// warning.
pub fn estimate_pi1(
    lambda: f64,
    cf: &Arc<ConnectionFunction>,
    radii: &[f64],
    bx: BoxSpec,
    replicas: usize,
    seed: u64,
) -> Result<TauProfile> {
    estimate_pi1_with(lambda, cf, radii, bx, replicas, seed, Pi1Options::default())
}

pub fn estimate_pi1_with(
    lambda: f64,
    cf: &Arc<ConnectionFunction>,
    radii: &[f64],
    bx: BoxSpec,
    replicas: usize,
    seed: u64,
    opts: Pi1Options,
) -> Result<TauProfile> {
    check_lambda(lambda)?;
    check_dimension(cf, &bx)?;
    check_radii(radii)?;
    let radius = opts.uniform_radius.unwrap_or_else(|| 2.0 * cf.tail_radius(1e-3));
    check_box(cf, &bx, *radii.last().unwrap() + radius)?;
    if !(0.0..=1.0).contains(&opts.defensive) || !(0.0..=1.0).contains(&opts.clip_quantile) {
        return Err(EstimatorError::InvalidArgument("defensive weight and clip quantile must lie in [0, 1]".into()));
    }
    let d = bx.dimension;
    let m = radii.len();
    let prop = Proposal::new(cf, opts.defensive, radius);
    let rows: Vec<std::result::Result<Pi1Row, SamplerError>> = if lambda == 0.0 {
        (0..replicas).map(|_| Ok(Some((0.0, vec![false; m])))).collect()
    } else {
        collect(replicas, |r| {
            let s = derive_seed(seed, &[TAG_PI1, r as u64]);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(s, &[0]));
            let mut u0 = vec![0.0; d];
            prop.sample(&mut rng, &mut u0);
            let weight = 1.0 / prop.density(&u0);
            let mut hits = vec![false; m];
            if bx.boundary == Boundary::Torus {
                bx.wrap(&mut u0);
            } else if !bx.contains(&u0) {
                return Ok(Some((weight, hits)));
            }
            let xi0 = Realization::sample(cf.clone(), lambda, bx, derive_seed(s, &[1]))?;
            let xi1 = Realization::sample(cf.clone(), lambda, bx, derive_seed(s, &[2]))?;
            let mut x = vec![0.0; d];
            for (i, &rad) in radii.iter().enumerate() {
                x[0] = rad;
                match lace_one(cf, &bx, &xi0, &xi1, &u0, &x, opts.cap) {
                    Some(h) => hits[i] = h,
                    None => return Ok(None),
                }
            }
            Ok(Some((weight, hits)))
        })
    };
    let mut kept = Vec::with_capacity(replicas);
    for r in rows {
        if let Some(row) = r? {
            kept.push(row);
        }
    }
    let weights: Vec<f64> = kept.iter().map(|(w, _)| *w).collect();
    let clip_at = if weights.is_empty() { f64::INFINITY } else { quantile(&weights, opts.clip_quantile) };
    let clipped = weights.iter().filter(|w| **w > clip_at).count();
    let sw: f64 = weights.iter().map(|w| w.min(clip_at)).sum();
    let sw2: f64 = weights.iter().map(|w| w.min(clip_at).powi(2)).sum();
    let ess_fraction = if sw2 > 0.0 { sw * sw / sw2 / weights.len() as f64 } else { 1.0 };
    let mut moments = MultiRunning::new(m);
    let mut row = vec![0.0; m];
    for (w, hits) in &kept {
        let w = w.min(clip_at);
        for (v, h) in row.iter_mut().zip(hits) {
            *v = if *h { lambda * w } else { 0.0 };
        }
        moments.push(&row);
    }
    let mut p = TauProfile::from_moments(ProfileKind::Pi1, lambda, d, radii.to_vec(), moments, replicas, seed);
    let clipped_fraction = if weights.is_empty() { 0.0 } else { clipped as f64 / weights.len() as f64 };
    if ess_fraction < 0.1 {
        p.warnings.push(format!("effective sample size is {:.1}% of the replicas", 100.0 * ess_fraction));
    }
    p.importance = Some(ImportanceDiagnostics { ess_fraction, clipped_fraction, clip_at });
    Ok(p)
}

/// The indicator of `{0 ⇔ u₀ in ξ₀^{0,u₀}} ∩ E(u₀, x; C₀, ξ₁^{u₀,x})` for
/// given realizations; `None` when censored.
fn lace_one(
    cf: &ConnectionFunction,
    bx: &BoxSpec,
    xi0: &Realization,
    xi1: &Realization,
    u0: &[f64],
    x: &[f64],
    cap: usize,
) -> Option<bool> {
    let origin = vec![0.0; bx.dimension];
    let w0 = xi0.view(&[&origin, u0]);
    if !double_connected(&w0, w0.inserted(0), w0.inserted(1), cap).ok()?? {
        return Some(false);
    }
    let c0_view = xi0.view(&[&origin]);
    let c0 = explore_cluster(&c0_view, c0_view.inserted(0), None, Caps::size(cap));
    if c0.censored {
        return None;
    }
    let a = collect_points(&c0_view, &c0.members);
    let w1 = xi1.view(&[u0, x]);
    e_event(&w1, w1.inserted(0), w1.inserted(1), &a, cf, bx, &xi1.marks, cap)
}

/// `P({0 ⇔ u₀} ∩ E(u₀, x; C₀))` at a fixed `u₀`, by plain Monte Carlo.
/// Returns the mean and its standard error.
pub fn pi1_integrand(
    lambda: f64,
    cf: &Arc<ConnectionFunction>,
    bx: BoxSpec,
    u0: &[f64],
    x: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    check_dimension(cf, &bx)?;
    let hits: Vec<std::result::Result<Option<bool>, SamplerError>> = collect(replicas, |r| {
        let s = derive_seed(seed, &[TAG_PI1 + 1, r as u64]);
        let xi0 = Realization::sample(cf.clone(), lambda, bx, derive_seed(s, &[1]))?;
        let xi1 = Realization::sample(cf.clone(), lambda, bx, derive_seed(s, &[2]))?;
        Ok(lace_one(cf, &bx, &xi0, &xi1, u0, x, DEFAULT_CAPS.max_size))
    });
    let mut run = crate::stats::Running::default();
    for h in hits {
        if let Some(b) = h? {
            run.push(if b { 1.0 } else { 0.0 });
        }
    }
    Ok((run.mean, if run.n >= 2 { run.se() } else { 0.0 }))
}

/// Remainders of the expansion identity in Fourier space, truncated after
/// `Π^(0)` (`n = 0`) and after `Π^(1)` (`n = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OzeResidual {
    pub lambda: f64,
    pub k: Vec<f64>,
    pub r0: Vec<f64>,
    pub r0_se: Vec<f64>,
    pub r1: Vec<f64>,
    pub r1_se: Vec<f64>,
    /// `λ τ̂(0) Π̂^(1)(0)`, which bounds `|R̂_1(k)|` for every `k`.
    pub bound: f64,
    pub bound_se: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl OzeResidual {
    /// `(max_k |R̂_n(k)|, its standard error)`.
    pub fn sup(&self, n: usize) -> (f64, f64) {
        let (r, se) = if n == 0 { (&self.r0, &self.r0_se) } else { (&self.r1, &self.r1_se) };
        let (i, v) = r.iter().enumerate().map(|(i, v)| (i, v.abs())).fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        (v, se.get(i).copied().unwrap_or(0.0))
    }
}

/// `R̂_{λ,n}(k) = τ̂ - φ̂ - Π̂_n - λ (φ̂ + Π̂_n) τ̂` with `Π̂_0 = Π̂^(0)` and
/// `Π̂_1 = Π̂^(0) - Π̂^(1)`, all transforms taken from the measured profiles.
/// Errors are propagated to first order, treating the three profiles as
/// independent.
pub fn oze_residual(
    lambda: f64,
    cf: &ConnectionFunction,
    tau: &TauProfile,
    pi0: &TauProfile,
    pi1: &TauProfile,
    k_grid: &[f64],
) -> Result<OzeResidual> {
    for p in [tau, pi0, pi1] {
        if p.dimension != cf.dimension() {
            return Err(EstimatorError::InvalidArgument("profile dimension differs from the model".into()));
        }
    }
    let mut warnings = Vec::new();
    let t_int = tau.integral();
    if t_int.tail.abs() > 0.05 * t_int.value.abs() {
        warnings.push(format!("tail fit carries {:.1}% of the integral of τ", 100.0 * t_int.tail / t_int.value));
    }
    if tau.tail_fit().is_none() && tau.means().last().copied().unwrap_or(0.0) > 1e-3 {
        warnings.push("τ does not decay at the last radius; its transform is truncated".into());
    }
    let mut out = OzeResidual {
        lambda,
        k: k_grid.to_vec(),
        r0: Vec::new(),
        r0_se: Vec::new(),
        r1: Vec::new(),
        r1_se: Vec::new(),
        bound: 0.0,
        bound_se: 0.0,
        warnings,
    };
    for &k in k_grid {
        let (t, ts) = tau.transform(k);
        let (p0, p0s) = pi0.transform(k);
        let (p1, p1s) = pi1.transform(k);
        let f = cf.phi_hat(k);
        for (n, pi) in [(0, p0), (1, p0 - p1)] {
            let r = t - f - pi - lambda * (f + pi) * t;
            let dt = 1.0 - lambda * (f + pi);
            let dp = 1.0 + lambda * t;
            let var = (dt * ts).powi(2) + (dp * p0s).powi(2) + if n == 1 { (dp * p1s).powi(2) } else { 0.0 };
            if n == 0 {
                out.r0.push(r);
                out.r0_se.push(var.sqrt());
            } else {
                out.r1.push(r);
                out.r1_se.push(var.sqrt());
            }
        }
    }
    let (t0, t0s) = tau.transform(0.0);
    let (q0, q0s) = pi1.transform(0.0);
    out.bound = lambda * t0 * q0;
    out.bound_se = lambda * ((q0 * t0s).powi(2) + (t0 * q0s).powi(2)).sqrt();
    Ok(out)
}
