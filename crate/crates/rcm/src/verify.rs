//! Self-tests of the simulation and the numerics, each reduced to a
//! pass/fail verdict with the statistics behind it.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::estimators::{
    chi_derivative_check, chi_from_profile, default_radii, estimate_chi, estimate_pi0, estimate_pi1, estimate_tau,
    oze_residual,
};
use crate::fourier::{
    bootstrap_f, cosine_split_check, delta_k_identity, green_tau_hat, log_grid, profile_tau_hat, radial_integral,
    rw_condition_integral, triangle_mean_field, triangles, FourierError, RadialFunction, TauHat,
};
use crate::model::ConnectionFunction;
use crate::sampler::{
    build_rcm, build_rcm_on, connected, derive_seed, disjoint_connections, sample_thinned_ppp, stopping_set_sample,
    Boundary, BoxSpec, Caps, GraphView, Marks, Realization,
};
use crate::stats::{ks_two_sample, Running};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The tested quantity and what it is compared against.
    pub statistic: f64,
    pub reference: f64,
    /// Allowed slack (for example three standard errors).
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    fn new(name: &str, passed: bool, statistic: f64, reference: f64, tolerance: f64, detail: String) -> Self {
        Check { name: name.into(), passed, statistic, reference, tolerance, detail, seconds: 0.0 }
    }

    fn failed(name: &str, detail: String) -> Self {
        Check::new(name, false, f64::NAN, f64::NAN, f64::NAN, detail)
    }
}

fn timed<F: FnOnce() -> Check>(f: F) -> Check {
    let t = Instant::now();
    let mut c = f();
    c.seconds = t.elapsed().as_secs_f64();
    c
}

fn timed_many<F: FnOnce() -> Vec<Check>>(f: F) -> Vec<Check> {
    let t = Instant::now();
    let mut c = f();
    let s = t.elapsed().as_secs_f64() / c.len().max(1) as f64;
    for x in &mut c {
        x.seconds = s;
    }
    c
}

fn torus(side: f64, d: usize) -> BoxSpec {
    BoxSpec::new(side, d, Boundary::Torus)
}

/// First coordinate of a uniform point in the ball of radius `r`, drawn
/// from its radius and the direction's first component.
fn ball_first_coordinate<R: Rng>(rng: &mut R, d: usize, r: f64, chi: Option<&Gamma<f64>>) -> f64 {
    let g: f64 = rng.sample(StandardNormal);
    let rest = chi.map_or(0.0, |c| c.sample(rng));
    let radius = r * rng.gen::<f64>().powf(1.0 / d as f64);
    radius * g / (g * g + rest).sqrt()
}

/// `φ̂(k)` of the Boolean model against Monte Carlo integration of
/// `cos(k·x)` over its ball, for random `d ≤ 6` and `k`.
pub fn bessel_check(cases: usize, samples: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0xbe55]));
    (0..cases)
        .map(|c| {
            let d = rng.gen_range(1..=6usize);
            let cf = ConnectionFunction::boolean(d);
            let r = cf.support_radius().expect("the Boolean model has a radius");
            let k = rng.gen_range(0.0..12.0) / r;
            let chi = (d > 1).then(|| Gamma::new(0.5 * (d as f64 - 1.0), 2.0).expect("valid shape"));
            let mut inner = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0xbe56, c as u64]));
            let run: Running = (0..samples).map(|_| (k * ball_first_coordinate(&mut inner, d, r, chi.as_ref())).cos()).collect();
            // The ball has unit volume, so the mean is the integral.
            let exact = cf.phi_hat(k);
            let se = run.se();
            Check::new(
                "bessel",
                (run.mean - exact).abs() <= 3.0 * se,
                run.mean,
                exact,
                3.0 * se,
                format!("d={d} k={k:.4} samples={samples}"),
            )
        })
        .collect()
}

/// `(φ⋆φ)(0) = (2√π)^{-d}` for the Gaussian.
pub fn gaussian_convolution_check(d: usize) -> Check {
    let cf = ConnectionFunction::gaussian(d);
    let exact = (2.0 * std::f64::consts::PI.sqrt()).powi(-(d as i32));
    match cf.conv_at_zero(2) {
        Ok(v) => Check::new("gaussian_convolution", ((v - exact) / exact).abs() <= 1e-8, v, exact, 1e-8 * exact, format!("d={d}")),
        Err(e) => Check::failed("gaussian_convolution", e.to_string()),
    }
}

/// Mecke equation for `f(x, ξ) = 1{x has a neighbour}` over a window:
/// `E #{non-isolated points in W} = λ ∫_W P(x has a neighbour in ξ^x) dx`.
pub fn mecke_check(cf: &Arc<ConnectionFunction>, lambda: f64, side: f64, replicas: usize, seed: u64) -> Check {
    let d = cf.dimension();
    let bx = torus(side, d);
    let half = 0.25 * side;
    let inside = |x: &[f64]| x.iter().all(|v| v.abs() < half);
    let volume = (2.0 * half).powi(d as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x3ecc]));
    let (mut lhs, mut rhs) = (Running::default(), Running::default());
    for r in 0..replicas as u64 {
        let g = match build_rcm(cf.clone(), lambda, bx, derive_seed(seed, &[0x3ecd, r])) {
            Ok(g) => g,
            Err(e) => return Check::failed("mecke", e.to_string()),
        };
        lhs.push((0..g.points.len()).filter(|&v| g.degree(v) > 0 && inside(g.points.pos(v))).count() as f64);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-half..half)).collect();
        let real = match Realization::sample(cf.clone(), lambda, bx, derive_seed(seed, &[0x3ece, r])) {
            Ok(x) => x,
            Err(e) => return Check::failed("mecke", e.to_string()),
        };
        let w = real.view(&[&x]);
        let mut any = false;
        w.for_each_neighbor(w.inserted(0), &mut |_| any = true);
        rhs.push(lambda * volume * any as u8 as f64);
    }
    let se = lhs.se().hypot(rhs.se());
    Check::new(
        "mecke",
        (lhs.mean - rhs.mean).abs() <= 3.0 * se,
        lhs.mean,
        rhs.mean,
        3.0 * se,
        format!("λ={lambda} replicas={replicas}: E #non-isolated in window vs λ|W| P(neighbour)"),
    )
}

/// BK (`P(E ∘ F) ≤ P(E) P(F)`) and FKG (`Cov(1_E, 1_F) ≥ 0`) for the
/// increasing events `E = {a ↔ b}`, `F = {c ↔ d}` between four inserted
/// points at the corners of a square of side 1.24 times the range of `φ`,
/// so that neither event is a direct edge.
pub fn bk_fkg_check(cf: &Arc<ConnectionFunction>, lambda: f64, side: f64, replicas: usize, seed: u64) -> Vec<Check> {
    let d = cf.dimension();
    let bx = torus(side, d);
    let h = 0.62 * cf.support_radius().unwrap_or_else(|| cf.tail_radius(0.5));
    let corner = |sx: f64, sy: f64| {
        let mut v = vec![0.0; d];
        v[0] = sx * h;
        if d > 1 {
            v[1] = sy * h;
        }
        v
    };
    let (pa, pb, pc, pd) = (corner(-1.0, -1.0), corner(1.0, -1.0), corner(-1.0, 1.0), corner(1.0, 1.0));
    let (mut e, mut f, mut both, mut prod) = (Running::default(), Running::default(), Running::default(), Vec::new());
    let mut censored = 0usize;
    for r in 0..replicas as u64 {
        let real = match Realization::sample(cf.clone(), lambda, bx, derive_seed(seed, &[0xb4, r])) {
            Ok(x) => x,
            Err(err) => return vec![Check::failed("bk", err.to_string()), Check::failed("fkg", err.to_string())],
        };
        let w = real.view(&[&pa, &pb, &pc, &pd]);
        let (a, b, c, dd) = (w.inserted(0), w.inserted(1), w.inserted(2), w.inserted(3));
        let (Some(x), Some(y)) = (connected(&w, a, b, None, 100_000), connected(&w, c, dd, None, 100_000)) else {
            censored += 1;
            continue;
        };
        let Some(z) = disjoint_connections(&w, (a, b), (c, dd), 100_000, 1_000_000) else {
            censored += 1;
            continue;
        };
        e.push(x as u8 as f64);
        f.push(y as u8 as f64);
        both.push(z as u8 as f64);
        prod.push((x as u8 as f64, y as u8 as f64));
    }
    let se = (both.se().powi(2) + (f.mean * e.se()).powi(2) + (e.mean * f.se()).powi(2)).sqrt();
    let bk = Check::new(
        "bk",
        both.mean <= e.mean * f.mean + 3.0 * se,
        both.mean,
        e.mean * f.mean,
        3.0 * se,
        format!("P(E)={:.4} P(F)={:.4} censored={censored}", e.mean, f.mean),
    );
    let cov: Running = prod.iter().map(|(x, y)| (x - e.mean) * (y - f.mean)).collect();
    let fkg = Check::new(
        "fkg",
        cov.mean >= -3.0 * cov.se(),
        cov.mean,
        0.0,
        3.0 * cov.se(),
        format!("Cov(1_E, 1_F) over {} replicas", cov.n),
    );
    vec![bk, fkg]
}

/// The configuration outside the origin's cluster against an independently
/// thinned Poisson process: two-sample KS tests on the point and edge counts.
pub fn stopping_set_check(cf: &Arc<ConnectionFunction>, lambda: f64, side: f64, replicas: usize, seed: u64) -> Check {
    let d = cf.dimension();
    let bx = BoxSpec::new(side, d, Boundary::Free);
    let (mut counts, mut edges, mut oc, mut oe) = (vec![], vec![], vec![], vec![]);
    let mut discarded = 0;
    for r in 0..replicas as u64 {
        let s = derive_seed(seed, &[0x5709, r]);
        let sample = match stopping_set_sample(lambda, cf.clone(), bx, s, Caps::default()) {
            Ok(x) => x,
            Err(e) => return Check::failed("stopping_set", e.to_string()),
        };
        if sample.touched_boundary || sample.censored {
            discarded += 1;
            continue;
        }
        counts.push(sample.remainder.points.len() as f64);
        edges.push(sample.remainder.edge_count() as f64);
        let os = derive_seed(s, &[0x0ac1e]);
        let g = sample_thinned_ppp(lambda, cf, &bx, &sample.cluster, os)
            .and_then(|p| build_rcm_on(cf.clone(), lambda, bx, p, Marks::new(os)));
        match g {
            Ok(g) => {
                oc.push(g.points.len() as f64);
                oe.push(g.edge_count() as f64);
            }
            Err(e) => return Check::failed("stopping_set", e.to_string()),
        }
    }
    let kc = ks_two_sample(&counts, &oc);
    let ke = ks_two_sample(&edges, &oe);
    let p = kc.p_value.min(ke.p_value);
    Check::new(
        "stopping_set",
        p > 0.01 && discarded * 10 < replicas,
        p,
        0.01,
        0.0,
        format!("KS p-values: counts {:.3}, edges {:.3}; {discarded} of {replicas} touched the boundary", kc.p_value, ke.p_value),
    )
}

/// `|χ̂ - (1 + λ ∫ τ̂)| ≤ 5` combined standard errors.
pub fn chi_identity_check(cf: &Arc<ConnectionFunction>, lambda: f64, side: f64, replicas: usize, seed: u64) -> Check {
    let bx = torus(side, cf.dimension());
    let run = || -> crate::estimators::Result<Check> {
        let chi = estimate_chi(lambda, cf, bx, replicas, derive_seed(seed, &[1]))?;
        let radii = default_radii(cf, 0.2 * side, 24);
        let tau = estimate_tau(lambda, cf, &radii, bx, (replicas / 3).max(10), derive_seed(seed, &[2]))?;
        let i = chi_from_profile(&tau);
        let se = chi.stderr.hypot(i.stderr);
        Ok(Check::new(
            "chi_identity",
            (chi.value - i.value).abs() <= 5.0 * se,
            chi.value,
            i.value,
            5.0 * se,
            format!("λ={lambda}: χ̂ against 1 + λ∫τ̂ (tail share {:.4})", i.tail / i.value),
        ))
    };
    run().unwrap_or_else(|e| Check::failed("chi_identity", e.to_string()))
}

/// `d/dλ τ̂(0) ≤ τ̂(0)²` on a grid of intensities.
pub fn derivative_check(cf: &Arc<ConnectionFunction>, grid: &[f64], side: f64, replicas: usize, seed: u64) -> Check {
    match chi_derivative_check(grid, cf, torus(side, cf.dimension()), replicas, seed) {
        Ok(rep) => {
            let worst = rep
                .points
                .iter()
                .map(|p| (p.derivative - p.tau_hat * p.tau_hat) / p.margin_se.max(1e-300))
                .fold(f64::NEG_INFINITY, f64::max);
            let detail = rep
                .points
                .iter()
                .map(|p| format!("λ={}: {:.4} vs {:.4}", p.lambda, p.derivative, p.tau_hat * p.tau_hat))
                .collect::<Vec<_>>()
                .join("; ");
            Check::new("differential_inequality", rep.all_hold, worst, 0.0, 3.0, format!("largest margin in standard errors; {detail}"))
        }
        Err(e) => Check::failed("differential_inequality", e.to_string()),
    }
}

/// `λ ∫ Π̂^(0) ≤ λ³ (φ^{⋆2} ⋆ τ^{⋆2})(0)`, the right side from the empirical
/// `τ̂` as `λ³ ∫ φ̂² τ̂² dk/(2π)^d`. Also reports `Π^(0) ≥ 0` radius by radius.
pub fn pi0_bound_check(cf: &Arc<ConnectionFunction>, lambda: f64, side: f64, replicas: usize, seed: u64) -> Vec<Check> {
    let bx = torus(side, cf.dimension());
    let radii = default_radii(cf, 0.2 * side, 24);
    let run = || -> Result<Vec<Check>, String> {
        let pi0 = estimate_pi0(lambda, cf, &radii, bx, replicas, derive_seed(seed, &[1])).map_err(|e| e.to_string())?;
        let tau = estimate_tau(lambda, cf, &radii, bx, replicas, derive_seed(seed, &[2])).map_err(|e| e.to_string())?;
        let lhs = pi0.integral();
        let th = profile_tau_hat(&tau);
        let c = Arc::new((**cf).clone());
        let f = RadialFunction::new(move |k| (c.phi_hat(k) * th.eval(k)).powi(2), cf.hat_decay(2.0));
        let rhs = radial_integral(&f, cf.dimension()).map_err(|e| e.to_string())?.value;
        let (l, r) = (lambda * lhs.value, lambda.powi(3) * rhs);
        let se = lambda * lhs.stderr;
        let bound = Check::new("pi0_bound", l <= r + 3.0 * se, l, r, 3.0 * se, format!("λ={lambda}: λ∫Π̂^(0) against λ³(φ⋆φ⋆τ⋆τ)(0)"));
        let worst = pi0.values.iter().map(|v| v.value / v.stderr.max(1e-300)).fold(f64::INFINITY, f64::min);
        let nonneg = Check::new(
            "pi0_nonnegative",
            pi0.values.iter().all(|v| v.value >= -3.0 * v.stderr),
            worst.min(0.0),
            0.0,
            3.0,
            format!("{} radii; smallest value in standard errors", radii.len()),
        );
        Ok(vec![bound, nonneg])
    };
    run().unwrap_or_else(|e| vec![Check::failed("pi0_bound", e.clone()), Check::failed("pi0_nonnegative", e)])
}

/// `sup_k |R̂_{λ,1}(k)| < sup_k |R̂_{λ,0}(k)|` beyond the combined error.
pub fn oze_shrink_check(cf: &Arc<ConnectionFunction>, lambda: f64, side: f64, replicas: usize, seed: u64) -> Check {
    let bx = torus(side, cf.dimension());
    let radii = default_radii(cf, 0.2 * side, 24);
    let reach = cf.support_radius().unwrap_or_else(|| cf.tail_radius(0.5));
    let ks: Vec<f64> = (0..12).map(|i| i as f64 * 0.5 / reach).collect();
    let run = || -> crate::estimators::Result<Check> {
        let tau = estimate_tau(lambda, cf, &radii, bx, replicas, derive_seed(seed, &[1]))?;
        let pi0 = estimate_pi0(lambda, cf, &radii, bx, replicas, derive_seed(seed, &[2]))?;
        let pi1 = estimate_pi1(lambda, cf, &radii, bx, replicas, derive_seed(seed, &[3]))?;
        let res = oze_residual(lambda, cf, &tau, &pi0, &pi1, &ks)?;
        let (s0, e0) = res.sup(0);
        let (s1, e1) = res.sup(1);
        let se = e0.hypot(e1);
        Ok(Check::new(
            "oze_residual",
            s0 - s1 > 2.0 * se,
            s1,
            s0,
            2.0 * se,
            format!("λ={lambda}: sup|R̂_1| against sup|R̂_0|; {}", res.warnings.join("; ")),
        ))
    };
    run().unwrap_or_else(|e| Check::failed("oze_residual", e.to_string()))
}

/// The cosine split inequality on random draws of up to six angles.
pub fn cosine_split_random(draws: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0xc05]));
    let mut bad = 0usize;
    for _ in 0..draws {
        let m = rng.gen_range(1..=6);
        let ts: Vec<f64> = (0..m).map(|_| rng.gen_range(-4.0 * std::f64::consts::PI..4.0 * std::f64::consts::PI)).collect();
        if !cosine_split_check(&ts) {
            bad += 1;
        }
    }
    Check::new("cosine_split", bad == 0, bad as f64, 0.0, 0.0, format!("{draws} random draws, failures counted"))
}

/// `max |Δ_k â + 2 â_k| ≤ 1e-10` for a Gaussian on a periodic grid.
pub fn delta_k_check() -> Check {
    let cf = ConnectionFunction::gaussian(1);
    let mut worst: f64 = 0.0;
    for shift in [1, 4, 16] {
        match delta_k_identity(|x| cf.phi_radial(x.abs()), 2048, 48.0, shift) {
            Ok(r) => worst = worst.max(r.max_error),
            Err(e) => return Check::failed("delta_k_identity", e.to_string()),
        }
    }
    Check::new("delta_k_identity", worst <= 1e-10, worst, 0.0, 1e-10, "Gaussian on 2048 points, shifts 1, 4, 16".into())
}

/// `f₂ ≤ 1` and `f₃ ≤ 1/126` at zero intensity.
pub fn bootstrap_zero_check(cf: &ConnectionFunction) -> Vec<Check> {
    let ks = log_grid(1e-3, 25.0, 80);
    let run = || -> Result<Vec<Check>, FourierError> {
        let tau = green_tau_hat(cf, 0.0)?;
        let b = bootstrap_f(cf, 0.0, &tau, &ks, &ks)?;
        Ok(vec![
            Check::new("bootstrap_f2", b.f2 <= 1.0, b.f2, 1.0, 0.0, format!("{:?} at k={:.4}", cf.kind(), b.argmax_f2)),
            Check::new(
                "bootstrap_f3",
                b.f3 <= 1.0 / 126.0 + 1e-6,
                b.f3,
                1.0 / 126.0,
                1e-6,
                format!("{:?} at (k, l)=({:.4}, {:.4})", cf.kind(), b.argmax_f3.0, b.argmax_f3.1),
            ),
        ])
    };
    run().unwrap_or_else(|e| vec![Check::failed("bootstrap_f2", e.to_string()), Check::failed("bootstrap_f3", e.to_string())])
}

/// Triangle of the critical random-walk surrogate strictly decreasing over
/// `d = 8..=14` for the Gaussian, and the random-walk integral finite
/// exactly above the dimension threshold.
pub fn triangle_decay_check() -> Vec<Check> {
    let mut values = Vec::new();
    for d in 8..=14 {
        match triangle_mean_field(&ConnectionFunction::gaussian(d), 1.0, &TauHat::Green { mu: 1.0 }) {
            Ok(q) => values.push(q.value),
            Err(e) => return vec![Check::failed("triangle_decay", e.to_string())],
        }
    }
    let worst = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let decay = Check::new(
        "triangle_decay",
        worst < 0.0,
        worst,
        0.0,
        0.0,
        format!("largest step over d=8..14: {}", values.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>().join(", ")),
    );
    let mut wrong = Vec::new();
    for s in 1..=3u32 {
        for d in 1..=(4 * s as usize + 3) {
            let r = rw_condition_integral(&ConnectionFunction::gaussian(d), 1.0, 2, s);
            let divergent = matches!(r, Err(FourierError::BelowDimensionThreshold { .. }));
            let finite = matches!(&r, Ok(q) if q.value.is_finite());
            let expect_finite = d > 4 * s as usize;
            if expect_finite != finite || expect_finite == divergent {
                wrong.push(format!("s={s} d={d}"));
            }
        }
    }
    let threshold = Check::new(
        "rw_threshold",
        wrong.is_empty(),
        wrong.len() as f64,
        0.0,
        0.0,
        if wrong.is_empty() { "finite exactly for d > 4s, s = 1, 2, 3".into() } else { wrong.join(", ") },
    );
    vec![decay, threshold]
}

/// `Δ ≤ Δ° ≤ Δ°°` for a few models and intensities.
pub fn triangle_ordering_check() -> Check {
    let mut bad = Vec::new();
    for (cf, mu) in [(ConnectionFunction::gaussian(9), 1.0), (ConnectionFunction::boolean(5), 0.6), (ConnectionFunction::gaussian(3), 0.5)] {
        for lambda in [0.2, 0.6, 1.0] {
            match triangles(&cf, lambda, &TauHat::Green { mu }) {
                Ok(t) if t.triangle <= t.open && t.open <= t.double => {}
                Ok(t) => bad.push(format!("{:?} λ={lambda}: {t:?}", cf.kind())),
                Err(e) => bad.push(e.to_string()),
            }
        }
    }
    Check::new("triangle_ordering", bad.is_empty(), bad.len() as f64, 0.0, 0.0, bad.join("; "))
}

/// Budgets of the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyBudget {
    pub seed: u64,
    /// Replicas of the Mecke, BK and FKG checks.
    pub replicas: usize,
    pub stopping_set_replicas: usize,
    pub chi_replicas: usize,
    pub bessel_cases: usize,
    pub bessel_samples: usize,
    pub cosine_draws: usize,
}

impl VerifyBudget {
    pub fn full(seed: u64) -> Self {
        VerifyBudget {
            seed,
            replicas: 10_000,
            stopping_set_replicas: 5000,
            chi_replicas: 4000,
            bessel_cases: 50,
            bessel_samples: 10_000_000,
            cosine_draws: 100_000,
        }
    }

    pub fn smoke(seed: u64) -> Self {
        VerifyBudget {
            seed,
            replicas: 2000,
            stopping_set_replicas: 1000,
            chi_replicas: 1500,
            bessel_cases: 10,
            bessel_samples: 200_000,
            cosine_draws: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub budget: VerifyBudget,
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

/// Runs the property checks on the two-dimensional Boolean model at
/// `λ = 0.4` together with the deterministic numerical checks.
pub fn verify_suite(budget: VerifyBudget) -> VerifyReport {
    let cf = Arc::new(ConnectionFunction::boolean(2));
    let seed = budget.seed;
    let mut checks = Vec::new();
    checks.push(timed(|| mecke_check(&cf, 0.4, 8.0, budget.replicas, derive_seed(seed, &[1]))));
    checks.extend(timed_many(|| bk_fkg_check(&cf, 0.4, 8.0, budget.replicas, derive_seed(seed, &[2]))));
    checks.push(timed(|| cosine_split_random(budget.cosine_draws, derive_seed(seed, &[3]))));
    checks.push(timed(delta_k_check));
    checks.extend(timed_many(|| bessel_check(budget.bessel_cases, budget.bessel_samples, derive_seed(seed, &[4]))));
    checks.push(timed(|| chi_identity_check(&cf, 0.4, 14.0, budget.chi_replicas, derive_seed(seed, &[5]))));
    checks.extend(timed_many(|| pi0_bound_check(&cf, 0.3, 10.0, budget.chi_replicas / 2, derive_seed(seed, &[6]))));
    checks.push(timed(|| stopping_set_check(&cf, 0.4, 10.0, budget.stopping_set_replicas, derive_seed(seed, &[7]))));
    checks.push(timed(triangle_ordering_check));
    let all_passed = checks.iter().all(|c| c.passed);
    VerifyReport { budget, checks, all_passed }
}
