use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rcm::estimators::{default_radii, estimate_tau};
use rcm::fourier::*;
use rcm::model::{ConnectionFunction, GreenFunctionSpec, Kind};
use rcm::sampler::{Boundary, BoxSpec};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn gaussian(d: usize) -> ConnectionFunction {
    ConnectionFunction::gaussian(d)
}

fn phi_hat_fn(cf: &ConnectionFunction, power: i32) -> RadialFunction {
    let c = Arc::new(cf.clone());
    RadialFunction::new(move |k| c.phi_hat(k).powi(power), cf.hat_decay(power as f64))
}

#[test]
fn radial_integral_of_the_gaussian_square() {
    let v = radial_integral(&phi_hat_fn(&gaussian(1), 2), 1).unwrap();
    assert!((v.value - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-9);
    assert!((v.value - 0.2820948).abs() < 1e-7);
}

#[test]
fn radial_integral_of_zero_and_of_a_density() {
    let zero = RadialFunction::new(|_| 0.0, Decay::Gaussian { scale: 1.0 });
    assert_eq!(radial_integral(&zero, 3).unwrap().value, 0.0);
    for d in 1..=8 {
        let f = RadialFunction::new(|t| (-0.5 * t * t).exp(), Decay::Gaussian { scale: 1.0 });
        let v = radial_integral(&f, d).unwrap();
        assert!(rel(v.value, (2.0 * PI).powf(-(d as f64) / 2.0)) < 1e-8, "d={d}");
    }
}

#[test]
fn radial_integral_flags_divergent_tails() {
    let f = RadialFunction::new(|t| (1.0 + t * t).powf(-1.0), Decay::Algebraic { exponent: 2.0 });
    assert!(matches!(radial_integral(&f, 3), Err(RadialError::Divergent { .. })));
    assert!(radial_integral(&f, 1).is_ok());
}

#[test]
fn rw_integral_reduces_to_convolutions() {
    for cf in [gaussian(3), ConnectionFunction::boolean(3)] {
        for m in 2..=4u32 {
            let conv = cf.conv_at_zero(m as usize).unwrap();
            let free = rw_condition_integral(&cf, 0.0, m, 2).unwrap().value;
            let flat = rw_condition_integral(&cf, 0.7, m, 0).unwrap().value;
            // The Boolean transform changes sign, so odd powers differ from |φ̂|^m.
            if m % 2 == 0 || cf.kind() == Kind::Gaussian {
                assert!(rel(free, conv) < 1e-7, "{:?} m={m}", cf.kind());
                assert!(rel(flat, conv) < 1e-7);
            }
        }
    }
}

/// Dense midpoint Riemann sum of `e^{-|k|²}/(1 - e^{-|k|²/2})` over
/// `[-K, K]^5`. The sum only depends on `Σ (2i+1)²`, so the lattice is
/// collapsed into a histogram of that quantity first.
fn riemann_rw_gaussian_5d(n: usize, cutoff: f64) -> f64 {
    let h = cutoff / n as f64;
    let one: Vec<usize> = (0..n).map(|i| (2 * i + 1) * (2 * i + 1)).collect();
    let mut hist = vec![0.0f64; 1];
    hist[0] = 1.0;
    for _ in 0..5 {
        let mut next = vec![0.0; hist.len() + one[n - 1]];
        for (s, &c) in hist.iter().enumerate() {
            if c != 0.0 {
                for &o in &one {
                    next[s + o] += c;
                }
            }
        }
        hist = next;
    }
    let mut sum = 0.0;
    for (s, &c) in hist.iter().enumerate() {
        if c != 0.0 {
            let k2 = 0.25 * h * h * s as f64;
            sum += c * (-k2).exp() / -(-0.5 * k2).exp_m1();
        }
    }
    // 2^5 orthants, cell volume h^5.
    32.0 * sum * h.powi(5) / (2.0 * PI).powi(5)
}

#[test]
fn rw_integral_matches_a_dense_grid_at_the_critical_point() {
    let v = rw_condition_integral(&gaussian(5), 1.0, 2, 1).unwrap();
    let oracle = riemann_rw_gaussian_5d(120, 6.5);
    assert!(v.value.is_finite());
    assert!(rel(v.value, oracle) < 0.01, "{} vs {oracle}", v.value);
}

#[test]
fn rw_integral_decreases_in_the_dimension() {
    for s in 1..=2u32 {
        let mut last = f64::INFINITY;
        for d in (4 * s as usize + 1)..=(4 * s as usize + 6) {
            let v = rw_condition_integral(&gaussian(d), 1.0, 2, s).unwrap().value;
            assert!(v.is_finite() && v <= last, "s={s} d={d}");
            last = v;
        }
    }
}

#[test]
fn rw_integral_flags_dimensions_at_or_below_the_threshold() {
    for s in 1..=3u32 {
        for d in 1..=(4 * s as usize) {
            let r = rw_condition_integral(&gaussian(d), 1.0, 2, s);
            assert!(matches!(r, Err(FourierError::BelowDimensionThreshold { .. })), "s={s} d={d}");
        }
        assert!(rw_condition_integral(&gaussian(4 * s as usize + 1), 1.0, 2, s).is_ok());
        // Below μ = 1 nothing is singular.
        assert!(rw_condition_integral(&gaussian(2), 0.9, 2, s).is_ok());
    }
    assert!(rw_condition_integral(&gaussian(5), 1.0, 1, 1).is_err());
}

#[test]
fn related_integrals_collapse_at_zero_shift() {
    let cf = gaussian(9);
    for n in 1..=3 {
        let r = related_integrals(&cf, 0.8, 2, Related::Sum(n), 0.0).unwrap();
        let rw = rw_condition_integral(&cf, 0.8, 2, 3).unwrap().value;
        assert!(rel(r.exact.value, 2f64.powi(n as i32) * rw) < 1e-12);
    }
    // The shifted integral is continuous at k = 0.
    let near = related_integrals(&cf, 0.8, 2, Related::Sum(1), 1e-4).unwrap();
    let at = related_integrals(&cf, 0.8, 2, Related::Sum(1), 0.0).unwrap();
    assert!(rel(near.exact.value, at.exact.value) < 1e-5);
}

#[test]
fn related_integrals_stay_below_their_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..20 {
        let d = rng.gen_range(5..=9);
        let cf = if case % 2 == 0 { gaussian(d) } else { ConnectionFunction::spread_out_ball(d, rng.gen_range(1.0..2.0)).unwrap() };
        let mu = rng.gen_range(0.0..0.95);
        let m = rng.gen_range(2..=3);
        let which = match rng.gen_range(0..4) {
            0 => Related::Product,
            n => Related::Sum(n),
        };
        let k = rng.gen_range(0.05..3.0);
        let r = related_integrals(&cf, mu, m, which, k).unwrap();
        assert!(r.exact.value <= r.bound * (1.0 + 1e-9), "case {case}: {} > {}", r.exact.value, r.bound);
    }
}

#[test]
fn related_integral_matches_monte_carlo_in_high_dimension() {
    let d = 13;
    let cf = gaussian(d);
    let exact = related_integrals(&cf, 1.0, 3, Related::Sum(1), 1.0).unwrap().exact.value;
    // Importance sampling from the density proportional to |φ̂(l)|³.
    let g = |t2: f64| 1.0 / -(-0.5 * t2).exp_m1();
    let sd = (1.0f64 / 3.0).sqrt();
    let norm = (2.0 * PI / 3.0).powf(d as f64 / 2.0) / (2.0 * PI).powi(d as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 1_000_000;
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let mut l2 = 0.0;
        let mut l0 = 0.0;
        for i in 0..d {
            let x: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
            l2 += x * x;
            if i == 0 {
                l0 = x;
            }
        }
        let plus = l2 + 2.0 * l0 + 1.0;
        let minus = l2 - 2.0 * l0 + 1.0;
        let v = norm * g(l2).powi(2) * (g(plus) + g(minus));
        s1 += v;
        s2 += v * v;
    }
    let mean = s1 / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!(rel(exact, mean) < 0.02, "{exact} vs {mean} ± {se}");
}

#[test]
fn triangle_trivial_cases() {
    let cf = gaussian(4);
    assert_eq!(triangle_mean_field(&cf, 0.0, &TauHat::Green { mu: 0.5 }).unwrap().value, 0.0);
    for lambda in [0.3, 1.0] {
        let t = triangle_mean_field(&cf, lambda, &TauHat::Green { mu: 0.0 }).unwrap().value;
        assert!(rel(t, lambda * lambda * cf.conv_at_zero(3).unwrap()) < 1e-8);
        let radial = TauHat::Radial(phi_hat_fn(&cf, 1));
        let t2 = triangle_mean_field(&cf, lambda, &radial).unwrap().value;
        assert!(rel(t2, t) < 1e-8);
    }
}

#[test]
fn triangle_decreases_in_the_dimension() {
    let mut last = f64::INFINITY;
    for d in 8..=14 {
        let t = triangle_mean_field(&gaussian(d), 1.0, &TauHat::Green { mu: 1.0 }).unwrap().value;
        assert!(t.is_finite() && t < last, "d={d}: {t} vs {last}");
        last = t;
    }
}

#[test]
fn triangles_are_ordered() {
    for (cf, mu) in [(gaussian(9), 1.0), (gaussian(3), 0.5), (ConnectionFunction::boolean(5), 0.6)] {
        for lambda in [0.2, 0.5, 1.0] {
            let t = triangles(&cf, lambda, &TauHat::Green { mu }).unwrap();
            assert!(0.0 <= t.triangle && t.triangle <= t.open && t.open <= t.double, "{t:?}");
        }
    }
}

#[test]
fn epsilon_quantities() {
    let cf = gaussian(3);
    let tau = TauHat::Green { mu: 0.5 };
    let at_zero = open_triangle_at(&cf, 0.5, &tau, 0.0).unwrap().value;
    let t = triangles(&cf, 0.5, &tau).unwrap();
    assert!(rel(at_zero, t.open) < 1e-8);
    let (v, r) = epsilon_triangle(&cf, 0.5, &tau, 0.5, 4.0, 8).unwrap();
    assert!(v <= t.open && v > 0.0);
    assert_eq!(r, 0.5);
    assert!((b_epsilon(2.0, 2, 1.0) - (2.0 * PI).sqrt()).abs() < 1e-12);
    assert_eq!(b_epsilon(0.0, 3, 1.0), 0.0);
}

#[test]
fn oze_solution_without_lace_coefficients() {
    let cf = gaussian(3);
    let zero = RadialFunction::new(|_| 0.0, Decay::Gaussian { scale: 1.0 });
    let ks = log_grid(1e-3, 20.0, 40);
    let t0 = oze_solve(&cf, 0.0, &zero, &ks).unwrap();
    for &k in &ks {
        assert_eq!(t0.eval(k), cf.phi_hat(k));
    }
    let t = oze_solve(&cf, 0.5, &zero, &ks).unwrap();
    assert!((t.eval(0.0) - 2.0).abs() < 1e-14);
    assert!(t.eval(20.0).abs() < 1e-12);
    let pi = RadialFunction::new(|_| 0.2, Decay::Gaussian { scale: 1.0 });
    assert!(matches!(oze_solve(&cf, 0.9, &pi, &ks), Err(FourierError::Supercritical { .. })));
}

#[test]
fn infra_red_identity_without_lace_coefficients() {
    let zero = RadialFunction::new(|_| 0.0, Decay::Gaussian { scale: 1.0 });
    let ks = log_grid(1e-4, 30.0, 200);
    for cf in [gaussian(2), ConnectionFunction::boolean(3)] {
        for lambda in [0.1, 0.5, 0.9, 0.99] {
            let t = oze_solve(&cf, lambda, &zero, &ks).unwrap();
            for &k in &ks {
                let (p, th) = (cf.phi_hat(k), t.eval(k));
                assert!((th - lambda * p * th - p).abs() <= 1e-12 * (1.0 + th.abs()));
                assert!(lambda * th.abs() * (1.0 - p) <= p.abs() + lambda * p * p + 1e-12);
            }
        }
    }
}

#[test]
fn green_function_is_at_least_one_half() {
    let ks = log_grid(1e-4, 40.0, 400);
    for cf in [gaussian(2), ConnectionFunction::boolean(1), ConnectionFunction::boolean(4), ConnectionFunction::spread_out_box(2, 1.5).unwrap()] {
        for mu in [0.0, 0.3, 0.9, 1.0] {
            let g = GreenFunctionSpec::new(&cf, mu).unwrap();
            for &k in ks.iter().skip(1) {
                assert!(g.green_hat_unchecked(k) >= 0.5);
            }
        }
    }
}

#[test]
fn bootstrap_values_at_zero_intensity() {
    let ks = log_grid(1e-3, 20.0, 60);
    for cf in [gaussian(2), gaussian(6), ConnectionFunction::boolean(3)] {
        let tau = green_tau_hat(&cf, 0.0).unwrap();
        let b = bootstrap_f(&cf, 0.0, &tau, &ks, &ks).unwrap();
        assert_eq!(b.f1, 0.0);
        assert_eq!(b.mu, 0.0);
        assert!(b.f2 <= 1.0 + 1e-12, "{b:?}");
        assert!(b.f3 <= 1.0 / 126.0 + 1e-6, "{b:?}");
        assert!(b.f3 > 0.0 && b.grid_f3 <= b.f3);
    }
}

#[test]
fn bootstrap_values_below_the_critical_point() {
    let cf = gaussian(5);
    let zero = RadialFunction::new(|_| 0.0, Decay::Gaussian { scale: 1.0 });
    let ks = log_grid(1e-3, 20.0, 60);
    let tau = oze_solve(&cf, 0.5, &zero, &ks).unwrap();
    let b = bootstrap_f(&cf, 0.5, &tau, &ks, &ks).unwrap();
    assert!((b.mu - 0.5).abs() < 1e-12);
    // τ̂ = φ̂ Ĝ_{1/2} exactly, so f₂ = sup φ̂ = 1.
    assert!((b.f2 - 1.0).abs() < 1e-9);
    assert!(b.f3.is_finite() && b.f3 > 0.0);
    assert!(matches!(mu_lambda(0.5), Err(FourierError::InvalidArgument(_))));
    assert_eq!(mu_lambda(1.0).unwrap(), 0.0);
    assert_eq!(mu_lambda(2.0).unwrap(), 0.5);
    assert!(mu_lambda(1e12).unwrap() < 1.0 && mu_lambda(1e12).unwrap() > 1.0 - 1e-11);
}

#[test]
fn discrete_second_difference_at_zero_shift_vanishes() {
    let cf = ConnectionFunction::boolean(2);
    for l in [0.0, 0.3, 2.0, 7.0] {
        assert_eq!(delta_k(|x| cf.phi_hat(x.abs()), 0.0, l), 0.0);
    }
}

#[test]
fn second_difference_identity_on_a_grid() {
    let cf = gaussian(1);
    for shift in [1, 3, 17] {
        let r = delta_k_identity(|x| cf.phi_radial(x.abs()), 1024, 40.0, shift).unwrap();
        assert!(r.max_error <= 1e-10, "{r:?}");
        assert!(r.max_transform > 0.5);
    }
    // The grid transform of the density approximates φ̂.
    let g = rcm::fourier::grid::grid_transform(|x| cf.phi_radial(x.abs()), 1024, 40.0);
    for m in [0, 5, 20] {
        let k = 2.0 * PI * m as f64 / 40.0;
        assert!((g[m].re - cf.phi_hat(k)).abs() < 1e-10 && g[m].im.abs() < 1e-10);
    }
    assert!(delta_k_identity(|x| x, 1023, 40.0, 1).is_err());
}

#[test]
fn cosine_split_holds() {
    assert!(cosine_split_check(&[PI, -PI]));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100_000 {
        let m = rng.gen_range(1..=6);
        let ts: Vec<f64> = (0..m).map(|_| rng.gen_range(-10.0..10.0)).collect();
        assert!(cosine_split_check(&ts), "{ts:?}");
    }
    for t in [0.0, 0.4, 2.0, PI, -5.0] {
        // A single term is an equality.
        assert!(cosine_split_check(&[t]));
    }
}

#[test]
fn two_point_function_is_below_one_step_of_its_equation() {
    let cf = Arc::new(ConnectionFunction::boolean(2));
    let radii = default_radii(&cf, 3.0, 13);
    let tau = estimate_tau(0.5, &cf, &radii, BoxSpec::new(14.0, 2, Boundary::Torus), 600, 11).unwrap();
    let pts = tau_bound_check(&cf, &tau).unwrap();
    assert_eq!(pts.len(), radii.len());
    for p in &pts {
        assert!(p.holds, "{p:?}");
    }
    // Zero intensity is an equality.
    let tau0 = estimate_tau(0.0, &cf, &radii, BoxSpec::new(14.0, 2, Boundary::Torus), 10, 1).unwrap();
    for p in tau_bound_check(&cf, &tau0).unwrap().iter().skip(1) {
        assert!(p.margin.abs() < 1e-12, "{p:?}");
    }
}

#[test]
fn tables_write_as_csv() {
    let f = phi_hat_fn(&gaussian(2), 1);
    let rows = tabulate(&f, &[0.0, 1.0]);
    let mut buf = Vec::new();
    table_csv(&rows, &mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "k,value,error");
    assert_eq!(lines[1], "0,1,0");
    assert!(lines[2].starts_with("1,0.60653"));
}
