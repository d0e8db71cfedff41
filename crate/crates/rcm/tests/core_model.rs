use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcm::model::*;
use rcm::quadrature::{integrate, Tolerance};
use rcm::special::{bessel_j, sphere_area, unit_ball_volume};

fn all_kinds(d: usize) -> &'static [ConnectionFunction] {
    static KINDS: OnceLock<Vec<Vec<ConnectionFunction>>> = OnceLock::new();
    &KINDS.get_or_init(|| (0..=6).map(build_kinds).collect())[d]
}

fn build_kinds(d: usize) -> Vec<ConnectionFunction> {
    if d == 0 {
        return Vec::new();
    }
    vec![
        ConnectionFunction::boolean(d),
        ConnectionFunction::gaussian(d),
        ConnectionFunction::spread_out_box(d, 2.0).unwrap(),
        ConnectionFunction::spread_out_ball(d, 1.5).unwrap(),
        ConnectionFunction::long_range(d, 1.0, 1.5).unwrap(),
    ]
}

#[test]
fn eval_phi_examples() {
    let cf = ConnectionFunction::boolean(2);
    let r2 = unit_volume_radius(2);
    assert_eq!(cf.eval_phi(&[0.0, 0.0]).unwrap(), 1.0);
    assert_eq!(cf.eval_phi(&[2.0 * r2, 0.0]).unwrap(), 0.0);
    let g = ConnectionFunction::gaussian(1);
    assert!((g.eval_phi(&[0.0]).unwrap() - (2.0 * PI).powf(-0.5)).abs() < 1e-15);
    assert!((g.eval_phi(&[0.0]).unwrap() - 0.398_942_3).abs() < 1e-7);
    assert!(matches!(cf.eval_phi(&[0.0]), Err(ModelError::DimensionMismatch { .. })));
}

#[test]
fn phi_hat_at_zero_is_mass() {
    for d in 1..=6 {
        for cf in all_kinds(d) {
            assert!((cf.phi_hat(0.0) - 1.0).abs() < 1e-10, "{:?} d={d}", cf.kind());
        }
    }
    let mut p = ConnectionParams::new(Kind::BooleanBall, 3);
    p.radius = Some(2.0);
    p.normalize = false;
    let raw = ConnectionFunction::new(p).unwrap();
    let q = unit_ball_volume(3) * 8.0;
    assert!((raw.q() - q).abs() < 1e-12);
    assert!((raw.phi_hat(0.0) / q - 1.0).abs() < 1e-10);
}

#[test]
fn gaussian_hat_example() {
    let g = ConnectionFunction::gaussian(3);
    assert!((g.phi_hat(1.0) - (-0.5f64).exp()).abs() < 1e-15);
    assert!((g.phi_hat(1.0) - 0.606_530_7).abs() < 1e-7);
}

#[test]
fn disk_transform_matches_bessel_and_monte_carlo() {
    let mut p = ConnectionParams::new(Kind::BooleanBall, 2);
    p.radius = Some(1.0);
    p.normalize = false;
    let cf = ConnectionFunction::new(p).unwrap();
    let k = 2.7;
    let closed = 2.0 * PI / k * bessel_j(1.0, k);
    assert!((cf.phi_hat(k) - closed).abs() < 1e-12);
    // Uniform samples in the unit disk; the estimator is π E[cos(k x_1)].
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 10_000_000usize;
    let (mut s, mut s2) = (0.0, 0.0);
    let mut taken = 0usize;
    while taken < n {
        let x: f64 = rng.gen_range(-1.0..1.0);
        let y: f64 = rng.gen_range(-1.0..1.0);
        if x * x + y * y <= 1.0 {
            let v = PI * (k * x).cos();
            s += v;
            s2 += v * v;
            taken += 1;
        }
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - closed).abs() < 3.0 * se, "mc {mean} ± {se}, closed {closed}");
}

#[test]
fn bessel_cross_check_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..50 {
        let d = rng.gen_range(1..=6usize);
        let k = rng.gen_range(0.1..8.0);
        let cf = ConnectionFunction::boolean(d);
        let r = unit_volume_radius(d);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        let mut x = vec![0.0; d];
        for _ in 0..n {
            // Rejection sampling from the enclosing cube.
            loop {
                for v in x.iter_mut() {
                    *v = rng.gen_range(-r..r);
                }
                if x.iter().map(|v| v * v).sum::<f64>() <= r * r {
                    break;
                }
            }
            let v = (k * x[0]).cos();
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        let exact = cf.phi_hat(k);
        assert!((mean - exact).abs() < 4.0 * se + 1e-12, "case {case}: d={d} k={k} mc={mean}±{se} hat={exact}");
    }
}

#[test]
fn small_k_expansion_matches_ad() {
    for d in 1..=10 {
        let cf = ConnectionFunction::boolean(d);
        let r = unit_volume_radius(d);
        let a_d = r * r / (4.0 * (d as f64 / 2.0 + 1.0));
        let k = 1e-3;
        let ratio = cf.phi_hat_deficit(k) / (k * k);
        assert!((ratio / a_d - 1.0).abs() < 1e-4, "d={d}: {ratio} vs {a_d}");
        assert!((cf.small_k_coefficient().unwrap() / a_d - 1.0).abs() < 1e-12);
    }
}

#[test]
fn normalization_by_direct_integration() {
    // Independent of the Fourier side: integrate φ over space directly.
    for d in 1..=5 {
        for cf in all_kinds(d) {
            let mass = if cf.is_rotation_invariant() {
                let tol = Tolerance { abs: 1e-14, rel: 1e-12, max_panels: 4000 };
                let f = |r: f64| sphere_area(d) * r.powi(d as i32 - 1) * cf.phi_radial(r);
                let mut breaks = vec![0.0];
                if let Some(s) = cf.support_radius() {
                    breaks.push(s);
                } else {
                    // Unit kink or Gaussian: integrate on growing shells.
                    let mut e = 0.25;
                    while e < 1e7 {
                        breaks.push(e);
                        e *= 2.0;
                    }
                }
                let mut total: f64 =
                    breaks.windows(2).map(|w| integrate(f, w[0], w[1], tol).value).sum();
                if cf.kind() == Kind::LongRange {
                    // Analytic power-law tail beyond the last shell.
                    let rmax = *breaks.last().unwrap();
                    let alpha = cf.params().alpha.unwrap();
                    total += sphere_area(d) * rmax.powi(d as i32) * cf.phi_radial(rmax) / alpha;
                }
                total
            } else {
                // Product box: height times volume of the support.
                let half = cf.support_radius().unwrap() / (d as f64).sqrt();
                cf.max_value() * (2.0 * half).powi(d as i32)
            };
            assert!((mass - 1.0).abs() < 1e-8, "{:?} d={d}: mass {mass}", cf.kind());
        }
    }
}

#[test]
fn normalization_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for cf in all_kinds(3) {
        // Uniform samples in a cube of half-width w capture all but a negligible part.
        let w = match cf.kind() {
            Kind::LongRange => continue,
            _ => cf.tail_radius(1e-12) + 0.1,
        };
        let n = 400_000;
        let vol = (2.0 * w).powi(3);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = [rng.gen_range(-w..w), rng.gen_range(-w..w), rng.gen_range(-w..w)];
            let v = vol * cf.phi(&x);
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "{:?}: {mean} ± {se}", cf.kind());
    }
}

#[test]
fn long_range_transform_against_direct_hankel() {
    // d = 3 keeps the spherical kernel elementary: φ̂(k) = 4π ∫ r^2 φ(r) sin(kr)/(kr) dr.
    let cf = ConnectionFunction::long_range(3, 1.3, 1.5).unwrap();
    for &k in &[0.01, 0.3, 1.0, 2.5, 7.0] {
        let f = |r: f64| {
            let kr = k * r;
            let s = if kr < 1e-8 { 1.0 } else { kr.sin() / kr };
            4.0 * PI * r * r * cf.phi_radial(r) * s
        };
        let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_panels: 4000 };
        let period = 2.0 * PI / k;
        let mut total = 0.0;
        let kink = {
            // Kink radius: where φ stops being constant.
            let h = cf.max_value();
            let mut lo = 0.0;
            let mut hi = 100.0;
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if cf.phi_radial(m) < h {
                    hi = m
                } else {
                    lo = m
                }
            }
            hi
        };
        total += integrate(f, 0.0, kink, tol).value;
        let mut a: f64 = kink;
        // Integrate whole periods far out; the envelope r^{-2.5} leaves a tail below 1e-9.
        let stop = 4.0e4;
        while a < stop {
            let b = a + period.min(50.0);
            total += integrate(f, a, b, tol).value;
            a = b;
        }
        let hat = cf.phi_hat(k);
        assert!((hat - total).abs() < 1e-6, "k={k}: table {hat} direct {total}");
    }
}

#[test]
fn long_range_table_matches_direct_evaluation() {
    let cf = ConnectionFunction::long_range(4, 2.0, 0.8).unwrap();
    let kink = cf.tail_radius(4.0 / 4.8) ;
    for &k in &[0.002, 0.05, 0.77, 1.9, 3.3, 5.1, 7.7, 9.1, 19.0, 60.0] {
        let direct = long_range_deficit_direct(4, 0.8, k * kink);
        let table = cf.phi_hat_deficit(k);
        assert!((direct - table).abs() < 1e-7 * direct.max(1e-6), "k={k}: {direct} vs {table}");
    }
}

#[test]
fn green_examples() {
    let g3 = ConnectionFunction::gaussian(3);
    let spec = GreenFunctionSpec::new(&g3, 1.0).unwrap();
    let v = spec.green_hat(1.0).unwrap();
    assert!((v - 1.0 / (1.0 - (-0.5f64).exp())).abs() < 1e-12);
    assert!((v - 2.541_494).abs() < 1e-6);
    assert!(matches!(spec.green_hat(0.0), Err(ModelError::Pole)));
    let zero = GreenFunctionSpec::new(&g3, 0.0).unwrap();
    assert_eq!(zero.green_hat(3.3).unwrap(), 1.0);
    let half = GreenFunctionSpec::new(&g3, 0.5).unwrap();
    assert!((half.green_hat(0.0).unwrap() - 2.0).abs() < 1e-15);
    assert!(GreenFunctionSpec::new(&g3, 1.5).is_err());
}

#[test]
fn green_is_at_least_one_half() {
    for d in 1..=5 {
        for cf in all_kinds(d) {
            for mu in [0.0, 0.3, 0.9, 1.0] {
                let spec = GreenFunctionSpec::new(&cf, mu).unwrap();
                for i in 1..200 {
                    let k = 0.05 * i as f64;
                    assert!(spec.green_hat(k).unwrap() >= 0.5 - 1e-12);
                }
            }
        }
    }
}

#[test]
fn conv_at_zero_examples() {
    for d in 1..=5 {
        let g = ConnectionFunction::gaussian(d);
        let exact = (2.0 * PI.sqrt()).powi(-(d as i32));
        assert!((g.conv_at_zero(2).unwrap() / exact - 1.0).abs() < 1e-9, "d={d}");
    }
    // One-dimensional overlap of two unit intervals centred at zero.
    let b1 = ConnectionFunction::boolean(1);
    assert!((b1.conv_at_zero(2).unwrap() - 1.0).abs() < 1e-7);
    for d in 1..=4 {
        for cf in all_kinds(d) {
            if cf.kind() == Kind::LongRange && d == 1 {
                continue;
            }
            let two = cf.conv_at_zero(2).unwrap();
            let three = cf.conv_at_zero(3).unwrap();
            assert!(three <= two + 1e-9, "{:?} d={d}: {three} > {two}", cf.kind());
        }
    }
}

#[test]
fn conv2_closed_forms_agree_with_transform() {
    // φ⋆φ at the origin through the closed form and through ∫φ̂².
    for d in 1..=4 {
        for cf in all_kinds(d) {
            if let Some(v) = cf.conv2(&vec![0.0; d]) {
                let via_hat = cf.conv_at_zero(2).unwrap();
                assert!((v - via_hat).abs() < 1e-6 * v.max(1.0), "{:?} d={d}: {v} vs {via_hat}", cf.kind());
            }
        }
    }
}

#[test]
fn beta_examples() {
    let c8 = ModelConstants::with_rho(8, Some(0.5));
    assert!((model_beta(&c8, &ConnectionFunction::boolean(8)).unwrap() - 0.25).abs() < 1e-15);
    let so = ConnectionFunction::spread_out_ball(7, 2.0).unwrap();
    assert!((model_beta(&ModelConstants::new(7), &so).unwrap() - 0.0078125).abs() < 1e-15);
    let so1 = ConnectionFunction::spread_out_box(3, 1.0).unwrap();
    assert_eq!(model_beta(&ModelConstants::new(3), &so1).unwrap(), 1.0);
    let none = ModelConstants::with_rho(4, None);
    assert_eq!(model_beta(&none, &ConnectionFunction::gaussian(4)), Err(ModelError::MissingRho));
    // Monotone in d for H1 and in L for H2.
    let mut prev = f64::INFINITY;
    for d in 1..12 {
        let b = model_beta(&ModelConstants::new(d), &ConnectionFunction::gaussian(d)).unwrap();
        assert!(b < prev);
        prev = b;
    }
    let mut prev = f64::INFINITY;
    for l in [1.0, 1.5, 2.0, 4.0] {
        let b = model_beta(&ModelConstants::new(5), &ConnectionFunction::long_range(5, l, 1.0).unwrap()).unwrap();
        assert!(b < prev);
        prev = b;
    }
}

#[test]
fn box_low_frequency_shape() {
    // 1 - φ̂_L(k) >= c1 L^2 |k|^2 on |k| <= b/L and >= c2 beyond, with positive fitted constants.
    let b = 1.0;
    for l in [1.0, 2.0, 4.0] {
        let cf = ConnectionFunction::spread_out_box(3, l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (mut c1, mut c2) = (f64::INFINITY, f64::INFINITY);
        for _ in 0..4000 {
            let mut dir = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
            let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            dir.iter_mut().for_each(|v| *v /= n);
            let kn = rng.gen_range(1e-3..30.0) / l;
            let k: Vec<f64> = dir.iter().map(|v| v * kn).collect();
            let def = cf.phi_hat_deficit_vec(&k);
            if kn <= b / l {
                c1 = c1.min(def / (l * l * kn * kn));
            } else {
                c2 = c2.min(def);
            }
        }
        assert!(c1 > 0.0 && c2 > 0.0, "L={l}: c1={c1} c2={c2}");
    }
}

#[test]
fn rejects_bad_parameters() {
    assert!(ConnectionFunction::spread_out_ball(3, 0.5).is_err());
    let mut p = ConnectionParams::new(Kind::LongRange, 3);
    p.spread = Some(1.0);
    assert!(ConnectionFunction::new(p).is_err());
    let mut p = ConnectionParams::new(Kind::BooleanBall, 2);
    p.radius = Some(-1.0);
    assert!(ConnectionFunction::new(p).is_err());
}

#[test]
fn appendix_cutoff_variant_is_normalized() {
    let mut p = ConnectionParams::new(Kind::LongRange, 3);
    p.spread = Some(1.5);
    p.alpha = Some(1.0);
    p.cutoff = LongRangeCutoff::UnitVolumeRadius;
    let cf = ConnectionFunction::new(p).unwrap();
    assert!((cf.q_original() - 1.0).abs() < 1e-12);
    assert!(cf.max_value() <= 1.0);
    assert!((cf.phi_hat(0.0) - 1.0).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn phi_is_symmetric_and_bounded(x in proptest::collection::vec(-3.0f64..3.0, 3)) {
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        for cf in all_kinds(3) {
            let a = cf.eval_phi(&x).unwrap();
            prop_assert_eq!(a, cf.eval_phi(&neg).unwrap());
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn hat_bounded_by_mass(k in 0.0f64..50.0, d in 1usize..7) {
        for cf in all_kinds(d) {
            prop_assert!(cf.phi_hat(k).abs() <= cf.q() + 1e-12);
        }
    }
}

#[test]
fn long_range_square_integral_closed_form() {
    // ∫φ² over space for the power-law profile against the transform route.
    for d in 2..=4 {
        let (l, alpha) = (2.0, 0.8);
        let cf = ConnectionFunction::long_range(d, l, alpha).unwrap();
        let v = unit_ball_volume(d);
        let s = d as f64 * v;
        let df = d as f64;
        let exact = (v + s / (df + 2.0 * alpha)) / (v + s / alpha) / l.powi(d as i32);
        let got = cf.conv_at_zero(2).unwrap();
        assert!((got / exact - 1.0).abs() < 1e-8, "d={d}: {got} vs {exact}");
    }
}
