//! Special functions used by the Fourier side of the model.
//!
//! Only Bessel functions of integer or half-integer order are needed, since
//! every order that appears is `d/2 - 1` or `d/2` for an integer dimension.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

/// Below this argument (or below the order) the power series is used.
const SERIES_LIMIT: f64 = 12.0;

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    (h * PI.ln() - ln_gamma(h + 1.0)).exp()
}

/// Surface area of the unit sphere in `d` dimensions, i.e. `d * b_d`.
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

/// Bessel function of the first kind `J_nu(z)` for `z >= 0`.
///
/// `nu` must be a non-negative integer or a half-integer `>= -1/2`.
pub fn bessel_j(nu: f64, z: f64) -> f64 {
    assert!(z >= 0.0, "bessel_j requires z >= 0");
    let twice = (2.0 * nu).round();
    assert!(
        (2.0 * nu - twice).abs() < 1e-12 && twice >= -1.0,
        "bessel_j supports integer and half-integer orders only"
    );
    if z == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if z <= SERIES_LIMIT.max(nu) {
        return bessel_series(nu, z);
    }
    // ν < z from here on, so upward recurrence is stable.
    let half = (twice as i64) % 2 != 0;
    let (mut lo, mut hi, mut order) = if half {
        let s = (2.0 / (PI * z)).sqrt();
        let jm = s * z.cos();
        let jp = s * z.sin();
        (jm, jp, 0.5)
    } else {
        let (j0, j1) = hankel_j01(z);
        (j0, j1, 1.0)
    };
    if nu < order {
        return lo;
    }
    while order < nu - 1e-9 {
        let next = 2.0 * order / z * hi - lo;
        lo = hi;
        hi = next;
        order += 1.0;
    }
    hi
}

fn bessel_series(nu: f64, z: f64) -> f64 {
    let x = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..400 {
        let m = m as f64;
        term *= -x / (m * (m + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    let log_pref = nu * (0.5 * z).ln() - ln_gamma(nu + 1.0);
    sum * log_pref.exp()
}

/// Hankel asymptotic expansion for `J_0` and `J_1`, accurate for `z > 12`.
fn hankel_j01(z: f64) -> (f64, f64) {
    let pq = |mu: f64| {
        let mut p = 1.0;
        let mut q = 0.0;
        let mut term = 1.0;
        let eight_z = 8.0 * z;
        let mut k = 1.0_f64;
        let mut prev = f64::INFINITY;
        loop {
            let odd = 2.0 * k - 1.0;
            term *= (mu - odd * odd) / (k * eight_z);
            if term.abs() > prev || k > 60.0 {
                break;
            }
            prev = term.abs();
            if (k as i64) % 2 == 1 {
                let sign = if ((k as i64 - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                q += sign * term;
            } else {
                let sign = if ((k as i64) / 2) % 2 == 1 { -1.0 } else { 1.0 };
                p += sign * term;
            }
            if term.abs() < 1e-17 {
                break;
            }
            k += 1.0;
        }
        (p, q)
    };
    let s = (2.0 / (PI * z)).sqrt();
    let (p0, q0) = pq(0.0);
    let w0 = z - 0.25 * PI;
    let j0 = s * (p0 * w0.cos() - q0 * w0.sin());
    let (p1, q1) = pq(4.0);
    let w1 = z - 0.75 * PI;
    let j1 = s * (p1 * w1.cos() - q1 * w1.sin());
    (j0, j1)
}

/// Angular average `Omega_d(z) = Γ(d/2) (2/z)^{d/2-1} J_{d/2-1}(z)`.
///
/// This is the Fourier transform of the uniform measure on the unit sphere,
/// so `Omega_d(0) = 1` and `Omega_1(z) = cos z`.
pub fn omega(d: usize, z: f64) -> f64 {
    let z = z.abs();
    if d == 1 {
        return z.cos();
    }
    let nu = d as f64 / 2.0 - 1.0;
    if z <= SERIES_LIMIT.max(nu) {
        return 1.0 - omega_deficit_series(nu, z);
    }
    let log_pref = ln_gamma(nu + 1.0) + nu * (2.0 / z).ln();
    log_pref.exp() * bessel_j(nu, z)
}

/// `1 - Omega_d(z)`, accurate for small `z`.
pub fn omega_deficit(d: usize, z: f64) -> f64 {
    let z = z.abs();
    let nu = d as f64 / 2.0 - 1.0;
    if z <= SERIES_LIMIT.max(nu) {
        omega_deficit_series(nu, z)
    } else {
        1.0 - omega(d, z)
    }
}

fn omega_deficit_series(nu: f64, z: f64) -> f64 {
    let x = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 0.0;
    for m in 1..400 {
        let m = m as f64;
        term *= -x / (m * (m + nu));
        sum -= term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Fourier transform of the indicator of a ball of radius `r` in `d`
/// dimensions: `b_d r^d Omega_{d+2}(k r)`.
pub fn ball_transform(d: usize, r: f64, k: f64) -> f64 {
    unit_ball_volume(d) * r.powi(d as i32) * omega(d + 2, k * r)
}

/// `Γ(x)` re-exported so callers do not depend on the backing crate.
pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_values() {
        // Reference values from standard tables.
        assert!((bessel_j(0.0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-13);
        assert!((bessel_j(1.0, 2.5) - 0.497_094_102_464_274).abs() < 1e-12);
        assert!((bessel_j(0.0, 20.0) - 0.167_024_664_340_583_2).abs() < 1e-11);
        assert!((bessel_j(1.0, 30.0) - (-0.118_751_062_616_623_8)).abs() < 1e-11);
        assert!((bessel_j(3.0, 15.0) + 0.194_018_257_820_122_66).abs() < 1e-11);
    }

    #[test]
    fn half_integer_orders_are_elementary() {
        for &z in &[0.3, 2.0, 11.9, 12.1, 40.0] {
            let s = (2.0 / (PI * z)).sqrt();
            assert!((bessel_j(0.5, z) - s * z.sin()).abs() < 1e-12);
            let j32 = s * (z.sin() / z - z.cos());
            assert!((bessel_j(1.5, z) - j32).abs() < 1e-12);
        }
    }

    #[test]
    fn series_and_recurrence_agree_at_switch() {
        for nu in [0.0, 1.0, 2.5, 4.0, 6.5] {
            let a = bessel_series(nu, 12.0 + 1e-9);
            let b = bessel_j(nu, 12.0 + 1e-9);
            assert!((a - b).abs() < 1e-10, "nu={nu}: {a} vs {b}");
        }
    }

    #[test]
    fn omega_limits() {
        assert_eq!(omega(3, 0.0), 1.0);
        // Omega_3(z) = sin z / z.
        for &z in &[0.1, 1.0, 5.0, 13.0, 50.0] {
            assert!((omega(3, z) - z.sin() / z).abs() < 1e-12);
        }
        assert!((omega_deficit(3, 1e-4) - (1e-8 / 6.0 - 1e-16 / 120.0)).abs() < 1e-22);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    }
}
