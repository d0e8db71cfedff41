//! Small statistical helpers shared by estimators and tests.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Running mean and variance (Welford), mergeable across threads.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Running {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Running {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Running) -> Running {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * self.n as f64 * other.n as f64 / n as f64;
        Running { n, mean, m2 }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn se(&self) -> f64 {
        if self.n < 2 {
            f64::INFINITY
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Running {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut r = Running::default();
        for x in iter {
            r.push(x);
        }
        r
    }
}

/// Running mean vector and covariance matrix, mergeable like [`Running`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MultiRunning {
    pub n: u64,
    pub mean: Vec<f64>,
    /// Row-major sum of centred outer products.
    comoment: Vec<f64>,
}

impl MultiRunning {
    pub fn new(dim: usize) -> Self {
        MultiRunning { n: 0, mean: vec![0.0; dim], comoment: vec![0.0; dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn push(&mut self, x: &[f64]) {
        let m = self.dim();
        assert_eq!(x.len(), m);
        self.n += 1;
        let inv = 1.0 / self.n as f64;
        let before: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        for (mu, dx) in self.mean.iter_mut().zip(&before) {
            *mu += dx * inv;
        }
        for i in 0..m {
            let after_i = x[i] - self.mean[i];
            for j in 0..m {
                self.comoment[i * m + j] += before[j] * after_i;
            }
        }
    }

    pub fn merge(&self, other: &MultiRunning) -> MultiRunning {
        if self.n == 0 {
            return other.clone();
        }
        if other.n == 0 {
            return self.clone();
        }
        let m = self.dim();
        let n = self.n + other.n;
        let (na, nb) = (self.n as f64, other.n as f64);
        let delta: Vec<f64> = other.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        let mean = self.mean.iter().zip(&delta).map(|(a, d)| a + d * nb / n as f64).collect();
        let mut comoment = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                comoment[i * m + j] = self.comoment[i * m + j]
                    + other.comoment[i * m + j]
                    + delta[i] * delta[j] * na * nb / n as f64;
            }
        }
        MultiRunning { n, mean, comoment }
    }

    /// Unbiased sample covariance of components `i` and `j`.
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.comoment[i * self.dim() + j] / (self.n - 1) as f64
        }
    }

    /// Standard error of the component means.
    pub fn se(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.linear_se(&unit(self.dim(), i))).collect()
    }

    /// Mean of `Σ w_i x_i`.
    pub fn linear(&self, w: &[f64]) -> f64 {
        w.iter().zip(&self.mean).map(|(a, b)| a * b).sum()
    }

    /// Standard error of the mean of `Σ w_i x_i`.
    pub fn linear_se(&self, w: &[f64]) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        let m = self.dim();
        let mut v = 0.0;
        for i in 0..m {
            if w[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                v += w[i] * w[j] * self.comoment[i * m + j];
            }
        }
        (v.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

fn unit(m: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    e[i] = 1.0;
    e
}

pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let r: Running = xs.iter().copied().collect();
    (r.mean, r.se())
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_q(x: f64) -> f64 {
    if x < 1e-3 {
        return 1.0;
    }
    if x < 1.18 {
        // Small-x form converges faster here.
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * x * x)).exp();
        let s: f64 = (0..6).map(|j| y.powi((2 * j + 1) * (2 * j + 1))).sum();
        let p = (2.0 * std::f64::consts::PI).sqrt() / x * s;
        return (1.0 - p).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let t = 2.0 * (-1f64).powi(j - 1) * (-2.0 * (j * j) as f64 * x * x).exp();
        s += t;
        if t.abs() < 1e-16 {
            break;
        }
    }
    s.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic null law (and the
/// usual small-sample correction). With ties the p-value is conservative.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    assert!(!a.is_empty() && !b.is_empty());
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let s = ne.sqrt();
    KsResult { statistic: d, p_value: kolmogorov_q((s + 0.12 + 0.11 / s) * d) }
}

/// Empirical quantile with linear interpolation, `p` in `[0, 1]`.
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    assert!(!xs.is_empty());
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Percentile bootstrap interval of `stat` over resampled blocks.
pub fn bootstrap_ci<T, R, F>(blocks: &[T], resamples: usize, level: f64, rng: &mut R, mut stat: F) -> (f64, f64)
where
    T: Clone,
    R: Rng + ?Sized,
    F: FnMut(&[T]) -> f64,
{
    assert!(!blocks.is_empty());
    let mut values = Vec::with_capacity(resamples);
    let mut sample = Vec::with_capacity(blocks.len());
    for _ in 0..resamples {
        sample.clear();
        for _ in 0..blocks.len() {
            sample.push(blocks[rng.gen_range(0..blocks.len())].clone());
        }
        let v = stat(&sample);
        if v.is_finite() {
            values.push(v);
        }
    }
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let a = 0.5 * (1.0 - level);
    (quantile(&values, a), quantile(&values, 1.0 - a))
}

/// Weighted least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub var_intercept: f64,
    pub var_slope: f64,
    pub cov: f64,
}

impl LineFit {
    /// Root `x` of the line and its delta-method standard error.
    pub fn root(&self) -> (f64, f64) {
        let x = -self.intercept / self.slope;
        let gi = -1.0 / self.slope;
        let gs = self.intercept / (self.slope * self.slope);
        let var = gi * gi * self.var_intercept + gs * gs * self.var_slope + 2.0 * gi * gs * self.cov;
        (x, var.max(0.0).sqrt())
    }

    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Fits a line with weights `1/σ²`; `sigma = None` means equal weights with
/// the residual variance used for the parameter covariance.
pub fn line_fit(x: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let w: Vec<f64> = match sigma {
        Some(s) => s.iter().map(|v| 1.0 / (v * v).max(1e-300)).collect(),
        None => vec![1.0; n],
    };
    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = (0..n).map(|i| w[i] * x[i] * y[i]).sum();
    let det = sw * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return None;
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let scale = if sigma.is_some() {
        1.0
    } else if n > 2 {
        (0..n).map(|i| (y[i] - intercept - slope * x[i]).powi(2)).sum::<f64>() / (n - 2) as f64
    } else {
        0.0
    };
    Some(LineFit {
        intercept,
        slope,
        var_intercept: scale * sxx / det,
        var_slope: scale * sw / det,
        cov: -scale * sx / det,
    })
}
