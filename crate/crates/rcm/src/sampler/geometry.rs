//! Observation windows, Poisson point sets and a cell-list neighbour index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::marks::derive_seed;
use super::SamplerError;

/// Largest Poisson count accepted in one window.
pub const MAX_POINTS: usize = 50_000_000;

/// First id handed to deterministically inserted points.
pub const INSERTED_BASE: u64 = 0xFFFF_0000_0000_0000;

/// Ids of coupled layers are `layer << LAYER_SHIFT | rank`.
pub const LAYER_SHIFT: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Boundary {
    /// Periodic box; displacements use the minimum image.
    #[default]
    Torus,
    /// Plain box; nothing outside is simulated.
    Free,
}

/// The centred box `[-side/2, side/2)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub side: f64,
    pub dimension: usize,
    pub boundary: Boundary,
}

impl BoxSpec {
    pub fn new(side: f64, dimension: usize, boundary: Boundary) -> Self {
        BoxSpec { side, dimension, boundary }
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dimension as i32)
    }

    /// Displacement `b - a`, minimum image on the torus.
    #[inline]
    pub fn displacement(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        match self.boundary {
            Boundary::Torus => {
                let s = self.side;
                for i in 0..a.len() {
                    let mut v = b[i] - a[i];
                    v -= s * (v / s).round();
                    out[i] = v;
                }
            }
            Boundary::Free => {
                for i in 0..a.len() {
                    out[i] = b[i] - a[i];
                }
            }
        }
    }

    #[inline]
    pub fn dist2(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s2 = 0.0;
        for i in 0..a.len() {
            let mut v = b[i] - a[i];
            if self.boundary == Boundary::Torus {
                v -= self.side * (v / self.side).round();
            }
            s2 += v * v;
        }
        s2
    }

    /// Distance from `x` to the boundary of the box (infinite on the torus).
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        match self.boundary {
            Boundary::Torus => f64::INFINITY,
            Boundary::Free => x.iter().map(|v| 0.5 * self.side - v.abs()).fold(f64::INFINITY, f64::min),
        }
    }

    /// Maps a position into the canonical window.
    pub fn wrap(&self, x: &mut [f64]) {
        if self.boundary == Boundary::Torus {
            let s = self.side;
            for v in x.iter_mut() {
                *v -= s * ((*v + 0.5 * s) / s).floor();
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| *v >= -0.5 * self.side && *v < 0.5 * self.side)
    }
}

/// Points with stable identifiers, stored as a flat coordinate array.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointSet {
    pub dimension: usize,
    pub coords: Vec<f64>,
    pub ids: Vec<u64>,
}

impl PointSet {
    pub fn new(dimension: usize) -> Self {
        PointSet { dimension, coords: Vec::new(), ids: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn pos(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn push(&mut self, id: u64, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dimension);
        self.ids.push(id);
        self.coords.extend_from_slice(x);
    }

    pub fn extend(&mut self, other: &PointSet) {
        self.ids.extend_from_slice(&other.ids);
        self.coords.extend_from_slice(&other.coords);
    }
}

/// Draws a homogeneous Poisson process of intensity `lambda` in the box.
///
/// Ids are the lexicographic rank of the points, so they depend only on the
/// configuration.
pub fn sample_ppp(lambda: f64, bx: &BoxSpec, seed: u64) -> Result<PointSet, SamplerError> {
    sample_layer(lambda, bx, seed, 0)
}

fn sample_layer(lambda: f64, bx: &BoxSpec, seed: u64, layer: u64) -> Result<PointSet, SamplerError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(SamplerError::InvalidIntensity(lambda));
    }
    let mean = lambda * bx.volume();
    if mean > MAX_POINTS as f64 {
        return Err(SamplerError::TooManyPoints { expected: mean, cap: MAX_POINTS });
    }
    let d = bx.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x505050, layer]));
    let n = if mean > 0.0 { Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize } else { 0 };
    if n > MAX_POINTS {
        return Err(SamplerError::TooManyPoints { expected: n as f64, cap: MAX_POINTS });
    }
    let half = 0.5 * bx.side;
    let mut raw: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-half..half)).collect();
    // Sort by lexicographic order of coordinates.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        raw[a * d..(a + 1) * d].partial_cmp(&raw[b * d..(b + 1) * d]).unwrap()
    });
    let mut coords = Vec::with_capacity(n * d);
    for &i in &order {
        coords.extend_from_slice(&raw[i * d..(i + 1) * d]);
    }
    raw.clear();
    let ids = (0..n as u64).map(|r| (layer << LAYER_SHIFT) | r).collect();
    Ok(PointSet { dimension: d, coords, ids })
}

/// Independent layers whose superposition gives coupled processes at
/// increasing intensities: the process at `lambdas[j]` is the union of the
/// first `j + 1` layers. `lambdas` must be increasing.
#[derive(Debug, Clone)]
pub struct CoupledPpp {
    pub lambdas: Vec<f64>,
    layers: Vec<PointSet>,
}

impl CoupledPpp {
    pub fn sample(lambdas: &[f64], bx: &BoxSpec, seed: u64) -> Result<Self, SamplerError> {
        let mut layers = Vec::with_capacity(lambdas.len());
        let mut prev = 0.0;
        for (j, &l) in lambdas.iter().enumerate() {
            if l < prev {
                return Err(SamplerError::InvalidIntensity(l));
            }
            layers.push(sample_layer(l - prev, bx, seed, j as u64 + 1)?);
            prev = l;
        }
        Ok(CoupledPpp { lambdas: lambdas.to_vec(), layers })
    }

    /// The process at intensity `lambdas[j]`.
    pub fn at(&self, j: usize) -> PointSet {
        let mut out = PointSet::new(self.layers[0].dimension);
        for layer in &self.layers[..=j] {
            out.extend(layer);
        }
        out
    }
}

/// Uniform cell list for range queries.
#[derive(Debug, Clone)]
pub struct CellIndex {
    bx: BoxSpec,
    cells_per_axis: usize,
    cell_len: f64,
    start: Vec<u32>,
    items: Vec<u32>,
    brute: bool,
    n: usize,
    offsets: Vec<Vec<i64>>,
}

impl CellIndex {
    /// Builds an index answering queries for all points within `range`.
    /// An infinite range degrades to returning every point.
    pub fn build(points: &PointSet, bx: &BoxSpec, range: f64) -> Self {
        let d = bx.dimension;
        let m = if range.is_finite() && range > 0.0 { (bx.side / range).floor() as usize } else { 1 };
        let total_cells = (m as f64).powi(d as i32);
        let brute = m < 3 || total_cells > 4.0 * points.len().max(1) as f64 + 1e6;
        let m = if brute { 1 } else { m };
        let ncell = if brute { 1 } else { m.pow(d as u32) };
        let cell_len = bx.side / m as f64;
        let mut counts = vec![0u32; ncell + 1];
        let mut cell_of = Vec::with_capacity(points.len());
        for i in 0..points.len() {
            let c = if brute { 0 } else { Self::cell_of(bx, m, cell_len, points.pos(i)) };
            cell_of.push(c);
            counts[c + 1] += 1;
        }
        for c in 0..ncell {
            counts[c + 1] += counts[c];
        }
        let start = counts.clone();
        let mut fill = counts;
        let mut items = vec![0u32; points.len()];
        for (i, &c) in cell_of.iter().enumerate() {
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        let offsets = if brute {
            Vec::new()
        } else {
            let mut offs = vec![Vec::new()];
            for _ in 0..d {
                let mut next = Vec::new();
                for o in &offs {
                    for delta in -1..=1i64 {
                        let mut v = o.clone();
                        v.push(delta);
                        next.push(v);
                    }
                }
                offs = next;
            }
            offs
        };
        CellIndex { bx: *bx, cells_per_axis: m, cell_len, start, items, brute, n: points.len(), offsets }
    }

    fn cell_of(bx: &BoxSpec, m: usize, cell_len: f64, x: &[f64]) -> usize {
        let mut c = 0usize;
        for &v in x {
            let k = (((v + 0.5 * bx.side) / cell_len).floor() as i64).clamp(0, m as i64 - 1) as usize;
            c = c * m + k;
        }
        c
    }

    /// Calls `f(i)` for every indexed point that may lie within range of `x`
    /// (a superset; callers still test the distance).
    pub fn for_each_candidate<F: FnMut(usize)>(&self, x: &[f64], mut f: F) {
        if self.brute {
            for i in 0..self.n {
                f(i);
            }
            return;
        }
        let m = self.cells_per_axis as i64;
        let d = x.len();
        let mut base = [0i64; 16];
        let mut big = Vec::new();
        let base: &mut [i64] = if d <= 16 {
            &mut base[..d]
        } else {
            big.resize(d, 0);
            &mut big[..]
        };
        let wrap = self.bx.boundary == Boundary::Torus;
        let mut x = x.to_vec();
        self.bx.wrap(&mut x);
        for (a, &v) in x.iter().enumerate() {
            base[a] = (((v + 0.5 * self.bx.side) / self.cell_len).floor() as i64).clamp(0, m - 1);
        }
        'outer: for off in &self.offsets {
            let mut c = 0usize;
            for a in 0..d {
                let mut k = base[a] + off[a];
                if k < 0 || k >= m {
                    if !wrap {
                        continue 'outer;
                    }
                    k = k.rem_euclid(m);
                }
                c = c * m as usize + k as usize;
            }
            let (s, e) = (self.start[c] as usize, self.start[c + 1] as usize);
            for &i in &self.items[s..e] {
                f(i as usize);
            }
        }
    }
}
