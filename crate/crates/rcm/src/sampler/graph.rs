//! Random connection graphs, materialized or explored lazily.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::geometry::{sample_ppp, BoxSpec, CellIndex, PointSet, INSERTED_BASE};
use super::marks::Marks;
use super::SamplerError;
use crate::model::ConnectionFunction;

/// Non-compact kinds use all pairs up to this many points, and a cutoff
/// radius beyond it.
pub const ALL_PAIRS_LIMIT: usize = 20_000;

/// Relative mass of `φ` ignored when a cutoff radius is used.
pub const TAIL_MASS: f64 = 1e-6;

/// Largest dimension the simulator supports.
pub const MAX_SIM_DIMENSION: usize = 16;

/// Read-only adjacency access shared by the materialized and lazy graphs.
pub trait GraphView {
    fn vertex_count(&self) -> usize;
    fn id(&self, v: usize) -> u64;
    fn pos(&self, v: usize) -> &[f64];
    fn for_each_neighbor(&self, v: usize, f: &mut dyn FnMut(usize));

    /// Whether `v` is within interaction range of a free boundary.
    fn near_boundary(&self, _v: usize) -> bool {
        false
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_neighbor(v, &mut |w| out.push(w));
        out
    }
}

/// How edges were generated, recorded with every realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRule {
    /// Pairs further apart than this are never tested (infinite means all pairs).
    pub cutoff: f64,
    /// Upper bound on the relative mass of `φ` beyond the cutoff.
    pub ignored_mass: f64,
    /// Finite interaction range used for boundary checks: the cutoff, or the
    /// radius holding all but a `TAIL_MASS` fraction of `φ`.
    pub range: f64,
}

/// One Poisson sample with its marks and neighbour index. Deterministic
/// points are attached through [`Realization::view`].
#[derive(Debug, Clone)]
pub struct Realization {
    pub cf: Arc<ConnectionFunction>,
    pub bx: BoxSpec,
    pub lambda: f64,
    pub marks: Marks,
    pub points: PointSet,
    pub rule: EdgeRule,
    index: CellIndex,
}

impl Realization {
    /// Samples the Poisson process and sets up marks derived from `seed`.
    pub fn sample(cf: Arc<ConnectionFunction>, lambda: f64, bx: BoxSpec, seed: u64) -> Result<Self, SamplerError> {
        let points = sample_ppp(lambda, &bx, seed)?;
        Self::from_points(cf, lambda, bx, points, Marks::new(seed))
    }

    pub fn from_points(
        cf: Arc<ConnectionFunction>,
        lambda: f64,
        bx: BoxSpec,
        points: PointSet,
        marks: Marks,
    ) -> Result<Self, SamplerError> {
        for got in [cf.dimension(), points.dimension] {
            if got != bx.dimension {
                return Err(SamplerError::DimensionMismatch { expected: bx.dimension, got });
            }
        }
        if bx.dimension > MAX_SIM_DIMENSION {
            return Err(SamplerError::DimensionTooLarge(bx.dimension));
        }
        let rule = edge_rule(&cf, points.len());
        let index = CellIndex::build(&points, &bx, rule.cutoff);
        Ok(Realization { cf, bx, lambda, marks, points, rule, index })
    }

    /// A graph on the Poisson points plus the given deterministic points,
    /// which become vertices `n, n+1, ...` with ids `INSERTED_BASE + k`.
    pub fn view(&self, inserted: &[&[f64]]) -> World<'_> {
        let mut extra = PointSet::new(self.bx.dimension);
        for (k, x) in inserted.iter().enumerate() {
            extra.push(INSERTED_BASE + k as u64, x);
        }
        World { base: self, extra }
    }

    /// A view with inserted points carrying explicit ids.
    pub fn view_with_ids(&self, extra: PointSet) -> World<'_> {
        World { base: self, extra }
    }
}

/// Edge rule for a connection function on `n` points.
pub fn edge_rule(cf: &ConnectionFunction, n: usize) -> EdgeRule {
    match cf.support_radius() {
        Some(r) => EdgeRule { cutoff: r, ignored_mass: 0.0, range: r },
        None => {
            let range = cf.tail_radius(TAIL_MASS);
            if n <= ALL_PAIRS_LIMIT {
                EdgeRule { cutoff: f64::INFINITY, ignored_mass: 0.0, range }
            } else {
                EdgeRule { cutoff: range, ignored_mass: TAIL_MASS, range }
            }
        }
    }
}

/// Lazily explored graph on a realization plus inserted points.
#[derive(Debug, Clone)]
pub struct World<'a> {
    base: &'a Realization,
    extra: PointSet,
}

impl<'a> World<'a> {
    pub fn base(&self) -> &'a Realization {
        self.base
    }

    pub fn n_poisson(&self) -> usize {
        self.base.points.len()
    }

    /// Vertex index of the `k`-th inserted point.
    pub fn inserted(&self, k: usize) -> usize {
        self.n_poisson() + k
    }

    /// `φ(y - x)` for two positions, respecting the boundary condition.
    #[inline]
    pub fn phi_between(&self, x: &[f64], y: &[f64]) -> f64 {
        phi_between(&self.base.cf, &self.base.bx, self.base.rule.cutoff, x, y)
    }

    /// Whether an edge between `v` and `w` is open.
    #[inline]
    pub fn edge_open(&self, v: usize, w: usize) -> bool {
        let p = self.phi_between(self.pos(v), self.pos(w));
        p > 0.0 && self.base.marks.edge(self.id(v), self.id(w)) < p
    }
}

/// `φ(y - x)` on the given box, zero beyond the cutoff.
#[inline]
pub fn phi_between(cf: &ConnectionFunction, bx: &BoxSpec, cutoff: f64, x: &[f64], y: &[f64]) -> f64 {
    let d = x.len();
    let mut disp = [0.0; MAX_SIM_DIMENSION];
    bx.displacement(x, y, &mut disp[..d]);
    let r2: f64 = disp[..d].iter().map(|v| v * v).sum();
    if r2 > cutoff * cutoff {
        return 0.0;
    }
    if cf.is_rotation_invariant() {
        cf.phi_sq_radius(r2)
    } else {
        cf.phi(&disp[..d])
    }
}

impl GraphView for World<'_> {
    fn vertex_count(&self) -> usize {
        self.base.points.len() + self.extra.len()
    }

    #[inline]
    fn id(&self, v: usize) -> u64 {
        let n = self.base.points.len();
        if v < n {
            self.base.points.ids[v]
        } else {
            self.extra.ids[v - n]
        }
    }

    #[inline]
    fn pos(&self, v: usize) -> &[f64] {
        let n = self.base.points.len();
        if v < n {
            self.base.points.pos(v)
        } else {
            self.extra.pos(v - n)
        }
    }

    fn for_each_neighbor(&self, v: usize, f: &mut dyn FnMut(usize)) {
        let x = self.pos(v);
        let idv = self.id(v);
        let marks = self.base.marks;
        let mut check = |w: usize| {
            if w == v {
                return;
            }
            let p = self.phi_between(x, self.pos(w));
            if p > 0.0 && marks.edge(idv, self.id(w)) < p {
                f(w);
            }
        };
        self.base.index.for_each_candidate(x, &mut check);
        let n = self.base.points.len();
        for j in 0..self.extra.len() {
            check(n + j);
        }
    }

    fn near_boundary(&self, v: usize) -> bool {
        self.base.bx.distance_to_boundary(self.pos(v)) < self.base.rule.range
    }
}

/// A fully materialized realization with adjacency lists.
#[derive(Debug, Clone)]
pub struct RcmGraph {
    pub cf: Arc<ConnectionFunction>,
    pub bx: BoxSpec,
    pub lambda: f64,
    pub marks: Marks,
    pub points: PointSet,
    /// Number of Poisson points; inserted points follow them.
    pub n_poisson: usize,
    pub adjacency: Vec<Vec<u32>>,
    pub rule: EdgeRule,
    pub seed: Option<u64>,
}

impl RcmGraph {
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn is_inserted(&self, v: usize) -> bool {
        v >= self.n_poisson
    }

    /// The subgraph induced on `keep` (sorted, increasing), re-indexed in
    /// that order.
    pub fn induced(&self, keep: &[usize]) -> RcmGraph {
        let mut new_index = vec![u32::MAX; self.points.len()];
        let mut points = PointSet::new(self.bx.dimension);
        for (i, &v) in keep.iter().enumerate() {
            new_index[v] = i as u32;
            points.push(self.points.ids[v], self.points.pos(v));
        }
        let adjacency = keep
            .iter()
            .map(|&v| self.adjacency[v].iter().map(|&w| new_index[w as usize]).filter(|&w| w != u32::MAX).collect())
            .collect();
        RcmGraph {
            cf: self.cf.clone(),
            bx: self.bx,
            lambda: self.lambda,
            marks: self.marks,
            points,
            n_poisson: keep.iter().filter(|&&v| v < self.n_poisson).count(),
            adjacency,
            rule: self.rule,
            seed: self.seed,
        }
    }

    /// Edge list with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, a) in self.adjacency.iter().enumerate() {
            for &j in a {
                if i < j as usize {
                    out.push((i, j as usize));
                }
            }
        }
        out
    }
}

impl GraphView for RcmGraph {
    fn vertex_count(&self) -> usize {
        self.points.len()
    }

    fn id(&self, v: usize) -> u64 {
        self.points.ids[v]
    }

    fn pos(&self, v: usize) -> &[f64] {
        self.points.pos(v)
    }

    fn for_each_neighbor(&self, v: usize, f: &mut dyn FnMut(usize)) {
        for &w in &self.adjacency[v] {
            f(w as usize);
        }
    }

    fn near_boundary(&self, v: usize) -> bool {
        self.bx.distance_to_boundary(self.pos(v)) < self.rule.range
    }
}

fn materialize(world: &World<'_>, seed: Option<u64>) -> RcmGraph {
    let n = world.vertex_count();
    let mut adjacency = vec![Vec::new(); n];
    for v in 0..n {
        let mut nb = Vec::new();
        world.for_each_neighbor(v, &mut |w| nb.push(w as u32));
        nb.sort_unstable();
        adjacency[v] = nb;
    }
    let mut points = world.base.points.clone();
    points.extend(&world.extra);
    RcmGraph {
        cf: world.base.cf.clone(),
        bx: world.base.bx,
        lambda: world.base.lambda,
        marks: world.base.marks,
        points,
        n_poisson: world.n_poisson(),
        adjacency,
        rule: world.base.rule,
        seed,
    }
}

/// Samples a Poisson process and connects each pair `{x, y}` independently
/// with probability `φ(x - y)`.
pub fn build_rcm(cf: Arc<ConnectionFunction>, lambda: f64, bx: BoxSpec, seed: u64) -> Result<RcmGraph, SamplerError> {
    let real = Realization::sample(cf, lambda, bx, seed)?;
    Ok(materialize(&real.view(&[]), Some(seed)))
}

/// Builds the graph on a given point set with the given marks.
pub fn build_rcm_on(
    cf: Arc<ConnectionFunction>,
    lambda: f64,
    bx: BoxSpec,
    points: PointSet,
    marks: Marks,
) -> Result<RcmGraph, SamplerError> {
    let real = Realization::from_points(cf, lambda, bx, points, marks)?;
    Ok(materialize(&real.view(&[]), None))
}

/// Adds deterministic points to a graph. Their marks come from the same
/// stream, keyed by reserved ids in insertion order, so the Poisson part of
/// the graph is untouched.
pub fn insert_points(graph: &RcmGraph, xs: &[&[f64]]) -> Result<RcmGraph, SamplerError> {
    for x in xs {
        if x.len() != graph.bx.dimension {
            return Err(SamplerError::DimensionMismatch { expected: graph.bx.dimension, got: x.len() });
        }
        if !graph.bx.contains(x) {
            return Err(SamplerError::OutsideBox);
        }
    }
    let mut base_points = PointSet::new(graph.bx.dimension);
    let mut extra = PointSet::new(graph.bx.dimension);
    for v in 0..graph.points.len() {
        if v < graph.n_poisson {
            base_points.push(graph.points.ids[v], graph.points.pos(v));
        } else {
            extra.push(graph.points.ids[v], graph.points.pos(v));
        }
    }
    let already = extra.len() as u64;
    for (k, x) in xs.iter().enumerate() {
        extra.push(INSERTED_BASE + already + k as u64, x);
    }
    let real = Realization::from_points(graph.cf.clone(), graph.lambda, graph.bx, base_points, graph.marks)?;
    let world = real.view_with_ids(extra);
    Ok(materialize(&world, graph.seed))
}
