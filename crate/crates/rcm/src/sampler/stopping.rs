//! The cluster of an inserted origin and what is left outside it.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::algorithms::{collect_points, explore_cluster, thinning_survival_probability, Caps};
use super::geometry::{sample_ppp, BoxSpec, PointSet};
use super::graph::{build_rcm, insert_points, GraphView, RcmGraph};
use super::marks::derive_seed;
use super::SamplerError;
use crate::model::ConnectionFunction;

#[derive(Debug, Clone)]
pub struct StoppingSetSample {
    /// The cluster `A` of the origin, origin included (first).
    pub cluster: PointSet,
    /// The graph induced on the Poisson points outside `A`.
    pub remainder: RcmGraph,
    /// Cluster came within interaction range of a free boundary.
    pub touched_boundary: bool,
    /// Exploration hit a cap.
    pub censored: bool,
}

/// Samples a graph with the origin inserted, explores the origin's cluster
/// and returns it together with the graph on the remaining points.
///
/// Given the cluster `A`, the remainder is distributed as a random
/// connection graph on a Poisson process thinned by `φ̄(A, ·)`.
pub fn stopping_set_sample(
    lambda: f64,
    cf: Arc<ConnectionFunction>,
    bx: BoxSpec,
    seed: u64,
    caps: Caps,
) -> Result<StoppingSetSample, SamplerError> {
    let origin = vec![0.0; bx.dimension];
    let base = build_rcm(cf, lambda, bx, seed)?;
    let g = insert_points(&base, &[&origin])?;
    let o = g.n_poisson;
    let c = explore_cluster(&g, o, None, caps);
    let cluster = collect_points(&g, &c.members);
    let mut in_cluster = vec![false; g.vertex_count()];
    for &v in &c.members {
        in_cluster[v] = true;
    }
    let keep: Vec<usize> = (0..g.n_poisson).filter(|&v| !in_cluster[v]).collect();
    Ok(StoppingSetSample {
        cluster,
        remainder: g.induced(&keep),
        touched_boundary: c.touched_boundary,
        censored: c.censored,
    })
}

/// A Poisson process in which each point `x` is kept independently with
/// probability `φ̄(A, x)`, drawn from streams independent of any graph.
pub fn sample_thinned_ppp(
    lambda: f64,
    cf: &ConnectionFunction,
    bx: &BoxSpec,
    a: &PointSet,
    seed: u64,
) -> Result<PointSet, SamplerError> {
    let p = sample_ppp(lambda, bx, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x7417]));
    let mut out = PointSet::new(bx.dimension);
    for i in 0..p.len() {
        let x = p.pos(i);
        if rng.gen::<f64>() < thinning_survival_probability(cf, bx, a, x) {
            out.push(p.ids[i], x);
        }
    }
    Ok(out)
}
