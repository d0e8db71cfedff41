//! Poisson samples, random connection graphs and graph queries.
//!
//! All randomness of a realization flows from one seed. Point positions come
//! from a seeded stream; edge, thinning and ghost marks are keyed by stable
//! point ids (see [`marks`]), so adding points never changes the marks of
//! existing ones.

pub mod algorithms;
pub mod dump;
pub mod geometry;
pub mod graph;
pub mod marks;
pub mod stopping;

use thiserror::Error;

pub use algorithms::{
    a_thinning, collect_points, connected, disjoint_connections, double_connected, explore_cluster, pivotal_points,
    survives_thinning, thinning_survival_probability, Caps, Cluster, Pivotal,
};
pub use dump::{parse_dump, write_dump, Dump};
pub use geometry::{sample_ppp, Boundary, BoxSpec, CoupledPpp, PointSet, INSERTED_BASE, MAX_POINTS};
pub use graph::{
    build_rcm, build_rcm_on, edge_rule, insert_points, phi_between, EdgeRule, GraphView, RcmGraph, Realization, World,
};
pub use marks::{derive_seed, Marks};
pub use stopping::{sample_thinned_ppp, stopping_set_sample, StoppingSetSample};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("intensity must be finite and non-negative, got {0}")]
    InvalidIntensity(f64),
    #[error("expected {expected} points, above the cap of {cap}")]
    TooManyPoints { expected: f64, cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {0} is above the supported maximum")]
    DimensionTooLarge(usize),
    #[error("vertex {index} out of range for a graph with {count} vertices")]
    VertexOutOfRange { index: usize, count: usize },
    #[error("point lies outside the box")]
    OutsideBox,
    #[error("malformed dump at line {line}: {message}")]
    Dump { line: usize, message: String },
}
