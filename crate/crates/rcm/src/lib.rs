//! Simulation and Fourier-space numerics for the Poisson random connection
//! model.

pub mod critical;
pub mod estimators;
pub mod fourier;
pub mod model;
pub mod quadrature;
pub mod radial;
pub mod sampler;
pub mod special;
pub mod stats;
pub mod verify;
