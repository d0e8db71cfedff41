//! Counter-based mark streams.
//!
//! Every random mark the model needs (edge uniforms `U_{i,j}`, thinning
//! uniforms `Y_{i,j}`, ghost uniforms) is a pure function of a key and the
//! stable identifiers involved. Coupled samples therefore agree on shared
//! points no matter in which order the marks are read.

use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const ODD: u64 = 0xD6E8_FEB8_6659_FD93;

const EDGE: u64 = 1;
const THIN: u64 = 2;
const GHOST: u64 = 3;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn hash(key: [u64; 2], domain: u64, a: u64, b: u64) -> u64 {
    let mut h = mix64(key[0] ^ domain.wrapping_mul(GOLDEN));
    h = mix64(h.wrapping_add(a).wrapping_add(key[1]));
    h = mix64(h ^ b.wrapping_mul(ODD));
    mix64(h.wrapping_add(GOLDEN))
}

#[inline]
fn to_unit(h: u64) -> f64 {
    ((h >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Derives a child seed from a master seed and a path of tags.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = mix64(master ^ GOLDEN);
    for &p in path {
        h = mix64(h ^ mix64(p.wrapping_add(ODD)));
    }
    h
}

/// Keyed source of all marks of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marks {
    key: [u64; 2],
}

impl Marks {
    pub fn new(seed: u64) -> Self {
        Marks { key: [mix64(seed), mix64(seed ^ ODD)] }
    }

    /// `U_{a,b}` in `(0,1)`; symmetric in its arguments.
    #[inline]
    pub fn edge(&self, a: u64, b: u64) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        to_unit(hash(self.key, EDGE, lo, hi))
    }

    /// Thinning uniform `Y_{point, j}` in `(0,1)`.
    #[inline]
    pub fn thinning(&self, point: u64, j: u64) -> f64 {
        to_unit(hash(self.key, THIN, point, j))
    }

    /// Uniform deciding the edge between `point` and the ghost vertex.
    #[inline]
    pub fn ghost(&self, point: u64) -> f64 {
        to_unit(hash(self.key, GHOST, point, 0))
    }
}
