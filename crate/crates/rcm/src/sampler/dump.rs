//! Plain-text dump of a realization, for debugging and for diffing against
//! other implementations.
//!
//! Format, version 1 (one record per line, `#` starts a comment line):
//!
//! ```text
//! rcm-dump 1
//! dimension <d>
//! side <side>
//! boundary torus|free
//! lambda <λ>
//! seed <u64>|none
//! points <n>
//! <id> <x_1> ... <x_d>        (n lines)
//! edges <m>
//! <i> <j>                     (m lines, vertex indices, i < j)
//! ```
//!
//! Floats are written in shortest round-trip form, so parsing a dump gives
//! back bit-identical coordinates.

use std::io::{self, Write};

use super::geometry::{Boundary, PointSet};
use super::graph::RcmGraph;
use super::SamplerError;

pub const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub dimension: usize,
    pub side: f64,
    pub boundary: Boundary,
    pub lambda: f64,
    pub seed: Option<u64>,
    pub points: PointSet,
    pub edges: Vec<(usize, usize)>,
}

impl Dump {
    pub fn from_graph(g: &RcmGraph) -> Self {
        Dump {
            dimension: g.bx.dimension,
            side: g.bx.side,
            boundary: g.bx.boundary,
            lambda: g.lambda,
            seed: g.seed,
            points: g.points.clone(),
            edges: g.edges(),
        }
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "rcm-dump {DUMP_VERSION}")?;
        writeln!(w, "dimension {}", self.dimension)?;
        writeln!(w, "side {:?}", self.side)?;
        let b = match self.boundary {
            Boundary::Torus => "torus",
            Boundary::Free => "free",
        };
        writeln!(w, "boundary {b}")?;
        writeln!(w, "lambda {:?}", self.lambda)?;
        match self.seed {
            Some(s) => writeln!(w, "seed {s}")?,
            None => writeln!(w, "seed none")?,
        }
        writeln!(w, "points {}", self.points.len())?;
        for i in 0..self.points.len() {
            write!(w, "{}", self.points.ids[i])?;
            for v in self.points.pos(i) {
                write!(w, " {v:?}")?;
            }
            writeln!(w)?;
        }
        writeln!(w, "edges {}", self.edges.len())?;
        for (i, j) in &self.edges {
            writeln!(w, "{i} {j}")?;
        }
        Ok(())
    }
}

pub fn write_dump<W: Write>(g: &RcmGraph, w: W) -> io::Result<()> {
    Dump::from_graph(g).write(w)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str, SamplerError> {
        for (i, l) in self.inner.by_ref() {
            let l = l.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            self.line = i + 1;
            return Ok(l);
        }
        Err(SamplerError::Dump { line: self.line + 1, message: "unexpected end of input".into() })
    }

    fn err(&self, message: impl Into<String>) -> SamplerError {
        SamplerError::Dump { line: self.line, message: message.into() }
    }

    fn field(&mut self, key: &str) -> Result<&'a str, SamplerError> {
        let l = self.next()?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim()),
            _ => Err(self.err(format!("expected `{key} <value>`"))),
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, SamplerError> {
        let v = self.field(key)?;
        v.parse().map_err(|_| self.err(format!("bad value for {key}: {v}")))
    }
}

pub fn parse_dump(text: &str) -> Result<Dump, SamplerError> {
    let mut it = Lines { inner: text.lines().enumerate(), line: 0 };
    let version: u32 = it.parsed("rcm-dump")?;
    if version != DUMP_VERSION {
        return Err(it.err(format!("unsupported version {version}")));
    }
    let dimension: usize = it.parsed("dimension")?;
    let side: f64 = it.parsed("side")?;
    let boundary = match it.field("boundary")? {
        "torus" => Boundary::Torus,
        "free" => Boundary::Free,
        other => return Err(it.err(format!("unknown boundary {other}"))),
    };
    let lambda: f64 = it.parsed("lambda")?;
    let seed = match it.field("seed")? {
        "none" => None,
        s => Some(s.parse().map_err(|_| it.err("bad seed"))?),
    };
    let n: usize = it.parsed("points")?;
    let mut points = PointSet::new(dimension);
    let mut x = vec![0.0; dimension];
    for _ in 0..n {
        let l = it.next()?;
        let mut parts = l.split_whitespace();
        let id: u64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| it.err("bad point id"))?;
        for v in x.iter_mut() {
            *v = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| it.err("bad coordinate"))?;
        }
        if parts.next().is_some() {
            return Err(it.err("too many coordinates"));
        }
        points.push(id, &x);
    }
    let m: usize = it.parsed("edges")?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let l = it.next()?;
        let (a, b) = l.split_once(' ').ok_or_else(|| it.err("expected `i j`"))?;
        let i: usize = a.trim().parse().map_err(|_| it.err("bad edge"))?;
        let j: usize = b.trim().parse().map_err(|_| it.err("bad edge"))?;
        if i >= n || j >= n || i == j {
            return Err(it.err("edge endpoints out of range"));
        }
        edges.push((i.min(j), i.max(j)));
    }
    Ok(Dump { dimension, side, boundary, lambda, seed, points, edges })
}
