//! Meeting-rate geometries.
//!
//! A geometry is a finite set of agents `0..n` together with a symmetric
//! matrix of pairwise meeting rates, stored sparsely as an undirected
//! weighted graph. Every process in this crate is driven by such a geometry:
//! agents `i` and `j` meet at the times of a Poisson process of rate
//! `nu_ij`. Geometries must be connected so that information can spread
//! between any two agents.

mod bottleneck;
mod builders;

pub use bottleneck::{bottleneck, cut_profile, kappa, BottleneckReport, MAX_EXHAUSTIVE_AGENTS};
pub use builders::{
    build_complete, build_config_model, build_hamming, build_long_range_torus, build_path,
    build_small_world, build_star, build_torus, build_two_scale_torus,
};

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One undirected edge `{a, b}` (with `a < b`) meeting at rate `rate`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub rate: f64,
}

/// A connected, symmetric meeting-rate structure on agents `0..n`.
///
/// Construction validates the invariants once; afterwards the structure is
/// immutable, so downstream code can rely on sorted edges, strictly positive
/// rates, and connectivity without re-checking.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    n: usize,
    label: String,
    edges: Vec<Edge>,
    /// `adjacency[i]` lists `(neighbor, rate)` pairs sorted by neighbor.
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl Geometry {
    /// Builds a geometry from an edge list, validating all invariants:
    /// at least two agents, endpoints in range and distinct, rates strictly
    /// positive and finite, no duplicate pairs, and a connected graph.
    pub fn new(n: usize, label: impl Into<String>, mut edges: Vec<Edge>) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!(
                "geometry needs at least 2 agents, got {n}"
            )));
        }
        for e in &mut edges {
            if e.a == e.b {
                return Err(Error::invalid(format!("self-loop on agent {}", e.a)));
            }
            if e.a >= n || e.b >= n {
                return Err(Error::invalid(format!(
                    "edge ({}, {}) out of range for n = {n}",
                    e.a, e.b
                )));
            }
            if !(e.rate > 0.0) || !e.rate.is_finite() {
                return Err(Error::invalid(format!(
                    "edge ({}, {}) has non-positive or non-finite rate {}",
                    e.a, e.b, e.rate
                )));
            }
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
            }
        }
        edges.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
        if let Some(w) = edges.windows(2).find(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b)) {
            return Err(Error::invalid(format!(
                "duplicate edge ({}, {})",
                w[0].a, w[0].b
            )));
        }

        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            adjacency[e.a].push((e.b, e.rate));
            adjacency[e.b].push((e.a, e.rate));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_by_key(|&(j, _)| j);
        }

        let g = Geometry {
            n,
            label: label.into(),
            edges,
            adjacency,
        };
        if !g.is_connected() {
            return Err(Error::invalid(format!(
                "geometry '{}' is not irreducible: meeting graph is disconnected",
                g.label
            )));
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `i` with their rates, sorted by neighbor index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    /// Meeting rate `nu_ij` (0 when the pair never meets).
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.adjacency[i]
            .binary_search_by_key(&j, |&(v, _)| v)
            .map(|k| self.adjacency[i][k].1)
            .unwrap_or(0.0)
    }

    /// Row sum `sum_j nu_ij` for agent `i`.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.adjacency[i].iter().map(|&(_, r)| r).sum()
    }

    /// Sum of all edge rates; the aggregate meeting rate is twice per
    /// unordered pair, so the total event rate of the process is this value.
    pub fn total_rate(&self) -> f64 {
        self.edges.iter().map(|e| e.rate).sum()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == self.n
    }

    /// Returns a copy with every rate multiplied by `factor` (a global time
    /// rescale). The label is preserved.
    pub fn scaled(&self, factor: f64) -> Result<Geometry> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::invalid(format!("scale factor must be positive, got {factor}")));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                rate: e.rate * factor,
                ..*e
            })
            .collect();
        Geometry::new(self.n, self.label.clone(), edges)
    }

    /// Serializes to the canonical JSON document (sorted edge triples).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GeometryFile::from(self)).expect("geometry serialization")
    }

    /// Parses a geometry from its JSON document, re-validating all
    /// invariants.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GeometryFile =
            serde_json::from_str(text).map_err(|e| Error::malformed(format!("geometry JSON: {e}")))?;
        file.into_geometry()
    }

    pub fn write_json_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

/// Rescales time by a single global constant so that the maximum row sum
/// equals 1, and returns the rescaled geometry together with the factor that
/// was applied to every rate.
///
/// When all row sums are already equal (vertex-transitive geometries) the
/// result has every row sum equal to 1.
pub fn standardize(g: &Geometry) -> Result<(Geometry, f64)> {
    let max_row = (0..g.n()).map(|i| g.row_sum(i)).fold(f64::MIN, f64::max);
    let factor = 1.0 / max_row;
    Ok((g.scaled(factor)?, factor))
}

/// On-disk representation: `{ "n": .., "label": .., "edges": [[i, j, rate], ..] }`.
#[derive(Serialize, Deserialize)]
struct GeometryFile {
    n: usize,
    label: String,
    edges: Vec<(usize, usize, f64)>,
}

impl From<&Geometry> for GeometryFile {
    fn from(g: &Geometry) -> Self {
        GeometryFile {
            n: g.n,
            label: g.label.clone(),
            edges: g.edges.iter().map(|e| (e.a, e.b, e.rate)).collect(),
        }
    }
}

impl GeometryFile {
    fn into_geometry(self) -> Result<Geometry> {
        let edges = self
            .edges
            .into_iter()
            .map(|(a, b, rate)| Edge { a, b, rate })
            .collect();
        Geometry::new(self.n, self.label, edges)
    }
}
