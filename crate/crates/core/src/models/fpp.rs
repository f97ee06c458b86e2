//! First-passage percolation over a geometry.
//!
//! Each edge `{i, j}` receives an independent Exponential(`nu_ij`) length
//! (the law of the pair's first meeting time); percolation distances are
//! shortest-path distances in these lengths. The marginal law of a pair
//! distance coincides with the pandemic infection time of that pair, while
//! the joint laws differ — the classical distinction probed by the test
//! suites.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use rand::prelude::*;

use crate::geometry::Geometry;
use crate::meetings::StreamKey;

/// All-pairs percolation distances for one sampled set of edge lengths.
pub fn fpp_distances(g: &Geometry, key: StreamKey) -> DMatrix<f64> {
    fpp_with_max_edge(g, key).0
}

/// All-pairs percolation distances together with, for each pair, the
/// largest single edge length on the geodesic realizing the distance.
pub fn fpp_with_max_edge(g: &Geometry, key: StreamKey) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = g.n();
    // Edge lengths drawn in edge order from the meeting lane of the key.
    let mut rng = key.meeting_rng();
    let lengths: Vec<f64> = g
        .edges()
        .iter()
        .map(|e| {
            let u: f64 = rng.random();
            -(1.0 - u).ln() / e.rate
        })
        .collect();
    // Adjacency with sampled lengths.
    let mut adj = vec![Vec::new(); n];
    for (e, &len) in g.edges().iter().zip(&lengths) {
        adj[e.a].push((e.b, len));
        adj[e.b].push((e.a, len));
    }

    let mut dist = DMatrix::from_element(n, n, f64::INFINITY);
    let mut max_edge = DMatrix::zeros(n, n);
    let mut heap: BinaryHeap<Reverse<(OrderedF64, usize)>> = BinaryHeap::new();
    for source in 0..n {
        // Dijkstra with max-edge tracking along the shortest-path tree.
        let mut d = vec![f64::INFINITY; n];
        let mut m = vec![0.0f64; n];
        let mut done = vec![false; n];
        d[source] = 0.0;
        heap.clear();
        heap.push(Reverse((OrderedF64(0.0), source)));
        while let Some(Reverse((OrderedF64(du), u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for &(v, len) in &adj[u] {
                let cand = du + len;
                if cand < d[v] {
                    d[v] = cand;
                    m[v] = m[u].max(len);
                    heap.push(Reverse((OrderedF64(cand), v)));
                }
            }
        }
        for v in 0..n {
            dist[(source, v)] = d[v];
            max_edge[(source, v)] = m[v];
        }
    }
    // The two directions of a pair sum the same path in opposite orders,
    // which can differ by float rounding; copy the upper triangle so the
    // returned matrices are exactly symmetric.
    for i in 0..n {
        for j in i + 1..n {
            dist[(j, i)] = dist[(i, j)];
            max_edge[(j, i)] = max_edge[(i, j)];
        }
    }
    (dist, max_edge)
}

#[derive(PartialEq)]
struct OrderedF64(f64);

impl Eq for OrderedF64 {}

impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PartialOrd for OrderedF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_complete, build_small_world};

    #[test]
    fn single_edge_distance_is_exponential() {
        // K2 has one rate-1 edge: mean distance 1 within 3 sigma.
        let g = build_complete(2).unwrap();
        let reps = 4000;
        let mut mean = 0.0;
        for r in 0..reps {
            mean += fpp_distances(&g, StreamKey::new(13, r)) [(0, 1)] / reps as f64;
        }
        let se = 1.0 / (reps as f64).sqrt();
        assert!((mean - 1.0).abs() <= 3.0 * se, "mean {mean}");
    }

    #[test]
    fn distances_are_symmetric_with_zero_diagonal() {
        let g = build_small_world(5, 2, 2.0, 0.5, 3).unwrap();
        let d = fpp_distances(&g, StreamKey::new(1, 0));
        for i in 0..g.n() {
            assert_eq!(d[(i, i)], 0.0);
            for j in 0..g.n() {
                assert_eq!(d[(i, j)], d[(j, i)], "asymmetry at ({i}, {j})");
                assert!(d[(i, j)].is_finite());
            }
        }
    }

    #[test]
    fn triangle_inequality_holds_exactly() {
        let g = build_complete(8).unwrap();
        let d = fpp_distances(&g, StreamKey::new(4, 2));
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    assert!(d[(i, j)] <= d[(i, k)] + d[(k, j)] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn max_edge_lies_below_the_distance() {
        let g = build_small_world(6, 1, 1.0, 0.6, 9).unwrap();
        let (d, m) = fpp_with_max_edge(&g, StreamKey::new(8, 0));
        for i in 0..g.n() {
            for j in 0..g.n() {
                if i != j {
                    assert!(m[(i, j)] > 0.0);
                    assert!(m[(i, j)] <= d[(i, j)] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_per_key() {
        let g = build_complete(5).unwrap();
        let a = fpp_distances(&g, StreamKey::new(6, 1));
        let b = fpp_distances(&g, StreamKey::new(6, 1));
        assert_eq!(a, b);
        let c = fpp_distances(&g, StreamKey::new(6, 2));
        assert_ne!(a, c);
    }
}
