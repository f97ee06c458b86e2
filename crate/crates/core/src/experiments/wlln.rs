//! Concentration diagnostic for pairwise spread times: on mean-field-like
//! geometries the first-passage time between a typical pair concentrates
//! around a single deterministic scale, while on spatial geometries it
//! tracks the pair distance and no common scale exists.
//!
//! For each ordered-below pair `(i, j)` the diagnostic estimates the
//! probability that the pair's first-passage time lands outside
//! `(1 - eps, 1 + eps)` times the pooled median time, and calls the pair
//! *failing* when that probability exceeds 1/2. The fraction of failing
//! pairs is the headline statistic: near 0 when one scale fits all pairs,
//! near 1 when distances dominate. Alongside it the diagnostic reports the
//! mean share of the largest single edge weight on the optimal path — a
//! second, scale-free concentration probe.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::report::{Check, SuiteReport};
use crate::experiments::stats::{replicate, Ecdf};
use crate::geometry::Geometry;
use crate::models::fpp_with_max_edge;

/// All-pairs first-passage replicas are quadratic in memory and run a full
/// shortest-path sweep per agent; keep the exhaustive diagnostic small.
pub const MAX_WLLN_AGENTS: usize = 200;

/// Outcome of the pairwise concentration diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WllnReport {
    pub n: usize,
    pub eps: f64,
    pub replicas: usize,
    /// Pooled median first-passage time over all pairs and replicas.
    pub median_time: f64,
    /// Fraction of pairs whose time misses `(1 +- eps) * median` with
    /// estimated probability above 1/2.
    pub failing_fraction: f64,
    /// Mean over replicas and pairs of `max edge weight on the optimal
    /// path / total path time`.
    pub mean_max_edge_share: f64,
}

/// Runs the concentration diagnostic: `replicas` independent all-pairs
/// first-passage sweeps, pooled median, per-pair miss probabilities.
pub fn wlln_concentration(
    g: &Geometry,
    eps: f64,
    replicas: usize,
    master_seed: u64,
) -> Result<WllnReport> {
    let n = g.n();
    if n > MAX_WLLN_AGENTS {
        return Err(Error::unsupported(format!(
            "all-pairs concentration diagnostic needs n <= {MAX_WLLN_AGENTS}, got {n}"
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("relative window eps must be positive, got {eps}")));
    }
    if replicas < 10 {
        return Err(Error::invalid(format!(
            "majority-rule miss probabilities need >= 10 replicas, got {replicas}"
        )));
    }
    let pairs = n * (n - 1) / 2;
    // Per replica: the upper-triangle pair times, and the replica's mean
    // max-edge share.
    let runs: Vec<(Vec<f64>, f64)> = replicate(replicas, master_seed, |key| {
        let (dist, max_edge) = fpp_with_max_edge(g, key);
        let mut times = Vec::with_capacity(pairs);
        let mut share = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                times.push(dist[(i, j)]);
                share += max_edge[(i, j)] / dist[(i, j)];
            }
        }
        (times, share / pairs as f64)
    });

    let pooled: Vec<f64> = runs.iter().flat_map(|(t, _)| t.iter().copied()).collect();
    let median = Ecdf::new(pooled)?.quantile(0.5);
    let (lo, hi) = ((1.0 - eps) * median, (1.0 + eps) * median);
    let mut miss_counts = vec![0usize; pairs];
    for (times, _) in &runs {
        for (p, t) in times.iter().enumerate() {
            if *t < lo || *t > hi {
                miss_counts[p] += 1;
            }
        }
    }
    let failing =
        miss_counts.iter().filter(|&&c| 2 * c > replicas).count();
    let mean_share = runs.iter().map(|(_, s)| s).sum::<f64>() / replicas as f64;
    Ok(WllnReport {
        n,
        eps,
        replicas,
        median_time: median,
        failing_fraction: failing as f64 / pairs as f64,
        mean_max_edge_share: mean_share,
    })
}

/// Report wrapper around [`wlln_concentration`]. Both statistics are scale
/// laws with geometry-dependent thresholds, so the checks are exploratory
/// and never gate an exit code; the values are the deliverable.
pub fn wlln_suite(
    g: &Geometry,
    eps: f64,
    replicas: usize,
    master_seed: u64,
) -> Result<SuiteReport> {
    let outcome = wlln_concentration(g, eps, replicas, master_seed)?;
    let mut report = SuiteReport::new(
        "wlln-concentration",
        json!({
            "geometry": g.label(),
            "n": outcome.n,
            "eps": eps,
            "replicas": replicas,
            "master_seed": master_seed,
            "median_time": outcome.median_time,
        }),
    );
    report.push(Check::exploratory(
        "pair-failing-fraction",
        outcome.failing_fraction,
        0.0,
        1.0,
    ));
    report.push(Check::exploratory(
        "geodesic-max-edge-share",
        outcome.mean_max_edge_share,
        0.0,
        1.0,
    ));
    Ok(report)
}
