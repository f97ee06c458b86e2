//! Bottleneck statistics of a geometry.
//!
//! For a subset `A` of agents the normalized cut is
//! `nu(A, A^c) = n^-1 * sum_{i in A, j not in A} nu_ij`.
//! The profile `phi(m)` is the minimum normalized cut over subsets of size
//! `m`, and the global bottleneck coefficient is
//! `kappa = n (n-1) * min_A nu(A, A^c) / (|A| |A^c|)`,
//! normalized so the complete graph has `kappa = 1`.
//!
//! All three are computed by one exhaustive sweep over subsets in Gray-code
//! order, updating the cut incrementally as a single agent enters or leaves;
//! this caps the supported size at `n <= 22`.

use crate::error::{Error, Result};
use crate::geometry::Geometry;

/// Exhaustive enumeration is capped at this many agents (2^22 subsets).
pub const MAX_EXHAUSTIVE_AGENTS: usize = 22;

/// Result of a bottleneck query at one subset size.
#[derive(Clone, Debug)]
pub struct BottleneckReport {
    /// Queried subset size.
    pub m: usize,
    /// Minimum normalized cut over subsets of size `m`.
    pub phi: f64,
    /// Global bottleneck coefficient of the geometry (over all sizes).
    pub kappa: f64,
    /// A subset of size `m` attaining `phi`, sorted ascending.
    pub argmin_subset: Vec<usize>,
}

struct Sweep {
    /// `min_cut[m]` is the minimum *unnormalized* cut over subsets of size
    /// `m` (index 0 unused).
    min_cut: Vec<f64>,
    /// Bitmask of the first subset attaining each minimum.
    argmin: Vec<u32>,
}

fn sweep(g: &Geometry) -> Result<Sweep> {
    let n = g.n();
    if n > MAX_EXHAUSTIVE_AGENTS {
        return Err(Error::unsupported(format!(
            "bottleneck enumeration needs n <= {MAX_EXHAUSTIVE_AGENTS}, got {n}"
        )));
    }
    let mut min_cut = vec![f64::INFINITY; n];
    let mut argmin = vec![0u32; n];
    let mut mask = 0u32;
    let mut size = 0usize;
    let mut cut = 0.0f64;
    for i in 1u64..(1u64 << n) {
        let v = i.trailing_zeros() as usize;
        let entering = mask & (1 << v) == 0;
        let mut inside = 0.0;
        let mut outside = 0.0;
        for &(u, rate) in g.neighbors(v) {
            if mask & (1 << u) != 0 {
                inside += rate;
            } else {
                outside += rate;
            }
        }
        if entering {
            mask |= 1 << v;
            size += 1;
            cut += outside - inside;
        } else {
            mask &= !(1 << v);
            size -= 1;
            cut += inside - outside;
        }
        if size >= 1 && size < n && cut < min_cut[size] {
            min_cut[size] = cut;
            argmin[size] = mask;
        }
    }
    // Re-evaluate each recorded minimizer directly so the reported values
    // carry no drift from the incremental updates.
    for m in 1..n {
        min_cut[m] = cut_of_mask(g, argmin[m]);
    }
    Ok(Sweep { min_cut, argmin })
}

fn cut_of_mask(g: &Geometry, mask: u32) -> f64 {
    g.edges()
        .iter()
        .filter(|e| (mask >> e.a & 1) != (mask >> e.b & 1))
        .map(|e| e.rate)
        .sum()
}

fn kappa_of(g: &Geometry, s: &Sweep) -> f64 {
    let n = g.n() as f64;
    (1..g.n())
        .map(|m| n * (n - 1.0) * (s.min_cut[m] / n) / (m as f64 * (n - m as f64)))
        .fold(f64::INFINITY, f64::min)
}

/// Minimum normalized cut at size `m` together with a minimizing subset and
/// the global bottleneck coefficient. Requires `1 <= m <= n-1` and
/// `n <= 22`.
pub fn bottleneck(g: &Geometry, m: usize) -> Result<BottleneckReport> {
    if m < 1 || m >= g.n() {
        return Err(Error::invalid(format!(
            "subset size m = {m} must lie in 1..={}",
            g.n() - 1
        )));
    }
    let s = sweep(g)?;
    let subset = (0..g.n()).filter(|&v| s.argmin[m] >> v & 1 == 1).collect();
    Ok(BottleneckReport {
        m,
        phi: s.min_cut[m] / g.n() as f64,
        kappa: kappa_of(g, &s),
        argmin_subset: subset,
    })
}

/// The full profile `phi(1), ..., phi(n-1)`.
pub fn cut_profile(g: &Geometry) -> Result<Vec<f64>> {
    let s = sweep(g)?;
    let n = g.n() as f64;
    Ok(s.min_cut[1..].iter().map(|c| c / n).collect())
}

/// Global bottleneck coefficient `kappa`.
pub fn kappa(g: &Geometry) -> Result<f64> {
    let s = sweep(g)?;
    Ok(kappa_of(g, &s))
}
