//! Constructors for the standard geometry families.
//!
//! Rates follow the usual conventions: complete graphs and tori are scaled so
//! every row sum is 1, sparse random graphs use unit rates per edge, and the
//! dense families (long-range and two-scale tori) superimpose a local
//! nearest-neighbor part with a weak all-pairs part.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Edge, Geometry};

/// Largest agent count accepted by the lattice builders; beyond this the
/// dense edge lists stop being practical.
const MAX_LATTICE_AGENTS: usize = 1 << 20;

/// Complete graph on `n` agents with every rate `1/(n-1)`, so each row sums
/// to 1.
pub fn build_complete(n: usize) -> Result<Geometry> {
    if n < 2 {
        return Err(Error::invalid(format!("complete graph needs n >= 2, got {n}")));
    }
    let rate = 1.0 / (n as f64 - 1.0);
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            edges.push(Edge { a, b, rate });
        }
    }
    Geometry::new(n, format!("complete({n})"), edges)
}

/// Discrete torus `Z_m^d` with nearest-neighbor rate `1/(2d)`.
///
/// For `m = 2` the `+1` and `-1` neighbors in a coordinate coincide and
/// their rates merge, giving the Hamming cube with rate `1/d`.
pub fn build_torus(m: usize, d: usize) -> Result<Geometry> {
    let n = torus_size(m, d)?;
    let rate = 1.0 / (2.0 * d as f64);
    let mut accum: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for i in 0..n {
        let coords = torus_coords(i, m, d);
        for dim in 0..d {
            let mut up = coords.clone();
            up[dim] = (up[dim] + 1) % m;
            let j = torus_index(&up, m);
            let key = if i < j { (i, j) } else { (j, i) };
            *accum.entry(key).or_insert(0.0) += rate;
        }
    }
    let edges = accum
        .into_iter()
        .map(|((a, b), rate)| Edge { a, b, rate })
        .collect();
    Geometry::new(n, format!("torus({m},{d})"), edges)
}

/// Small-world graph: the torus `Z_m^d` with rate-1 edges, plus an extra
/// rate-1 edge between each non-adjacent pair `{i, j}` independently with
/// probability `min(1, extra_density * r^-gamma)` where `r` is the toroidal
/// Euclidean distance.
pub fn build_small_world(
    m: usize,
    d: usize,
    gamma: f64,
    extra_density: f64,
    seed: u64,
) -> Result<Geometry> {
    let n = torus_size(m, d)?;
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::invalid(format!("small world needs gamma >= 0, got {gamma}")));
    }
    if !extra_density.is_finite() || extra_density < 0.0 {
        return Err(Error::invalid(format!(
            "small world needs extra_density >= 0, got {extra_density}"
        )));
    }
    let base = build_torus(m, d)?;
    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in base.edges() {
        pairs.insert((e.a, e.b), 1.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for a in 0..n {
        for b in (a + 1)..n {
            if pairs.contains_key(&(a, b)) {
                continue;
            }
            let r = torus_distance(a, b, m, d);
            let p = (extra_density * r.powf(-gamma)).min(1.0);
            if rng.random::<f64>() < p {
                pairs.insert((a, b), 1.0);
            }
        }
    }
    let edges = pairs
        .into_iter()
        .map(|((a, b), rate)| Edge { a, b, rate })
        .collect();
    Geometry::new(
        n,
        format!("small_world({m},{d},gamma={gamma},density={extra_density},seed={seed})"),
        edges,
    )
}

/// Configuration-model random graph: degrees drawn from `degree_law`
/// (a finite distribution on degrees `>= 1` given as `(degree, weight)`
/// pairs), stubs matched uniformly, self-loops discarded, multi-edges
/// collapsed to a single rate-1 edge, and the largest connected component
/// returned with agents relabeled `0..size`.
pub fn build_config_model(degree_law: &[(usize, f64)], n: usize, seed: u64) -> Result<Geometry> {
    if n < 2 {
        return Err(Error::invalid(format!("config model needs n >= 2, got {n}")));
    }
    if degree_law.is_empty() {
        return Err(Error::invalid("config model needs a non-empty degree law"));
    }
    for &(deg, w) in degree_law {
        if deg == 0 {
            return Err(Error::invalid("config model degrees must be >= 1"));
        }
        if !w.is_finite() || w < 0.0 {
            return Err(Error::invalid(format!("bad degree weight {w}")));
        }
    }
    let weights: Vec<f64> = degree_law.iter().map(|&(_, w)| w).collect();
    let picker = WeightedIndex::new(&weights)
        .map_err(|e| Error::invalid(format!("degenerate degree law: {e}")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs = Vec::new();
    for v in 0..n {
        let deg = degree_law[picker.sample(&mut rng)].0;
        stubs.extend(std::iter::repeat_n(v, deg));
    }
    // Parity fix: an odd stub total cannot be matched, so one uniformly
    // chosen agent gets an extra stub.
    if stubs.len() % 2 == 1 {
        stubs.push(rng.random_range(0..n));
    }
    stubs.shuffle(&mut rng);

    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for chunk in stubs.chunks_exact(2) {
        let (a, b) = (chunk[0], chunk[1]);
        if a == b {
            continue;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        pairs.insert(key, 1.0);
    }

    // Largest connected component, relabeled to contiguous indices.
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in pairs.keys() {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut component = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut stack = vec![start];
        component[start] = id;
        let mut size = 1;
        while let Some(v) = stack.pop() {
            for &u in &adjacency[v] {
                if component[u] == usize::MAX {
                    component[u] = id;
                    size += 1;
                    stack.push(u);
                }
            }
        }
        sizes.push(size);
    }
    let best = sizes
        .iter()
        .enumerate()
        .max_by_key(|&(_, s)| *s)
        .map(|(id, _)| id)
        .expect("at least one component");
    if sizes[best] < 2 {
        return Err(Error::invalid(
            "config model produced no component with at least 2 agents",
        ));
    }
    let mut relabel = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        if component[v] == best {
            relabel[v] = next;
            next += 1;
        }
    }
    let edges = pairs
        .keys()
        .filter(|&&(a, b)| component[a] == best && component[b] == best)
        .map(|&(a, b)| Edge {
            a: relabel[a],
            b: relabel[b],
            rate: 1.0,
        })
        .collect();
    Geometry::new(sizes[best], format!("config_model(n={n},seed={seed})"), edges)
}

/// Long-range torus: nearest-neighbor rate `1/(2d)` plus `r^-gamma` between
/// every non-adjacent pair (`r` the toroidal Euclidean distance), globally
/// rescaled so row sums equal 1.
pub fn build_long_range_torus(m: usize, d: usize, gamma: f64) -> Result<Geometry> {
    let n = torus_size(m, d)?;
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::invalid(format!(
            "long-range torus needs a finite exponent gamma > 0, got {gamma}"
        )));
    }
    if n > 2048 {
        return Err(Error::unsupported(format!(
            "long-range torus is dense; {n} agents exceeds the cap of 2048"
        )));
    }
    let base = build_torus(m, d)?;
    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in base.edges() {
        pairs.insert((e.a, e.b), e.rate);
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if pairs.contains_key(&(a, b)) {
                continue;
            }
            let rate = torus_distance(a, b, m, d).powf(-gamma);
            if rate > 0.0 {
                pairs.insert((a, b), rate);
            }
        }
    }
    let edges = pairs
        .into_iter()
        .map(|((a, b), rate)| Edge { a, b, rate })
        .collect();
    let raw = Geometry::new(n, format!("long_range_torus({m},{d},gamma={gamma})"), edges)?;
    // The graph is vertex-transitive, so dividing by the (common) maximum
    // row sum makes every row sum equal to 1.
    let (standardized, _) = super::standardize(&raw)?;
    Ok(standardized)
}

/// Two-scale torus on `Z_m^2`: each of the 4 nearest neighbors at rate 1/4,
/// and every one of the `m^2 - 5` non-neighbors at rate `m^-alpha / (m^2 - 5)`,
/// so each row sums to `1 + m^-alpha`. Requires `0 < alpha < 3`.
pub fn build_two_scale_torus(m: usize, alpha: f64) -> Result<Geometry> {
    if m < 3 {
        return Err(Error::invalid(format!("two-scale torus needs m >= 3, got {m}")));
    }
    if !(alpha > 0.0 && alpha < 3.0) {
        return Err(Error::invalid(format!(
            "two-scale torus needs 0 < alpha < 3, got {alpha}"
        )));
    }
    let n = torus_size(m, 2)?;
    if n > 2048 {
        return Err(Error::unsupported(format!(
            "two-scale torus is dense; {n} agents exceeds the cap of 2048"
        )));
    }
    let base = build_torus(m, 2)?;
    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in base.edges() {
        pairs.insert((e.a, e.b), 0.25);
    }
    let weak = (m as f64).powf(-alpha) / (n as f64 - 5.0);
    for a in 0..n {
        for b in (a + 1)..n {
            pairs.entry((a, b)).or_insert(weak);
        }
    }
    let edges = pairs
        .into_iter()
        .map(|((a, b), rate)| Edge { a, b, rate })
        .collect();
    Geometry::new(n, format!("two_scale_torus({m},alpha={alpha})"), edges)
}

/// Hamming cube `{0,1}^d` with rate `1/d` across each bit flip, so each row
/// sums to 1.
pub fn build_hamming(d: usize) -> Result<Geometry> {
    if d < 1 {
        return Err(Error::invalid("hamming cube needs d >= 1"));
    }
    if d > 16 {
        return Err(Error::unsupported(format!(
            "hamming cube with d = {d} has 2^{d} agents, beyond the cap of 2^16"
        )));
    }
    let n = 1usize << d;
    let rate = 1.0 / d as f64;
    let mut edges = Vec::with_capacity(d << (d - 1));
    for a in 0..n {
        for bit in 0..d {
            let b = a ^ (1 << bit);
            if a < b {
                edges.push(Edge { a, b, rate });
            }
        }
    }
    Geometry::new(n, format!("hamming({d})"), edges)
}

/// Path on `k` agents with unit rates.
pub fn build_path(k: usize) -> Result<Geometry> {
    if k < 2 {
        return Err(Error::invalid(format!("path needs k >= 2, got {k}")));
    }
    let edges = (0..k - 1).map(|a| Edge { a, b: a + 1, rate: 1.0 }).collect();
    Geometry::new(k, format!("path({k})"), edges)
}

/// Star on `k` agents (hub = agent 0) with unit rates.
pub fn build_star(k: usize) -> Result<Geometry> {
    if k < 2 {
        return Err(Error::invalid(format!("star needs k >= 2, got {k}")));
    }
    let edges = (1..k).map(|b| Edge { a: 0, b, rate: 1.0 }).collect();
    Geometry::new(k, format!("star({k})"), edges)
}

fn torus_size(m: usize, d: usize) -> Result<usize> {
    if m < 2 {
        return Err(Error::invalid(format!("torus needs side length m >= 2, got {m}")));
    }
    if d < 1 {
        return Err(Error::invalid("torus needs dimension d >= 1"));
    }
    let n = m
        .checked_pow(d as u32)
        .filter(|&n| n <= MAX_LATTICE_AGENTS)
        .ok_or_else(|| {
            Error::unsupported(format!("torus {m}^{d} exceeds {MAX_LATTICE_AGENTS} agents"))
        })?;
    Ok(n)
}

/// Little-endian digit decomposition of a torus index.
fn torus_coords(index: usize, m: usize, d: usize) -> Vec<usize> {
    let mut coords = Vec::with_capacity(d);
    let mut rest = index;
    for _ in 0..d {
        coords.push(rest % m);
        rest /= m;
    }
    coords
}

fn torus_index(coords: &[usize], m: usize) -> usize {
    coords.iter().rev().fold(0, |acc, &c| acc * m + c)
}

/// Toroidal Euclidean distance between two agents.
fn torus_distance(a: usize, b: usize, m: usize, d: usize) -> f64 {
    let ca = torus_coords(a, m, d);
    let cb = torus_coords(b, m, d);
    let mut sq = 0.0;
    for dim in 0..d {
        let diff = ca[dim].abs_diff(cb[dim]);
        let wrapped = diff.min(m - diff) as f64;
        sq += wrapped * wrapped;
    }
    sq.sqrt()
}
