//! Token-swapping rule: meeting agents exchange their tokens.
//!
//! The configuration is always a permutation of the `n` tokens over the `n`
//! agents, and its sign flips at every meeting. Any single token, viewed
//! alone, moves exactly as the associated chain. The rule's own relaxation
//! is captured by the spectral gap of the walk on all `n!` permutations,
//! which [`interchange_gap_bruteforce`] computes exactly for tiny `n`
//! alongside the single-agent chain gap — the two are provably equal, and
//! the easy half (`lambda_swap <= lambda_chain`) plus the equality are both
//! asserted in tests.

use std::collections::HashMap;

use itertools::Itertools;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::chain::{spectral_gap, Generator};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::meetings::MeetingEvent;
use crate::models::Model;

/// Maximum agent count for the factorial-state brute force.
pub const MAX_BRUTEFORCE_AGENTS: usize = 6;

/// Token arrangement of the swapping rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterchangeState {
    /// `perm[agent]` is the token currently at that agent.
    perm: Vec<usize>,
    /// Sign of the permutation relative to the start; flips every event.
    odd: bool,
}

impl InterchangeState {
    /// Identity arrangement: token `i` at agent `i`.
    pub fn new(n: usize) -> Self {
        InterchangeState { perm: (0..n).collect(), odd: false }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Whether an odd number of swaps has been applied.
    pub fn odd(&self) -> bool {
        self.odd
    }

    /// Agent currently holding `token`.
    pub fn position_of(&self, token: usize) -> usize {
        self.perm.iter().position(|&t| t == token).expect("token exists")
    }
}

impl Model for InterchangeState {
    fn apply(&mut self, ev: &MeetingEvent) {
        self.perm.swap(ev.a, ev.b);
        self.odd = !self.odd;
    }
}

/// Exact spectral gaps of the swapping rule and of the associated chain,
/// brute-forced over all `n!` permutation states.
///
/// Builds the full symmetric generator of the permutation walk (each edge
/// `(i, j)` with rate `nu_ij` applies the transposition of positions `i`
/// and `j`), takes its eigendecomposition, and returns
/// `(lambda_swap, lambda_chain)`.
pub fn interchange_gap_bruteforce(g: &Geometry) -> Result<(f64, f64)> {
    let n = g.n();
    if n > MAX_BRUTEFORCE_AGENTS {
        return Err(Error::unsupported(format!(
            "permutation brute force needs n <= {MAX_BRUTEFORCE_AGENTS} (n! states), got n={n}"
        )));
    }
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let index: HashMap<&[usize], usize> =
        perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let m = perms.len();
    let mut q = DMatrix::<f64>::zeros(m, m);
    let mut scratch = vec![0usize; n];
    for (s, p) in perms.iter().enumerate() {
        for e in g.edges() {
            scratch.copy_from_slice(p);
            scratch.swap(e.a, e.b);
            let t = index[scratch.as_slice()];
            q[(s, t)] += e.rate;
            q[(s, s)] -= e.rate;
        }
    }
    let eigen = SymmetricEigen::new(q);
    let mut values: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    if values[0].abs() > 1e-8 {
        return Err(Error::numeric(format!(
            "permutation-walk leading eigenvalue should be 0, got {}",
            values[0]
        )));
    }
    let gap_swap = -values[1];
    let gap_chain = spectral_gap(&Generator::new(g))?;
    Ok((gap_swap, gap_chain))
}
