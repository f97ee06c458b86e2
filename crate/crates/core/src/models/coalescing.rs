//! Coalescing-cluster rule: the source hands every token it holds to the
//! target.
//!
//! Each agent starts holding one token. Because a transfer happens only in
//! one of the two equally likely meeting orientations, a single token moves
//! as the associated chain at half speed; but two occupied agents merge
//! their clusters in either orientation, so a pair of clusters coalesces at
//! the full pair rate. The partition of tokens only coarsens, and one
//! all-token cluster is absorbing.

use crate::meetings::MeetingEvent;
use crate::models::Model;

/// Token clusters of the coalescing rule.
#[derive(Clone, Debug, PartialEq)]
pub struct CoalescingState {
    /// Tokens currently held by each agent.
    tokens: Vec<Vec<usize>>,
    nonempty: usize,
    /// Flattened `n x n` pairwise first-meeting times (`NaN` until the two
    /// tokens share a cluster); empty when tracking is off.
    meet: Vec<f64>,
}

impl CoalescingState {
    /// Token `i` starts at agent `i`; first-meeting times are not tracked.
    pub fn new(n: usize) -> Self {
        CoalescingState {
            tokens: (0..n).map(|i| vec![i]).collect(),
            nonempty: n,
            meet: Vec::new(),
        }
    }

    /// Like [`CoalescingState::new`] but records when each token pair first
    /// shares a cluster.
    pub fn with_meeting_times(n: usize) -> Self {
        let mut state = CoalescingState::new(n);
        state.meet = vec![f64::NAN; n * n];
        for u in 0..n {
            state.meet[u * n + u] = 0.0;
        }
        state
    }

    fn n(&self) -> usize {
        self.tokens.len()
    }

    /// Number of nonempty clusters.
    pub fn clusters(&self) -> usize {
        self.nonempty
    }

    /// Tokens currently held by `agent`.
    pub fn tokens_at(&self, agent: usize) -> &[usize] {
        &self.tokens[agent]
    }

    /// Sorted sizes of the nonempty clusters (the partition's shape).
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> =
            self.tokens.iter().map(Vec::len).filter(|&s| s > 0).collect();
        sizes.sort_unstable();
        sizes
    }

    /// Time at which tokens `u` and `v` first shared a cluster, if they
    /// have (requires [`CoalescingState::with_meeting_times`]).
    pub fn first_meeting(&self, u: usize, v: usize) -> Option<f64> {
        assert!(!self.meet.is_empty(), "meeting times were not tracked");
        let t = self.meet[u * self.n() + v];
        if t.is_nan() {
            None
        } else {
            Some(t)
        }
    }
}

impl Model for CoalescingState {
    fn apply(&mut self, ev: &MeetingEvent) {
        let (src, tgt) = (ev.source(), ev.target());
        if self.tokens[src].is_empty() {
            return;
        }
        if !self.tokens[tgt].is_empty() {
            self.nonempty -= 1;
            if !self.meet.is_empty() {
                let n = self.n();
                for &u in &self.tokens[src] {
                    for &v in &self.tokens[tgt] {
                        self.meet[u * n + v] = ev.time;
                        self.meet[v * n + u] = ev.time;
                    }
                }
            }
        }
        let moved = std::mem::take(&mut self.tokens[src]);
        self.tokens[tgt].extend(moved);
    }

    fn absorbed(&self) -> bool {
        self.nonempty == 1
    }
}
