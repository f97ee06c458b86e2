//! Deference rule: meeting agents both adopt the smaller opinion label.
//!
//! Agents start with distinct labels `1..=n` (agent `i` holds label
//! `i + 1`), so lower labels displace higher ones and label 1 — which
//! spreads exactly like the epidemic rule sourced at its holder — is the
//! eventual consensus. Per-agent labels only decrease, and the share held
//! by the few smallest labels is the natural observable.

use crate::meetings::MeetingEvent;
use crate::models::Model;

/// Per-agent opinion labels of the deference rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeferenceState {
    /// Labels in `1..=n`; nonincreasing per agent over time.
    label: Vec<usize>,
    ones: usize,
}

impl DeferenceState {
    /// Agent `i` starts with label `i + 1`.
    pub fn new(n: usize) -> Self {
        DeferenceState { label: (1..=n).collect(), ones: usize::from(n >= 1) }
    }

    pub fn labels(&self) -> &[usize] {
        &self.label
    }

    /// Fraction of agents currently holding `label`.
    pub fn proportion(&self, label: usize) -> f64 {
        let c = self.label.iter().filter(|&&l| l == label).count();
        c as f64 / self.label.len() as f64
    }

    /// Proportions of labels `1..=k`.
    pub fn proportions_top(&self, k: usize) -> Vec<f64> {
        let mut counts = vec![0usize; k];
        for &l in &self.label {
            if l <= k {
                counts[l - 1] += 1;
            }
        }
        counts.iter().map(|&c| c as f64 / self.label.len() as f64).collect()
    }

    /// Fraction of agents holding a label `<= k`.
    pub fn cumulative_share(&self, k: usize) -> f64 {
        let c = self.label.iter().filter(|&&l| l <= k).count();
        c as f64 / self.label.len() as f64
    }
}

impl Model for DeferenceState {
    fn apply(&mut self, ev: &MeetingEvent) {
        let m = self.label[ev.a].min(self.label[ev.b]);
        for agent in [ev.a, ev.b] {
            if self.label[agent] != 1 && m == 1 {
                self.ones += 1;
            }
            self.label[agent] = m;
        }
    }

    fn absorbed(&self) -> bool {
        self.ones == self.label.len()
    }
}
