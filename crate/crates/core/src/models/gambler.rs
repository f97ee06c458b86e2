//! All-or-nothing gambling rule: meeting agents stake everything on a fair
//! game.
//!
//! With stakes `a` and `b`, one side takes `a + b` — the source wins with
//! probability `a/(a+b)`, decided by the event's first auxiliary uniform
//! (each unit staked has equal worth, so the game is fair). Broke agents
//! can never re-enter, and the process freezes once the agents still
//! holding money form an independent set of the positive-rate graph: there
//! are many such configurations, so where the money ends up depends on the
//! path taken.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::meetings::MeetingEvent;
use crate::models::Model;

/// Stake vector of the gambling rule.
#[derive(Clone, Debug)]
pub struct GamblerState {
    x: Vec<f64>,
    /// Edges of the geometry, kept to decide absorption.
    edges: Vec<(usize, usize)>,
    stale: Cell<bool>,
    absorbed_cache: Cell<bool>,
}

impl GamblerState {
    /// Starts from explicit nonnegative stakes.
    pub fn new(g: &Geometry, x0: &[f64]) -> Result<Self> {
        if x0.len() != g.n() {
            return Err(Error::invalid(format!(
                "stake vector has length {}, geometry has {} agents",
                x0.len(),
                g.n()
            )));
        }
        if let Some(bad) = x0.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!("stakes must be finite and >= 0, got {bad}")));
        }
        Ok(GamblerState {
            x: x0.to_vec(),
            edges: g.edges().iter().map(|e| (e.a, e.b)).collect(),
            stale: Cell::new(true),
            absorbed_cache: Cell::new(false),
        })
    }

    /// One unit of money per agent.
    pub fn equal(g: &Geometry) -> Self {
        GamblerState::new(g, &vec![1.0; g.n()]).expect("uniform stakes are valid")
    }

    pub fn stakes(&self) -> &[f64] {
        &self.x
    }

    /// Agents still holding money.
    pub fn support(&self) -> Vec<usize> {
        (0..self.x.len()).filter(|&i| self.x[i] > 0.0).collect()
    }

    /// Total money on the table (conserved exactly: every transfer moves
    /// whole stakes).
    pub fn total(&self) -> f64 {
        self.x.iter().sum()
    }
}

impl Model for GamblerState {
    fn apply(&mut self, ev: &MeetingEvent) {
        let (src, tgt) = (ev.source(), ev.target());
        let (a, b) = (self.x[src], self.x[tgt]);
        if a + b == 0.0 {
            return;
        }
        let (winner, loser) = if ev.aux[0] < a / (a + b) { (src, tgt) } else { (tgt, src) };
        if self.x[loser] > 0.0 {
            self.x[winner] += self.x[loser];
            self.x[loser] = 0.0;
            self.stale.set(true);
        }
    }

    /// Absorbed once no positive-rate edge joins two agents with money.
    fn absorbed(&self) -> bool {
        if self.stale.get() {
            let frozen =
                self.edges.iter().all(|&(a, b)| self.x[a] == 0.0 || self.x[b] == 0.0);
            self.absorbed_cache.set(frozen);
            self.stale.set(false);
        }
        self.absorbed_cache.get()
    }
}
