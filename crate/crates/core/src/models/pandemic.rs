//! Pandemic rule (SI epidemic): at a meeting, one infected party infects
//! the other.
//!
//! Because infection spreads at every meeting regardless of direction, the
//! infected set at time `t` is exactly the set of agents reachable from the
//! source through the meeting events up to `t` — the fastest any rule can
//! propagate information along the same stream.

use crate::meetings::MeetingEvent;
use crate::models::Model;

/// Infection status and per-agent infection times.
#[derive(Clone, Debug)]
pub struct PandemicState {
    infected: Vec<bool>,
    times: Vec<f64>,
    count: usize,
    source: usize,
}

impl PandemicState {
    /// All healthy except `source`, infected at time 0.
    pub fn new(n: usize, source: usize) -> Self {
        assert!(source < n, "source out of range");
        let mut infected = vec![false; n];
        infected[source] = true;
        let mut times = vec![f64::INFINITY; n];
        times[source] = 0.0;
        PandemicState { infected, times, count: 1, source }
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn is_infected(&self, i: usize) -> bool {
        self.infected[i]
    }

    pub fn infected_count(&self) -> usize {
        self.count
    }

    /// Per-agent infection times (`+inf` when never infected).
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Infection times in increasing order: entry `k` is the time at which
    /// the `(k+1)`-th agent became infected (entry 0 is the source at 0).
    pub fn jump_times(&self) -> Vec<f64> {
        let mut sorted = self.times.clone();
        sorted.sort_by(|x, y| x.total_cmp(y));
        sorted
    }
}

impl Model for PandemicState {
    fn apply(&mut self, ev: &MeetingEvent) {
        let (ia, ib) = (self.infected[ev.a], self.infected[ev.b]);
        if ia != ib {
            let fresh = if ia { ev.b } else { ev.a };
            self.infected[fresh] = true;
            self.times[fresh] = ev.time;
            self.count += 1;
        }
    }

    fn absorbed(&self) -> bool {
        self.count == self.infected.len()
    }
}

/// Runs the epidemic from `source` over the given events and returns the
/// per-agent infection times (`+inf` for agents the stream never reached —
/// impossible for an unbounded stream on a connected geometry).
pub fn pandemic_times(
    n: usize,
    source: usize,
    events: impl IntoIterator<Item = MeetingEvent>,
) -> Vec<f64> {
    let mut state = PandemicState::new(n, source);
    crate::models::drive(&mut state, events);
    state.times
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_complete, build_torus};
    use crate::meetings::{replica_keys, MeetingProcess};

    #[test]
    fn two_agents_first_meeting_infects() {
        // K2: the completion time is the first meeting, Exponential(1).
        let g = build_complete(2).unwrap();
        let process = MeetingProcess::new(&g);
        let reps = 4000;
        let mut mean = 0.0;
        for key in replica_keys(7, reps) {
            let times = pandemic_times(2, 0, process.stream(key, None));
            assert_eq!(times[0], 0.0);
            mean += times[1] / reps as f64;
        }
        // Exponential(1): SE = 1/sqrt(reps).
        let se = 1.0 / (reps as f64).sqrt();
        assert!((mean - 1.0).abs() <= 3.0 * se, "mean {mean}");
    }

    #[test]
    fn triangle_completion_mean() {
        // K3 (rates 1/2): E D(3) = (n-1) * sum_k 1/(k(n-k)) = 2.
        let g = build_complete(3).unwrap();
        let process = MeetingProcess::new(&g);
        let reps = 4000;
        let mut mean = 0.0;
        let mut sq = 0.0;
        for key in replica_keys(11, reps) {
            let d = PandemicState::new(3, 0);
            let mut state = d;
            crate::models::drive(&mut state, process.stream(key, None));
            let last = state.jump_times()[2];
            mean += last / reps as f64;
            sq += last * last / reps as f64;
        }
        let se = ((sq - mean * mean) / reps as f64).sqrt();
        assert!((mean - 2.0).abs() <= 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn infection_is_monotone_and_counts_match() {
        let g = build_torus(4, 2).unwrap();
        let process = MeetingProcess::new(&g);
        let mut state = PandemicState::new(16, 3);
        let mut last_count = 1;
        for ev in process.stream(crate::meetings::StreamKey::new(5, 0), None).take(2000) {
            state.apply(&ev);
            assert!(state.infected_count() >= last_count);
            last_count = state.infected_count();
            if state.absorbed() {
                break;
            }
        }
        assert!(state.absorbed());
        let jumps = state.jump_times();
        assert_eq!(jumps.len(), 16);
        assert!(jumps.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(jumps[0], 0.0);
    }
}
