//! Coupled pennies: two tagged pennies that may change hands at meetings.
//!
//! When a meeting involves the owner of a penny, that penny passes to the
//! other party independently with probability 1/2, using the event's
//! auxiliary uniforms (aux 0 for the first penny, aux 1 for the second).
//! Marginally each penny follows the associated chain at half speed; the
//! joint law is the dual of the averaging process.

use crate::meetings::MeetingEvent;
use crate::models::Model;

/// Positions of the two pennies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PenniesState {
    pub z1: usize,
    pub z2: usize,
}

impl PenniesState {
    pub fn new(i0: usize, j0: usize) -> Self {
        PenniesState { z1: i0, z2: j0 }
    }
}

impl Model for PenniesState {
    fn apply(&mut self, ev: &MeetingEvent) {
        if let Some(other) = ev.other(self.z1) {
            if ev.aux[0] < 0.5 {
                self.z1 = other;
            }
        }
        if let Some(other) = ev.other(self.z2) {
            if ev.aux[1] < 0.5 {
                self.z2 = other;
            }
        }
    }
}

/// Full path of the penny pair: the initial state at time 0 followed by
/// every change, as `(time, z1, z2)`.
pub fn pennies_path(
    i0: usize,
    j0: usize,
    events: impl IntoIterator<Item = MeetingEvent>,
) -> Vec<(f64, usize, usize)> {
    let mut state = PenniesState::new(i0, j0);
    let mut path = vec![(0.0, i0, j0)];
    for ev in events {
        let before = state;
        state.apply(&ev);
        if state != before {
            path.push((ev.time, state.z1, state.z2));
        }
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{transition_kernel, Generator};
    use crate::geometry::build_complete;
    use crate::meetings::{replica_keys, MeetingProcess};
    use crate::models::drive;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn identical_aux_draws_keep_co_located_pennies_together() {
        // If both pennies sit on the same agent and the two aux draws agree
        // at every event, the pennies move as one.
        let mut state = PenniesState::new(2, 2);
        let events = [
            MeetingEvent { seq: 0, time: 0.5, a: 1, b: 2, reversed: false, aux: [0.3, 0.3] },
            MeetingEvent { seq: 1, time: 1.0, a: 0, b: 1, reversed: true, aux: [0.9, 0.9] },
            MeetingEvent { seq: 2, time: 1.5, a: 1, b: 3, reversed: false, aux: [0.1, 0.1] },
        ];
        for ev in &events {
            state.apply(ev);
            assert_eq!(state.z1, state.z2);
        }
        assert_eq!(state.z1, 3);
    }

    #[test]
    fn marginal_is_the_half_speed_chain() {
        // Occupation of Z1 at time t vs the row of p(t/2): chi-squared
        // goodness of fit on K3 over 10^4 replicas.
        let g = build_complete(3).unwrap();
        let process = MeetingProcess::new(&g);
        let gen = Generator::new(&g);
        let t = 1.0;
        let expected_row = transition_kernel(&gen, t / 2.0).unwrap();
        let reps = 10_000;
        let mut counts = [0usize; 3];
        for key in replica_keys(17, reps) {
            let mut state = PenniesState::new(0, 1);
            let stream = process.stream(key, Some(t));
            drive(&mut state, stream);
            counts[state.z1] += 1;
        }
        let mut stat = 0.0;
        for j in 0..3 {
            let expect = reps as f64 * expected_row[(0, j)];
            stat += (counts[j] as f64 - expect).powi(2) / expect;
        }
        let p = 1.0 - ChiSquared::new(2.0).unwrap().cdf(stat);
        assert!(p > 0.01, "chi-squared statistic {stat}, p {p}");
    }

    #[test]
    fn path_starts_at_init_and_records_changes() {
        let g = build_complete(4).unwrap();
        let process = MeetingProcess::new(&g);
        let key = replica_keys(5, 1)[0];
        let path = pennies_path(1, 3, process.stream(key, Some(20.0)));
        assert_eq!(path[0], (0.0, 1, 3));
        for w in path.windows(2) {
            assert!(w[0].0 < w[1].0);
            assert_ne!((w[0].1, w[0].2), (w[1].1, w[1].2));
        }
    }
}
