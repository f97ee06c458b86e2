//! Token rule: a single token is passed to the meeting partner.
//!
//! The holder path is exactly the associated Markov chain of the geometry,
//! which makes this the reference rule for occupation statistics.

use crate::meetings::MeetingEvent;
use crate::models::Model;

/// Position of the single token.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TokenState {
    pub holder: usize,
}

impl Model for TokenState {
    fn apply(&mut self, ev: &MeetingEvent) {
        if let Some(other) = ev.other(self.holder) {
            self.holder = other;
        }
    }
}
