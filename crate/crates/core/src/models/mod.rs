//! Update rules driven by the meeting process.
//!
//! Every model here follows the same locality contract: its state lives on
//! the agents, and it changes only when a meeting event arrives, as a
//! function of the two states involved, the event's direction bit, and its
//! auxiliary uniforms. Because all randomness is carried by the event
//! stream, replaying one stream through a rule is deterministic — which is
//! what makes cross-rule couplings (spread comparisons, dualities) testable
//! path by path.
//!
//! Rules implement [`Model`]; [`drive`] and [`drive_sampled`] consume an
//! event iterator, stopping at absorption when the rule has absorbing
//! states. [`RuleSpec`] names each rule with its parameters for
//! configuration files, and [`run_rule`] executes a spec into serializable
//! trajectory records.

mod averaging;
mod coalescing;
mod deference;
mod duality;
mod fashionista;
mod fpp;
mod gambler;
mod interchange;
mod pandemic;
mod pennies;
mod runner;
mod token;
mod voter;

pub use averaging::{averaging_dirichlet_integral, run_averaging, AveragingSample, AveragingState};
pub use coalescing::CoalescingState;
pub use deference::DeferenceState;
pub use duality::{
    meeting_indicator, sample_meeting_time, voter_coalescing_duality_test, DualityReport,
};
pub use fashionista::{run_fashionista, FashionistaRun, FashionistaState};
pub use fpp::{fpp_distances, fpp_with_max_edge};
pub use gambler::GamblerState;
pub use interchange::{interchange_gap_bruteforce, InterchangeState};
pub use pandemic::{pandemic_times, PandemicState};
pub use pennies::{pennies_path, PenniesState};
pub use runner::{run_rule, RuleRun};
pub use token::TokenState;
pub use voter::{
    two_opinion_harmonic_formula, two_opinion_hitting_oracle, VoterState, VoterTwoState,
};

use serde::{Deserialize, Serialize};

use crate::meetings::MeetingEvent;

/// A state that evolves by consuming meeting events.
pub trait Model {
    /// Applies one meeting event (events must arrive in time order).
    fn apply(&mut self, ev: &MeetingEvent);

    /// Whether the state can no longer change; drivers stop early when true.
    fn absorbed(&self) -> bool {
        false
    }
}

/// Drives a model through an event stream until absorption or stream end.
/// Returns the absorption time if absorption occurred.
pub fn drive<M: Model>(model: &mut M, events: impl IntoIterator<Item = MeetingEvent>) -> Option<f64> {
    if model.absorbed() {
        return Some(0.0);
    }
    for ev in events {
        model.apply(&ev);
        if model.absorbed() {
            return Some(ev.time);
        }
    }
    None
}

/// Drives a model while sampling an observable at the given (ascending)
/// times. Each observation sees the state with every event up to that time
/// applied. Sample times past absorption observe the frozen state; sample
/// times past the end of a finite stream are only meaningful if the stream's
/// horizon covers them.
///
/// Returns the observations and the absorption time, if any.
pub fn drive_sampled<M: Model, T>(
    model: &mut M,
    events: impl IntoIterator<Item = MeetingEvent>,
    sample_times: &[f64],
    mut observe: impl FnMut(f64, &M) -> T,
) -> (Vec<T>, Option<f64>) {
    debug_assert!(sample_times.windows(2).all(|w| w[0] <= w[1]));
    let mut out = Vec::with_capacity(sample_times.len());
    let mut next = 0;
    let mut absorbed_at = if model.absorbed() { Some(0.0) } else { None };
    if absorbed_at.is_none() {
        for ev in events {
            while next < sample_times.len() && sample_times[next] < ev.time {
                out.push(observe(sample_times[next], model));
                next += 1;
            }
            model.apply(&ev);
            if model.absorbed() {
                absorbed_at = Some(ev.time);
                break;
            }
        }
    }
    while next < sample_times.len() {
        out.push(observe(sample_times[next], model));
        next += 1;
    }
    (out, absorbed_at)
}

/// Long-run behavior class of a rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbsorptionClass {
    /// Absorbs in one of a small number of consensus-like configurations.
    OrderedAbsorbing,
    /// Absorbs in one of a combinatorially large set of configurations.
    DisorderedAbsorbing,
    /// Converges to a stationary distribution instead of absorbing.
    Stationary,
}

impl std::fmt::Display for AbsorptionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AbsorptionClass::OrderedAbsorbing => "ordered-absorbing",
            AbsorptionClass::DisorderedAbsorbing => "disordered-absorbing",
            AbsorptionClass::Stationary => "stationary",
        };
        f.write_str(s)
    }
}

/// Initial condition for the averaging rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AveragingInit {
    /// All money on one agent.
    PointMass { agent: usize },
    /// Explicit vector.
    Values { x: Vec<f64> },
}

/// Initial stakes for the gambler rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GamblerInit {
    /// One unit per agent.
    Equal,
    /// Explicit stakes.
    Values { x: Vec<f64> },
}

fn default_top_k() -> usize {
    3
}

/// A named update rule with its parameters, as written in configuration
/// files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RuleSpec {
    Token { start: usize },
    Pandemic { source: usize },
    Averaging { init: AveragingInit },
    Pennies { start: (usize, usize) },
    Voter,
    VoterTwo { k: usize },
    Coalescing,
    Gambler { stakes: GamblerInit },
    Interchange,
    Deference {
        #[serde(default = "default_top_k")]
        top_k: usize,
    },
    Fashionista { rate: f64, burn_in: f64 },
}

impl RuleSpec {
    pub fn name(&self) -> &'static str {
        match self {
            RuleSpec::Token { .. } => "token",
            RuleSpec::Pandemic { .. } => "pandemic",
            RuleSpec::Averaging { .. } => "averaging",
            RuleSpec::Pennies { .. } => "pennies",
            RuleSpec::Voter => "voter",
            RuleSpec::VoterTwo { .. } => "voter_two",
            RuleSpec::Coalescing => "coalescing",
            RuleSpec::Gambler { .. } => "gambler",
            RuleSpec::Interchange => "interchange",
            RuleSpec::Deference { .. } => "deference",
            RuleSpec::Fashionista { .. } => "fashionista",
        }
    }

    /// Long-run class of this rule (fixed per rule, independent of
    /// geometry).
    pub fn absorption_class(&self) -> AbsorptionClass {
        match self {
            RuleSpec::Pandemic { .. }
            | RuleSpec::Averaging { .. }
            | RuleSpec::Voter
            | RuleSpec::VoterTwo { .. }
            | RuleSpec::Coalescing
            | RuleSpec::Deference { .. } => AbsorptionClass::OrderedAbsorbing,
            RuleSpec::Gambler { .. } => AbsorptionClass::DisorderedAbsorbing,
            RuleSpec::Token { .. } | RuleSpec::Pennies { .. } | RuleSpec::Interchange
            | RuleSpec::Fashionista { .. } => AbsorptionClass::Stationary,
        }
    }
}
