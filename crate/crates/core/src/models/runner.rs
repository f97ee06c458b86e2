//! Executes a named rule into serializable trajectory records.
//!
//! [`run_rule`] is the single entry point behind the command-line `run`
//! command: it validates the rule spec against the geometry, drives the rule
//! over one replica's stream, and returns one JSON record per sample time
//! plus a run summary. Record fields per rule are documented on
//! [`run_rule`] and covered by golden-file tests, so they are a stable
//! interface.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::meetings::{MeetingProcess, StreamKey};
use crate::models::{
    drive_sampled, run_fashionista, AveragingInit, AveragingState, CoalescingState,
    DeferenceState, GamblerInit, GamblerState, InterchangeState, PandemicState, PenniesState,
    RuleSpec, TokenState, VoterState, VoterTwoState,
};
use crate::chain::{dirichlet_form, entropy, l2_norm, Generator};

/// Sampled records and summary of one rule execution.
#[derive(Clone, Debug)]
pub struct RuleRun {
    /// One JSON object per sample time; every record carries `t`.
    pub records: Vec<Value>,
    /// Run-level JSON summary: rule name, geometry, seed/replica, horizon,
    /// long-run class, and the absorption time when one occurred.
    pub summary: Value,
}

fn check_agent(name: &str, agent: usize, n: usize) -> Result<()> {
    if agent >= n {
        return Err(Error::invalid(format!("{name} {agent} out of range for n={n}")));
    }
    Ok(())
}

/// Runs `spec` on `g` over the stream identified by `key`, sampling at the
/// given ascending times within `[0, horizon]`.
///
/// Record schemas (all include `t`):
/// - `token`: `holder`
/// - `pandemic`: `infected` (count)
/// - `averaging`: `l2`, `dirichlet`, `entropy` (null unless the initial
///   configuration is a probability vector)
/// - `pennies`: `z1`, `z2`
/// - `voter`: `distinct`, `q`, `entropy`, `concordance`
/// - `voter_two`: `count`
/// - `coalescing`: `clusters`, `largest`
/// - `gambler`: `support`, `max_stake`
/// - `interchange`: `odd`, `fixed_points`
/// - `deference`: `shares` (proportions of labels `1..=top_k`), `cumulative`
/// - `fashionista`: `diversity`, `blocks`
pub fn run_rule(
    spec: &RuleSpec,
    g: &Geometry,
    key: StreamKey,
    horizon: f64,
    sample_times: &[f64],
) -> Result<RuleRun> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::invalid(format!("horizon must be finite and >= 0, got {horizon}")));
    }
    if sample_times.is_empty() {
        return Err(Error::invalid("at least one sample time is required"));
    }
    if sample_times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("sample times must be ascending"));
    }
    if sample_times.iter().any(|&t| !(0.0..=horizon).contains(&t)) {
        return Err(Error::invalid(format!(
            "sample times must lie within [0, horizon={horizon}]"
        )));
    }
    let n = g.n();
    let process = MeetingProcess::new(g);
    let events = || process.stream(key, Some(horizon));

    let (records, absorbed_at): (Vec<Value>, Option<f64>) = match spec {
        RuleSpec::Token { start } => {
            check_agent("token start", *start, n)?;
            let mut state = TokenState { holder: *start };
            drive_sampled(&mut state, events(), sample_times, |t, s| {
                json!({"t": t, "holder": s.holder})
            })
        }
        RuleSpec::Pandemic { source } => {
            check_agent("pandemic source", *source, n)?;
            let mut state = PandemicState::new(n, *source);
            drive_sampled(&mut state, events(), sample_times, |t, s| {
                json!({"t": t, "infected": s.infected_count()})
            })
        }
        RuleSpec::Averaging { init } => {
            let x0 = match init {
                AveragingInit::PointMass { agent } => {
                    check_agent("averaging point mass", *agent, n)?;
                    AveragingState::point_mass(n, *agent).x
                }
                AveragingInit::Values { x } => {
                    if x.len() != n {
                        return Err(Error::invalid(format!(
                            "averaging init has length {}, geometry has {n} agents",
                            x.len()
                        )));
                    }
                    x.clone()
                }
            };
            let gen = Generator::new(g);
            let probability = entropy(&x0).is_ok();
            let mut state = AveragingState::new(&x0);
            drive_sampled(&mut state, events(), sample_times, |t, s| {
                json!({
                    "t": t,
                    "l2": l2_norm(&s.x),
                    "dirichlet": dirichlet_form(&gen, &s.x),
                    "entropy": if probability { entropy(&s.x).ok() } else { None },
                })
            })
        }
        RuleSpec::Pennies { start: (i0, j0) } => {
            check_agent("first penny", *i0, n)?;
            check_agent("second penny", *j0, n)?;
            let mut state = PenniesState::new(*i0, *j0);
            drive_sampled(&mut state, events(), sample_times, |t, s| {
                json!({"t": t, "z1": s.z1, "z2": s.z2})
            })
        }
        RuleSpec::Voter => {
            let mut state = VoterState::new(n);
            drive_sampled(&mut state, events(), sample_times, |t, s| {
                json!({
                    "t": t,
                    "distinct": s.distinct(),
                    "q": s.q_statistic(),
                    "entropy": s.entropy_statistic(),
                    "concordance": s.concordance(g),
                })
            })
        }
        RuleSpec::VoterTwo { k } => {
            let mut state = VoterTwoState::new(n, *k)?;
            drive_sampled(&mut state, events(), sample_times, |t, s| {
                json!({"t": t, "count": s.count()})
            })
        }
        RuleSpec::Coalescing => {
            let mut state = CoalescingState::new(n);
            drive_sampled(&mut state, events(), sample_times, |t, s| {
                let blocks = s.block_sizes();
                json!({
                    "t": t,
                    "clusters": s.clusters(),
                    "largest": blocks.last().copied().unwrap_or(0),
                })
            })
        }
        RuleSpec::Gambler { stakes } => {
            let x0 = match stakes {
                GamblerInit::Equal => vec![1.0; n],
                GamblerInit::Values { x } => x.clone(),
            };
            let mut state = GamblerState::new(g, &x0)?;
            drive_sampled(&mut state, events(), sample_times, |t, s| {
                let max_stake = s.stakes().iter().cloned().fold(0.0f64, f64::max);
                json!({"t": t, "support": s.support().len(), "max_stake": max_stake})
            })
        }
        RuleSpec::Interchange => {
            let mut state = InterchangeState::new(n);
            drive_sampled(&mut state, events(), sample_times, |t, s| {
                let fixed = s.perm().iter().enumerate().filter(|&(i, &p)| i == p).count();
                json!({"t": t, "odd": s.odd(), "fixed_points": fixed})
            })
        }
        RuleSpec::Deference { top_k } => {
            if *top_k == 0 || *top_k > n {
                return Err(Error::invalid(format!(
                    "deference top_k={top_k} must be in 1..={n}"
                )));
            }
            let mut state = DeferenceState::new(n);
            drive_sampled(&mut state, events(), sample_times, |t, s| {
                json!({
                    "t": t,
                    "shares": s.proportions_top(*top_k),
                    "cumulative": s.cumulative_share(*top_k),
                })
            })
        }
        RuleSpec::Fashionista { rate, burn_in } => {
            let run = run_fashionista(g, *rate, key, *burn_in, sample_times)?;
            let records = run
                .samples
                .iter()
                .map(|s| {
                    json!({"t": s.t, "diversity": s.diversity, "blocks": s.block_sizes.len()})
                })
                .collect();
            (records, None)
        }
    };

    let summary = json!({
        "rule": spec.name(),
        "class": spec.absorption_class(),
        "geometry": g.label(),
        "n": n,
        "seed": key.seed,
        "replica": key.replica,
        "horizon": horizon,
        "samples": records.len(),
        "absorbed_at": absorbed_at,
    });
    Ok(RuleRun { records, summary })
}
