//! Averaging rule: meeting agents split their money equally.
//!
//! The configuration contracts toward the constant vector; total money is
//! conserved, the maximum can only fall and the minimum can only rise, and
//! for probability initializations the entropy can only increase. The mean
//! configuration follows the associated chain at half speed.

use crate::chain::{dirichlet_form, entropy, l2_norm, Generator};
use crate::geometry::Geometry;
use crate::meetings::MeetingEvent;
use crate::models::{drive_sampled, Model};

/// Money vector of the averaging process.
#[derive(Clone, Debug, PartialEq)]
pub struct AveragingState {
    pub x: Vec<f64>,
}

impl AveragingState {
    pub fn new(x0: &[f64]) -> Self {
        AveragingState { x: x0.to_vec() }
    }

    /// Point mass: one unit of money on `agent`.
    pub fn point_mass(n: usize, agent: usize) -> Self {
        assert!(agent < n, "agent out of range");
        let mut x = vec![0.0; n];
        x[agent] = 1.0;
        AveragingState { x }
    }
}

impl Model for AveragingState {
    fn apply(&mut self, ev: &MeetingEvent) {
        let split = (self.x[ev.a] + self.x[ev.b]) / 2.0;
        self.x[ev.a] = split;
        self.x[ev.b] = split;
    }
}

/// One sampled observation of an averaging run.
#[derive(Clone, Debug)]
pub struct AveragingSample {
    pub t: f64,
    pub x: Vec<f64>,
    /// `||x||_2` under the uniform distribution.
    pub l2: f64,
    /// Dirichlet form of the current configuration.
    pub dirichlet: f64,
    /// Entropy, present when the initial configuration is a probability
    /// vector (the rule preserves that property).
    pub entropy: Option<f64>,
}

/// Runs averaging from `x0`, sampling the configuration and its functionals
/// at the given ascending times.
pub fn run_averaging(
    g: &Geometry,
    x0: &[f64],
    events: impl IntoIterator<Item = MeetingEvent>,
    sample_times: &[f64],
) -> Vec<AveragingSample> {
    assert_eq!(x0.len(), g.n(), "initial configuration length mismatch");
    let gen = Generator::new(g);
    let probability = entropy(x0).is_ok();
    let mut state = AveragingState::new(x0);
    let (samples, _) = drive_sampled(&mut state, events, sample_times, |t, m| AveragingSample {
        t,
        x: m.x.clone(),
        l2: l2_norm(&m.x),
        dirichlet: dirichlet_form(&gen, &m.x),
        entropy: if probability { entropy(&m.x).ok() } else { None },
    });
    samples
}

/// Exact pathwise Dirichlet integral `int_0^inf E(X(t), X(t)) dt`: the form
/// is piecewise constant between events, so the integral is a finite sum.
/// The run stops once the form has decayed below `1e-13` times its initial
/// value (the remaining tail is negligible at that point).
pub fn averaging_dirichlet_integral(
    g: &Geometry,
    x0: &[f64],
    events: impl IntoIterator<Item = MeetingEvent>,
) -> f64 {
    let gen = Generator::new(g);
    let mut state = AveragingState::new(x0);
    let mut current = dirichlet_form(&gen, &state.x);
    let floor = current * 1e-13;
    let mut integral = 0.0;
    let mut last_time = 0.0;
    for ev in events {
        integral += current * (ev.time - last_time);
        last_time = ev.time;
        state.apply(&ev);
        current = dirichlet_form(&gen, &state.x);
        if current <= floor {
            break;
        }
    }
    integral
}
