//! Fashion-adoption rule: meetings spread the newest fashion; fresh
//! fashions keep arriving.
//!
//! Every agent carries the timestamp of the fashion it follows. At a
//! meeting both parties keep the later stamp, so any one fashion spreads
//! like an epidemic — but an independent Poisson process (rate
//! `lambda`) keeps originating brand-new fashions at uniformly random
//! agents, which displaces old ones and keeps the population from settling.
//! The balance of the two effects has a stationary regime, summarized by
//! the diversity statistic `s`: the probability that two distinct uniform
//! agents follow the same fashion.
//!
//! Stamps are `(time, sequence)` pairs ordered lexicographically; the
//! sequence number breaks the measure-zero time ties.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::meetings::{exponential, MeetingEvent, MeetingProcess, StreamKey};
use crate::models::Model;

/// Per-agent fashion stamps.
#[derive(Clone, Debug, PartialEq)]
pub struct FashionistaState {
    /// `(origination time, origination sequence number)` per agent;
    /// everyone starts on the founding fashion `(0, 0)`.
    stamp: Vec<(f64, u64)>,
}

impl FashionistaState {
    pub fn new(n: usize) -> Self {
        FashionistaState { stamp: vec![(0.0, 0); n] }
    }

    pub fn stamps(&self) -> &[(f64, u64)] {
        &self.stamp
    }

    /// A brand-new fashion appears at `agent`.
    pub fn originate(&mut self, agent: usize, time: f64, seq: u64) {
        self.stamp[agent] = (time, seq);
    }

    /// Sorted sizes of the same-fashion blocks.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sorted = self.stamp.clone();
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut sizes = Vec::new();
        let mut run = 1usize;
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                sizes.push(run);
                run = 1;
            }
        }
        sizes.push(run);
        sizes.sort_unstable();
        sizes
    }

    /// Probability that two distinct uniform agents share a fashion:
    /// `sum_blocks n_b (n_b - 1) / (n (n - 1))`, by exhaustive counting.
    pub fn diversity(&self) -> f64 {
        let n = self.stamp.len();
        let same: usize = self.block_sizes().iter().map(|&b| b * (b - 1)).sum();
        same as f64 / (n * (n - 1)) as f64
    }
}

impl Model for FashionistaState {
    fn apply(&mut self, ev: &MeetingEvent) {
        let newest = if self.stamp[ev.a] >= self.stamp[ev.b] {
            self.stamp[ev.a]
        } else {
            self.stamp[ev.b]
        };
        self.stamp[ev.a] = newest;
        self.stamp[ev.b] = newest;
    }
}

/// One partition sample of a fashionista run.
#[derive(Clone, Debug)]
pub struct FashionistaSample {
    pub t: f64,
    /// Same-fashion probability for two distinct uniform agents.
    pub diversity: f64,
    pub block_sizes: Vec<usize>,
}

/// A fashionista run's sampled observations.
#[derive(Clone, Debug)]
pub struct FashionistaRun {
    pub rate: f64,
    pub samples: Vec<FashionistaSample>,
}

/// Runs the rule with origination rate `rate`, sampling the partition at
/// the given absolute times (ascending, all at or past `burn_in`).
///
/// Meetings come from the key's meeting lane; originations are an
/// independent Poisson process on the auxiliary lane. Per origination the
/// auxiliary generator is consumed in a fixed order — uniform agent, then
/// next gap — with one initial gap drawn up front; this order is part of
/// the reproducibility contract. An origination and a meeting never tie in
/// exact arithmetic; ties resolve toward the origination.
pub fn run_fashionista(
    g: &Geometry,
    rate: f64,
    key: StreamKey,
    burn_in: f64,
    sample_times: &[f64],
) -> Result<FashionistaRun> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid(format!("origination rate must be positive, got {rate}")));
    }
    if !(burn_in >= 0.0) {
        return Err(Error::invalid(format!("burn-in must be >= 0, got {burn_in}")));
    }
    if sample_times.is_empty() {
        return Err(Error::invalid("at least one sample time is required"));
    }
    if sample_times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("sample times must be ascending"));
    }
    if sample_times[0] < burn_in {
        return Err(Error::invalid(format!(
            "sample times are absolute and must be >= burn_in {burn_in}; got {}",
            sample_times[0]
        )));
    }
    let n = g.n();
    let process = MeetingProcess::new(g);
    let horizon = *sample_times.last().expect("nonempty");
    let mut meetings = process.stream(key, Some(horizon)).peekable();
    let mut aux = key.aux_rng();
    let mut state = FashionistaState::new(n);
    let mut next_orig = exponential(&mut aux, rate);
    let mut orig_seq = 0u64;
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut next_sample = 0usize;
    loop {
        let upcoming = match meetings.peek() {
            Some(ev) => next_orig.min(ev.time),
            None => next_orig,
        };
        while next_sample < sample_times.len() && sample_times[next_sample] < upcoming {
            let t = sample_times[next_sample];
            samples.push(FashionistaSample {
                t,
                diversity: state.diversity(),
                block_sizes: state.block_sizes(),
            });
            next_sample += 1;
        }
        if next_sample == sample_times.len() {
            break;
        }
        if meetings.peek().is_none_or(|ev| next_orig <= ev.time) {
            let agent = aux.random_range(0..n);
            orig_seq += 1;
            state.originate(agent, next_orig, orig_seq);
            next_orig += exponential(&mut aux, rate);
        } else {
            let ev = meetings.next().expect("peeked");
            state.apply(&ev);
        }
    }
    Ok(FashionistaRun { rate, samples })
}
