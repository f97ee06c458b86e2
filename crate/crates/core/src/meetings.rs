//! Poisson meeting processes over a geometry.
//!
//! Each unordered pair `{i, j}` with rate `nu_ij > 0` carries an independent
//! Poisson process; the union of all pair processes is the meeting stream.
//! Two interchangeable samplers produce that stream:
//!
//! - [`MeetingProcess::stream`]: superposition sampling. The next event time
//!   is an exponential with the aggregate rate, and the pair is drawn from an
//!   alias table weighted by the rates. O(1) per event after setup.
//! - [`MeetingProcess::per_edge_stream`]: a priority queue holding the next
//!   tentative time of every pair. O(log E) per event, but linear in the
//!   edge count at setup; useful as an independent cross-check.
//!
//! Every event carries a uniform direction bit (orienting the unordered pair
//! into source and target) and two auxiliary uniforms for rules that need
//! extra randomness at a meeting, so a rule driven by the same stream never
//! draws from the generator itself.
//!
//! # Reproducibility
//!
//! Randomness is ChaCha8 keyed by a 64-bit seed. A [`StreamKey`] pins the
//! seed and a replica index; replica `r` uses stream `2r` of the cipher for
//! the meeting stream and stream `2r + 1` for auxiliary model randomness
//! (originations, initial conditions). Replicas are therefore independent
//! and individually reproducible, regardless of how many threads consume
//! them.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::{self, Write};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;

use crate::geometry::Geometry;

/// One meeting: the pair `{a, b}` (with `a < b`), the event time, a uniform
/// direction bit, and two auxiliary uniforms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeetingEvent {
    /// Position in the stream, starting at 0; orders events with equal
    /// floating-point times.
    pub seq: u64,
    pub time: f64,
    pub a: usize,
    pub b: usize,
    /// Direction bit: the oriented pair is `a -> b` when false, `b -> a`
    /// when true.
    pub reversed: bool,
    /// Two independent uniforms on `[0, 1)` for the update rule's own use.
    pub aux: [f64; 2],
}

impl MeetingEvent {
    /// Origin of the oriented meeting.
    pub fn source(&self) -> usize {
        if self.reversed {
            self.b
        } else {
            self.a
        }
    }

    /// Destination of the oriented meeting.
    pub fn target(&self) -> usize {
        if self.reversed {
            self.a
        } else {
            self.b
        }
    }

    pub fn involves(&self, i: usize) -> bool {
        self.a == i || self.b == i
    }

    /// The partner of `i` in this meeting, if `i` is involved.
    pub fn other(&self, i: usize) -> Option<usize> {
        if self.a == i {
            Some(self.b)
        } else if self.b == i {
            Some(self.a)
        } else {
            None
        }
    }
}

/// Seed and replica index identifying one reproducible randomness lane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub replica: u64,
}

impl StreamKey {
    pub fn new(seed: u64, replica: u64) -> Self {
        StreamKey { seed, replica }
    }

    /// Generator for the meeting stream of this replica (cipher stream `2r`).
    pub fn meeting_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * self.replica);
        rng
    }

    /// Generator for auxiliary model randomness (cipher stream `2r + 1`),
    /// independent of the meeting stream.
    pub fn aux_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * self.replica + 1);
        rng
    }
}

/// Keys for `replicas` independent replicas under one master seed.
pub fn replica_keys(master_seed: u64, replicas: usize) -> Vec<StreamKey> {
    (0..replicas as u64).map(|r| StreamKey::new(master_seed, r)).collect()
}

/// Precomputed sampling tables for the meeting process of one geometry.
pub struct MeetingProcess {
    edges: Vec<(usize, usize, f64)>,
    total_rate: f64,
    alias: WeightedAliasIndex<f64>,
}

impl MeetingProcess {
    pub fn new(g: &Geometry) -> Self {
        let edges: Vec<(usize, usize, f64)> =
            g.edges().iter().map(|e| (e.a, e.b, e.rate)).collect();
        let total_rate = g.total_rate();
        let alias = WeightedAliasIndex::new(edges.iter().map(|&(_, _, r)| r).collect())
            .expect("validated geometry rates are positive and finite");
        MeetingProcess { edges, total_rate, alias }
    }

    /// Aggregate event rate (sum of all pair rates).
    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    /// Superposition sampler for the stream under `key`, emitting events up
    /// to `horizon` (unbounded when `None`).
    ///
    /// Per event the generator is consumed in a fixed order: gap, pair,
    /// direction, aux0, aux1. This order is part of the reproducibility
    /// contract.
    pub fn stream(&self, key: StreamKey, horizon: Option<f64>) -> EventStream<'_> {
        EventStream {
            process: self,
            rng: key.meeting_rng(),
            time: 0.0,
            seq: 0,
            horizon,
        }
    }

    /// Priority-queue sampler: same law as [`MeetingProcess::stream`], but a
    /// different algorithm and draw layout, for cross-validation.
    pub fn per_edge_stream(&self, key: StreamKey, horizon: Option<f64>) -> PerEdgeStream<'_> {
        let mut rng = key.meeting_rng();
        let mut queue = BinaryHeap::with_capacity(self.edges.len());
        for (idx, &(_, _, rate)) in self.edges.iter().enumerate() {
            let gap = exponential(&mut rng, rate);
            queue.push(Reverse((HeapTime(gap), idx)));
        }
        PerEdgeStream { process: self, rng, queue, seq: 0, horizon }
    }
}

/// Superposition-backend iterator over meeting events.
pub struct EventStream<'a> {
    process: &'a MeetingProcess,
    rng: ChaCha8Rng,
    time: f64,
    seq: u64,
    horizon: Option<f64>,
}

impl Iterator for EventStream<'_> {
    type Item = MeetingEvent;

    fn next(&mut self) -> Option<MeetingEvent> {
        self.time += exponential(&mut self.rng, self.process.total_rate);
        if let Some(h) = self.horizon {
            if self.time > h {
                return None;
            }
        }
        let (a, b, _) = self.process.edges[self.alias_pick()];
        let reversed = self.rng.random::<bool>();
        let aux = [self.rng.random::<f64>(), self.rng.random::<f64>()];
        let ev = MeetingEvent { seq: self.seq, time: self.time, a, b, reversed, aux };
        self.seq += 1;
        Some(ev)
    }
}

impl EventStream<'_> {
    fn alias_pick(&mut self) -> usize {
        self.process.alias.sample(&mut self.rng)
    }
}

/// Total-order wrapper so event times can live in a binary heap.
#[derive(Clone, Copy, Debug, PartialEq)]
struct HeapTime(f64);

impl Eq for HeapTime {}

impl Ord for HeapTime {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PartialOrd for HeapTime {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Priority-queue-backend iterator over meeting events.
pub struct PerEdgeStream<'a> {
    process: &'a MeetingProcess,
    rng: ChaCha8Rng,
    queue: BinaryHeap<Reverse<(HeapTime, usize)>>,
    seq: u64,
    horizon: Option<f64>,
}

impl Iterator for PerEdgeStream<'_> {
    type Item = MeetingEvent;

    fn next(&mut self) -> Option<MeetingEvent> {
        let Reverse((HeapTime(time), idx)) = self.queue.pop()?;
        if let Some(h) = self.horizon {
            if time > h {
                return None;
            }
        }
        let (a, b, rate) = self.process.edges[idx];
        let reversed = self.rng.random::<bool>();
        let aux = [self.rng.random::<f64>(), self.rng.random::<f64>()];
        let gap = exponential(&mut self.rng, rate);
        self.queue.push(Reverse((HeapTime(time + gap), idx)));
        let ev = MeetingEvent { seq: self.seq, time, a, b, reversed, aux };
        self.seq += 1;
        Some(ev)
    }
}

/// Exponential variate with the given rate via inversion; uses the open
/// upper tail so the result is always finite and positive.
pub(crate) fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// Writes events as CSV (`seq,time,a,b,reversed,aux0,aux1`) and returns the
/// number of rows written. Floats use the shortest exact decimal form, so
/// output is bit-stable across runs.
pub fn write_events_csv<W: Write>(
    events: impl Iterator<Item = MeetingEvent>,
    out: &mut W,
) -> io::Result<usize> {
    writeln!(out, "seq,time,a,b,reversed,aux0,aux1")?;
    let mut rows = 0;
    for ev in events {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            ev.seq, ev.time, ev.a, ev.b, ev.reversed as u8, ev.aux[0], ev.aux[1]
        )?;
        rows += 1;
    }
    Ok(rows)
}
