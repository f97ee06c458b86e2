//! Distributional identity between the opinion-copying and coalescing
//! rules.
//!
//! Run from all-distinct initial conditions, the partition of agents by
//! opinion at time `t` has the same law as the partition of tokens into
//! clusters at time `t`. A consequence: the expected concentration
//! statistic `Q(t)` equals the probability that two independent half-speed
//! walkers with uniform starts have met by `t`. [`voter_coalescing_duality_test`]
//! checks all of this by Monte Carlo on small geometries.

use std::collections::BTreeMap;

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::chain::Speed;
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::meetings::{exponential, replica_keys, MeetingProcess, StreamKey};
use crate::models::{drive_sampled, CoalescingState, VoterState};

/// Walks two independent chains from iid uniform starts until they occupy
/// the same agent; `max_time` truncates the search. Returns the meeting
/// time, or `None` if it exceeds `max_time`. Equal starts meet at time 0.
fn walk_until_meeting(
    g: &Geometry,
    key: StreamKey,
    speed: Speed,
    max_time: Option<f64>,
) -> Option<f64> {
    let factor = match speed {
        Speed::Full => 1.0,
        Speed::Half => 0.5,
    };
    let mut rng = key.meeting_rng();
    let n = g.n();
    let mut x = rng.random_range(0..n);
    let mut y = rng.random_range(0..n);
    let mut t = 0.0;
    while x != y {
        let rx = g.row_sum(x) * factor;
        let ry = g.row_sum(y) * factor;
        t += exponential(&mut rng, rx + ry);
        if let Some(cap) = max_time {
            if t > cap {
                return None;
            }
        }
        // Which walker jumps, then where, proportional to the rates.
        let mover_is_x = rng.random::<f64>() * (rx + ry) < rx;
        let from = if mover_is_x { x } else { y };
        let mut u = rng.random::<f64>() * g.row_sum(from);
        let mut dest = from;
        for &(j, rate) in g.neighbors(from) {
            if u < rate {
                dest = j;
                break;
            }
            u -= rate;
        }
        if mover_is_x {
            x = dest;
        } else {
            y = dest;
        }
    }
    Some(t)
}

/// Meeting time of two independent walkers with iid uniform starts (0 when
/// the starts coincide).
pub fn sample_meeting_time(g: &Geometry, key: StreamKey, speed: Speed) -> f64 {
    walk_until_meeting(g, key, speed, None).expect("uncapped walk always meets")
}

/// Whether two independent walkers with iid uniform starts meet by time `t`.
pub fn meeting_indicator(g: &Geometry, t: f64, key: StreamKey, speed: Speed) -> bool {
    walk_until_meeting(g, key, speed, Some(t)).is_some()
}

/// Monte Carlo comparison of the two partition laws at a fixed time.
#[derive(Clone, Debug)]
pub struct DualityReport {
    pub n: usize,
    pub t: f64,
    pub replicas: usize,
    /// Two-sample chi-squared on the block-size-multiset distributions.
    pub block_chi2: f64,
    pub block_df: usize,
    pub block_p: f64,
    /// Mean concentration statistic under each rule and the z-score of the
    /// difference.
    pub q_voter_mean: f64,
    pub q_coal_mean: f64,
    pub q_z: f64,
    /// Monte Carlo `P(half-speed walkers met by t)` and the z-score against
    /// the voter mean of `Q(t)`.
    pub meet_prob: f64,
    pub meet_z: f64,
    /// Fractions of runs not yet absorbed at `t` and the z-score of the
    /// difference.
    pub survival_voter: f64,
    pub survival_coal: f64,
    pub survival_z: f64,
}

impl DualityReport {
    /// All comparisons pass: chi-squared p-value above `alpha`, z-scores
    /// within 3.
    pub fn passes(&self, alpha: f64) -> bool {
        self.block_p > alpha
            && self.q_z.abs() <= 3.0
            && self.meet_z.abs() <= 3.0
            && self.survival_z.abs() <= 3.0
    }
}

/// z-score of a difference of two Monte Carlo means; 0 when both standard
/// errors vanish and the means agree.
fn joint_z(m1: f64, se1: f64, m2: f64, se2: f64) -> f64 {
    let se = (se1 * se1 + se2 * se2).sqrt();
    if se == 0.0 {
        if m1 == m2 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (m1 - m2) / se
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Two-sample chi-squared homogeneity test over category counts, pooling
/// rare categories (pooled expected count below 5) into one bucket.
/// Returns `(statistic, degrees of freedom, p-value)`.
fn chi_squared_homogeneity(counts1: &BTreeMap<Vec<usize>, usize>, counts2: &BTreeMap<Vec<usize>, usize>, n1: usize, n2: usize) -> Result<(f64, usize, f64)> {
    let mut combined: Vec<(usize, usize)> = Vec::new();
    let keys: std::collections::BTreeSet<_> = counts1.keys().chain(counts2.keys()).collect();
    for k in keys {
        combined.push((
            counts1.get(k).copied().unwrap_or(0),
            counts2.get(k).copied().unwrap_or(0),
        ));
    }
    // Pool categories whose pooled count is too small for the asymptotic
    // distribution to apply.
    combined.sort_by_key(|&(a, b)| std::cmp::Reverse(a + b));
    let total = (n1 + n2) as f64;
    let min_expected = 5.0;
    let mut kept: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (a, b) in combined {
        let pooled_total = (a + b) as f64;
        let exp_small = pooled_total * (n1.min(n2) as f64) / total;
        if exp_small >= min_expected {
            kept.push((a as f64, b as f64));
        } else {
            pooled.0 += a as f64;
            pooled.1 += b as f64;
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        kept.push(pooled);
    }
    if kept.len() < 2 {
        // Identical single-category distributions: nothing to test.
        return Ok((0.0, 0, 1.0));
    }
    let mut chi2 = 0.0;
    for &(a, b) in &kept {
        let row = a + b;
        let e1 = row * n1 as f64 / total;
        let e2 = row * n2 as f64 / total;
        chi2 += (a - e1).powi(2) / e1 + (b - e2).powi(2) / e2;
    }
    let df = kept.len() - 1;
    let dist = ChiSquared::new(df as f64)
        .map_err(|e| Error::numeric(format!("chi-squared distribution: {e}")))?;
    let p = 1.0 - dist.cdf(chi2);
    Ok((chi2, df, p))
}

/// Compares the opinion partition and the token-cluster partition at time
/// `t` by Monte Carlo: block-size multisets (chi-squared), mean `Q(t)`
/// (z-score), `Q(t)` against the walker meeting probability (z-score), and
/// the two absorption survival probabilities at `t` (z-score).
///
/// Limited to `n <= 10` so the partition distribution is concentrated on
/// few enough shapes for the chi-squared comparison.
pub fn voter_coalescing_duality_test(
    g: &Geometry,
    t: f64,
    replicas: usize,
    seed: u64,
) -> Result<DualityReport> {
    let n = g.n();
    if n > 10 {
        return Err(Error::unsupported(format!(
            "duality test compares partition distributions; n={n} exceeds the n <= 10 cap"
        )));
    }
    if replicas < 2 {
        return Err(Error::invalid("duality test needs at least 2 replicas"));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("time must be >= 0, got {t}")));
    }
    let process = MeetingProcess::new(g);
    let keys = replica_keys(seed, 3 * replicas);

    let mut voter_blocks: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut coal_blocks: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut voter_q = Vec::with_capacity(replicas);
    let mut coal_q = Vec::with_capacity(replicas);
    let mut voter_absorbed = 0usize;
    let mut coal_absorbed = 0usize;

    for key in &keys[..replicas] {
        let mut state = VoterState::new(n);
        let (mut obs, absorbed) =
            drive_sampled(&mut state, process.stream(*key, Some(t)), &[t], |_, s| {
                (s.block_sizes(), s.q_statistic())
            });
        let (blocks, q) = obs.pop().expect("one sample time");
        *voter_blocks.entry(blocks).or_insert(0) += 1;
        voter_q.push(q);
        if absorbed.is_some() {
            voter_absorbed += 1;
        }
    }
    for key in &keys[replicas..2 * replicas] {
        let mut state = CoalescingState::new(n);
        let (mut obs, absorbed) =
            drive_sampled(&mut state, process.stream(*key, Some(t)), &[t], |_, s| {
                let blocks = s.block_sizes();
                let q = blocks.iter().map(|&b| (b as f64 / n as f64).powi(2)).sum::<f64>();
                (blocks, q)
            });
        let (blocks, q) = obs.pop().expect("one sample time");
        *coal_blocks.entry(blocks).or_insert(0) += 1;
        coal_q.push(q);
        if absorbed.is_some() {
            coal_absorbed += 1;
        }
    }
    let met = keys[2 * replicas..]
        .iter()
        .filter(|&&key| meeting_indicator(g, t, key, Speed::Half))
        .count();

    let (block_chi2, block_df, block_p) =
        chi_squared_homogeneity(&voter_blocks, &coal_blocks, replicas, replicas)?;
    let (qv, qv_se) = mean_and_se(&voter_q);
    let (qc, qc_se) = mean_and_se(&coal_q);
    let meet_prob = met as f64 / replicas as f64;
    let meet_se = (meet_prob * (1.0 - meet_prob) / replicas as f64).sqrt();
    let sv = 1.0 - voter_absorbed as f64 / replicas as f64;
    let sc = 1.0 - coal_absorbed as f64 / replicas as f64;
    let sv_se = (sv * (1.0 - sv) / replicas as f64).sqrt();
    let sc_se = (sc * (1.0 - sc) / replicas as f64).sqrt();

    Ok(DualityReport {
        n,
        t,
        replicas,
        block_chi2,
        block_df,
        block_p,
        q_voter_mean: qv,
        q_coal_mean: qc,
        q_z: joint_z(qv, qv_se, qc, qc_se),
        meet_prob,
        meet_z: joint_z(qv, qv_se, meet_prob, meet_se),
        survival_voter: sv,
        survival_coal: sc,
        survival_z: joint_z(sv, sv_se, sc, sc_se),
    })
}
