//! Opinion-copying rule: the meeting's target adopts the source's opinion.
//!
//! Two variants share the update. [`VoterState`] starts from all-distinct
//! opinions and tracks the full partition of agents by opinion down to
//! consensus. [`VoterTwoState`] keeps only two opinions and records the
//! count of agents holding the first one, which on the complete graph is a
//! birth-and-death chain with symmetric rates `k(n-k)/(2(n-1))`; its
//! absorption expectations are computed exactly by
//! [`two_opinion_hitting_oracle`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::meetings::MeetingEvent;
use crate::models::Model;

/// Opinion partition of the full voter rule.
///
/// Opinions are labels `0..n`; agent `i` starts with label `i`. Once a
/// label's count hits zero it can never come back, so the partition only
/// coarsens and consensus (one surviving label) is absorbing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoterState {
    opinion: Vec<usize>,
    counts: Vec<usize>,
    distinct: usize,
}

impl VoterState {
    /// All agents hold distinct opinions (`opinion[i] = i`).
    pub fn new(n: usize) -> Self {
        VoterState { opinion: (0..n).collect(), counts: vec![1; n], distinct: n }
    }

    /// Starts from an explicit label assignment (labels must be `< n`).
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let n = labels.len();
        let mut counts = vec![0usize; n];
        for &l in labels {
            if l >= n {
                return Err(Error::invalid(format!("opinion label {l} out of range for n={n}")));
            }
            counts[l] += 1;
        }
        let distinct = counts.iter().filter(|&&c| c > 0).count();
        Ok(VoterState { opinion: labels.to_vec(), counts, distinct })
    }

    pub fn opinions(&self) -> &[usize] {
        &self.opinion
    }

    /// Number of opinions still held by at least one agent.
    pub fn distinct(&self) -> usize {
        self.distinct
    }

    /// Number of agents currently holding `label`.
    pub fn count(&self, label: usize) -> usize {
        self.counts[label]
    }

    /// Sorted sizes of the opinion blocks (the partition's shape).
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.counts.iter().copied().filter(|&c| c > 0).collect();
        sizes.sort_unstable();
        sizes
    }

    /// Concentration statistic `sum_labels (count/n)^2`: the probability
    /// that two independent uniform agents share an opinion.
    pub fn q_statistic(&self) -> f64 {
        let n = self.opinion.len() as f64;
        self.counts.iter().map(|&c| (c as f64 / n).powi(2)).sum()
    }

    /// Entropy of the opinion proportions, `-sum (c/n) ln(c/n)`; zero at
    /// consensus, `ln n` when all opinions are distinct.
    pub fn entropy_statistic(&self) -> f64 {
        let n = self.opinion.len() as f64;
        self.counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    }

    /// Probability that the endpoints of a rate-weighted random edge agree:
    /// `sum_{edges with equal opinions} rate / sum_edges rate`.
    pub fn concordance(&self, g: &Geometry) -> f64 {
        let mut same = 0.0;
        let mut total = 0.0;
        for e in g.edges() {
            total += e.rate;
            if self.opinion[e.a] == self.opinion[e.b] {
                same += e.rate;
            }
        }
        same / total
    }
}

impl Model for VoterState {
    fn apply(&mut self, ev: &MeetingEvent) {
        let new = self.opinion[ev.source()];
        let old = self.opinion[ev.target()];
        if old != new {
            self.counts[old] -= 1;
            if self.counts[old] == 0 {
                self.distinct -= 1;
            }
            self.counts[new] += 1;
            self.opinion[ev.target()] = new;
        }
    }

    fn absorbed(&self) -> bool {
        self.distinct == 1
    }
}

/// Two-opinion voter: tracks the count of agents holding the first opinion
/// and the jump times of that count.
#[derive(Clone, Debug, PartialEq)]
pub struct VoterTwoState {
    /// `true` marks the first opinion.
    holds_first: Vec<bool>,
    count: usize,
    /// `(time, new count)` at every event where the count changed.
    jumps: Vec<(f64, usize)>,
}

impl VoterTwoState {
    /// Agents `0..k` start with the first opinion, the rest with the second.
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::invalid(format!("first-opinion count k={k} must satisfy 1 <= k <= n-1 (n={n})")));
        }
        Ok(VoterTwoState {
            holds_first: (0..n).map(|i| i < k).collect(),
            count: k,
            jumps: Vec::new(),
        })
    }

    /// Current number of agents with the first opinion.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Jump record: `(time, new count)` for every change of the count.
    pub fn jumps(&self) -> &[(f64, usize)] {
        &self.jumps
    }
}

impl Model for VoterTwoState {
    fn apply(&mut self, ev: &MeetingEvent) {
        let new = self.holds_first[ev.source()];
        let old = self.holds_first[ev.target()];
        if old != new {
            self.holds_first[ev.target()] = new;
            if new {
                self.count += 1;
            } else {
                self.count -= 1;
            }
            self.jumps.push((ev.time, self.count));
        }
    }

    fn absorbed(&self) -> bool {
        self.count == 0 || self.count == self.holds_first.len()
    }
}

/// Exact expected absorption times for the two-opinion count on the
/// complete `n`-graph.
///
/// The count is a birth-and-death chain on `0..=n` with up and down rates
/// both `k(n-k)/(2(n-1))`; absorption is hitting `0` or `n`. Solves the
/// first-step equations `(lambda_k + mu_k) E_k = 1 + lambda_k E_{k+1} +
/// mu_k E_{k-1}` as a dense linear system. Returns `E_0..=E_n` (the
/// endpoints are zero).
pub fn two_opinion_hitting_oracle(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid("two-opinion chain needs n >= 2"));
    }
    let m = n - 1; // interior states 1..=n-1
    let rate = |k: usize| (k * (n - k)) as f64 / (2.0 * (n - 1) as f64);
    let mut a = DMatrix::<f64>::zeros(m, m);
    let rhs = DVector::<f64>::from_element(m, 1.0);
    for k in 1..n {
        let r = rate(k);
        let row = k - 1;
        a[(row, row)] = 2.0 * r;
        if k + 1 < n {
            a[(row, row + 1)] = -r;
        }
        if k > 1 {
            a[(row, row - 1)] = -r;
        }
    }
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numeric("two-opinion first-step system is singular"))?;
    let mut out = vec![0.0; n + 1];
    for k in 1..n {
        out[k] = sol[k - 1];
    }
    Ok(out)
}

/// A harmonic-number closed form sometimes quoted for the same expectation.
///
/// Exposed only so reports can compare it against
/// [`two_opinion_hitting_oracle`]: its index shifts are off (at `n = 2`,
/// `k = 1` it returns `-1` instead of `1`), so the linear-system values are
/// authoritative.
pub fn two_opinion_harmonic_formula(n: usize, k: usize) -> f64 {
    let h = |m: usize| (1..=m).map(|i| 1.0 / i as f64).sum::<f64>();
    let c = 2.0 * (n - 1) as f64 / n as f64;
    c * (k as f64 * (h(n - 1) - h(k + 1)) + (n - k) as f64 * (h(n - 1) - h(n - k + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::geometry::build_complete;
    use crate::meetings::{replica_keys, MeetingProcess};
    use crate::models::drive;

    /// Independent closed form for the oracle, derived by telescoping the
    /// second differences `E_{k+1} - 2 E_k + E_{k-1} = -1/r_k`:
    /// `E_k = (2(n-1)/n) [k (h_{n-1} - h_{k-1}) + (n-k)(h_{n-1} - h_{n-k})]`.
    fn hand_summed_expectation(n: usize, k: usize) -> f64 {
        let h = |m: usize| (1..=m).map(|i| 1.0 / i as f64).sum::<f64>();
        let c = 2.0 * (n - 1) as f64 / n as f64;
        c * (k as f64 * (h(n - 1) - h(k - 1)) + (n - k) as f64 * (h(n - 1) - h(n - k)))
    }

    #[test]
    fn oracle_matches_telescoped_closed_form() {
        for n in 2..=12 {
            let oracle = two_opinion_hitting_oracle(n).unwrap();
            assert_eq!(oracle[0], 0.0);
            assert_eq!(oracle[n], 0.0);
            for k in 1..n {
                assert_relative_eq!(oracle[k], hand_summed_expectation(n, k), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn harmonic_formula_disagrees_with_oracle_at_boundary() {
        // The quoted form goes negative where the true expectation is 1.
        assert_relative_eq!(two_opinion_harmonic_formula(2, 1), -1.0, epsilon = 1e-12);
        assert_relative_eq!(two_opinion_hitting_oracle(2).unwrap()[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn consensus_time_on_k2_has_mean_one() {
        // With two agents the first meeting forces consensus, so the
        // consensus time is Exponential(1).
        let g = build_complete(2).unwrap();
        let process = MeetingProcess::new(&g);
        let reps = 4000;
        let mut sum = 0.0;
        for key in replica_keys(1_755, reps) {
            let mut state = VoterState::new(2);
            let t = drive(&mut state, process.stream(key, None)).unwrap();
            sum += t;
        }
        let mean = sum / reps as f64;
        // Exponential(1): sd = 1, SE = 1/sqrt(reps).
        assert!((mean - 1.0).abs() < 3.0 / (reps as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn opinion_extinction_is_permanent_and_statistics_are_consistent() {
        let g = build_complete(6).unwrap();
        let process = MeetingProcess::new(&g);
        let key = replica_keys(42, 1)[0];
        let mut state = VoterState::new(6);
        let mut prev_alive: Vec<bool> = vec![true; 6];
        for ev in process.stream(key, None) {
            state.apply(&ev);
            let alive: Vec<bool> = (0..6).map(|l| state.count(l) > 0).collect();
            for l in 0..6 {
                assert!(!(alive[l] && !prev_alive[l]), "extinct opinion {l} returned");
            }
            prev_alive = alive;
            // The tracked counts always match the raw opinions.
            for l in 0..6 {
                let direct = state.opinions().iter().filter(|&&o| o == l).count();
                assert_eq!(state.count(l), direct);
            }
            if state.absorbed() {
                break;
            }
        }
        assert_eq!(state.distinct(), 1);
        assert_relative_eq!(state.q_statistic(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(state.entropy_statistic(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(state.concordance(&g), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fresh_state_statistics() {
        let g = build_complete(4).unwrap();
        let state = VoterState::new(4);
        assert_relative_eq!(state.q_statistic(), 0.25, epsilon = 1e-12);
        assert_relative_eq!(state.entropy_statistic(), (4.0f64).ln(), epsilon = 1e-12);
        assert_relative_eq!(state.concordance(&g), 0.0, epsilon = 1e-12);
        assert_eq!(state.block_sizes(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn two_opinion_jump_rates_match_birth_death_chain() {
        // On K6 the count jumps k -> k+1 and k -> k-1 each at rate
        // k(n-k)/(2(n-1)). Accumulate holding time and jump counts per
        // interior state over many replicas; each empirical rate
        // (jumps / time) should match within 4 sigma of sqrt(jumps)/time.
        let n = 6;
        let g = build_complete(n).unwrap();
        let process = MeetingProcess::new(&g);
        let mut time_at = vec![0.0f64; n + 1];
        let mut ups = vec![0usize; n + 1];
        let mut downs = vec![0usize; n + 1];
        for key in replica_keys(990_113, 800) {
            let mut state = VoterTwoState::new(n, 3).unwrap();
            let absorbed = drive(&mut state, process.stream(key, Some(200.0)));
            let end = absorbed.expect("two-opinion run on K6 should absorb well before t=200");
            let mut prev_t = 0.0;
            let mut prev_k = 3usize;
            for &(t, k) in state.jumps() {
                time_at[prev_k] += t - prev_t;
                if k > prev_k {
                    ups[prev_k] += 1;
                } else {
                    downs[prev_k] += 1;
                }
                prev_t = t;
                prev_k = k;
            }
            assert!((end - prev_t).abs() < 1e-12);
        }
        for k in 1..n {
            let expected = (k * (n - k)) as f64 / (2.0 * (n - 1) as f64);
            for (label, jumps) in [("up", ups[k]), ("down", downs[k])] {
                let rate = jumps as f64 / time_at[k];
                let sigma = (jumps as f64).sqrt() / time_at[k];
                assert!(
                    (rate - expected).abs() < 4.0 * sigma,
                    "state {k} {label}: empirical {rate} vs {expected} (sigma {sigma})"
                );
            }
        }
    }

    #[test]
    fn two_opinion_absorption_mean_matches_oracle() {
        let n = 6;
        let k = 3;
        let g = build_complete(n).unwrap();
        let process = MeetingProcess::new(&g);
        let reps = 3000;
        let mut times = Vec::with_capacity(reps);
        for key in replica_keys(5_517, reps) {
            let mut state = VoterTwoState::new(n, k).unwrap();
            let t = drive(&mut state, process.stream(key, None)).unwrap();
            times.push(t);
        }
        let mean: f64 = times.iter().sum::<f64>() / reps as f64;
        let var: f64 =
            times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        let target = two_opinion_hitting_oracle(n).unwrap()[k];
        assert!((mean - target).abs() < 3.0 * se, "mean {mean} vs oracle {target} (se {se})");
    }

    #[test]
    fn rejects_degenerate_initial_counts() {
        assert!(VoterTwoState::new(5, 0).is_err());
        assert!(VoterTwoState::new(5, 5).is_err());
        assert!(VoterState::from_labels(&[0, 7, 1]).is_err());
    }
}
