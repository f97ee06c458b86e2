//! Spread-time statistics of the pandemic rule on the complete graph:
//! exact means for the growth stages, Gumbel-type limits for the centered
//! spread times, and alignment of the infected-fraction curve with the
//! logistic profile after an empirical time shift.
//!
//! On the complete graph the jump from `k` to `k+1` infected happens at rate
//! `k(n-k)/(n-1)`, so the stage durations are independent exponentials.
//! Everything here is measured on mechanistic event-stream simulations and
//! compared against the closed forms that structure implies.

use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::ks::{ks_statistic, logistic_cdf, gumbel_sum_reference, Reference};
use crate::experiments::report::{Check, SuiteReport};
use crate::experiments::stats::{replicate, spearman, SummaryStats};
use crate::geometry::build_complete;
use crate::meetings::MeetingProcess;
use crate::models::pandemic_times;

/// Significance level for every KS check in the limit suites.
pub const KS_ALPHA: f64 = 0.01;

/// Harmonic number `h_k = sum_{j=1}^k 1/j` (`h_0 = 0`).
pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|j| 1.0 / j as f64).sum()
}

/// Exact mean time for the pandemic to reach everyone on the complete graph
/// of `n` agents: `(n-1) * sum_{k=1}^{n-1} 1/(k(n-k))`.
pub fn complete_completion_mean(n: usize) -> f64 {
    assert!(n >= 2, "completion mean needs n >= 2");
    (n - 1) as f64 * (1..n).map(|k| 1.0 / (k * (n - k)) as f64).sum::<f64>()
}

/// Sorted infection times from replicated pandemic runs on the complete
/// graph, seeded at agent 0. Entry `k` of a replica is the time the
/// `(k+1)`-th agent became infected (entry 0 is 0).
#[derive(Clone, Debug)]
pub struct PandemicSamples {
    n: usize,
    times: Vec<Vec<f64>>,
}

/// Runs `replicas` independent pandemics on the complete graph of `n`
/// agents and collects the sorted infection times of each.
pub fn sample_complete_pandemics(n: usize, replicas: usize, master_seed: u64) -> Result<PandemicSamples> {
    if n < 2 {
        return Err(Error::invalid(format!("pandemic sampling needs n >= 2, got {n}")));
    }
    if replicas < 2 {
        return Err(Error::invalid(format!("pandemic sampling needs >= 2 replicas, got {replicas}")));
    }
    let g = build_complete(n)?;
    let process = MeetingProcess::new(&g);
    let times = replicate(replicas, master_seed, |key| {
        let mut t = pandemic_times(n, 0, process.stream(key, None));
        t.sort_by(|a, b| a.total_cmp(b));
        t
    });
    Ok(PandemicSamples { n, times })
}

impl PandemicSamples {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn replicas(&self) -> usize {
        self.times.len()
    }

    /// Per-replica time at which the `k`-th agent was infected (`k = 1` is
    /// the seed at time 0, `k = n` is completion).
    pub fn spread_times(&self, k: usize) -> Vec<f64> {
        assert!(k >= 1 && k <= self.n, "spread stage out of range");
        self.times.iter().map(|t| t[k - 1]).collect()
    }

    /// Per-replica completion time.
    pub fn completion_times(&self) -> Vec<f64> {
        self.spread_times(self.n)
    }

    /// Per-replica mean infection time over the `n-1` non-seed agents: an
    /// unbiased estimate of the time until a uniformly chosen other agent
    /// is infected.
    pub fn random_target_means(&self) -> Vec<f64> {
        let share = (self.n - 1) as f64;
        self.times.iter().map(|t| t.iter().sum::<f64>() / share).collect()
    }

    /// Stage durations rescaled by their exact rates `k(n-k)/(n-1)`; under
    /// the complete-graph growth law these are iid unit exponentials,
    /// pooled across replicas.
    pub fn scaled_increments(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.times.len() * (n - 1));
        for t in &self.times {
            for k in 1..n {
                let rate = (k * (n - k)) as f64 / (n - 1) as f64;
                out.push((t[k] - t[k - 1]) * rate);
            }
        }
        out
    }

    /// Consecutive pairs of rescaled stage durations (pooled), for rank
    /// correlation: independence predicts correlation near 0.
    pub fn lagged_increment_pairs(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for t in &self.times {
            let mut prev: Option<f64> = None;
            for k in 1..n {
                let rate = (k * (n - k)) as f64 / (n - 1) as f64;
                let inc = (t[k] - t[k - 1]) * rate;
                if let Some(p) = prev {
                    xs.push(p);
                    ys.push(inc);
                }
                prev = Some(inc);
            }
        }
        (xs, ys)
    }

    /// Aligns each replica's infected-fraction curve by its own half-spread
    /// time `G = D(floor(n/2))` and compares it with the logistic profile on
    /// the given offsets. Returns (per-replica sup gaps, mean fraction per
    /// offset).
    pub fn window_alignment(&self, offsets: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let half = n / 2;
        let mut sup_gaps = Vec::with_capacity(self.times.len());
        let mut mean_frac = vec![0.0; offsets.len()];
        for t in &self.times {
            let center = t[half - 1];
            let mut sup: f64 = 0.0;
            for (j, off) in offsets.iter().enumerate() {
                let cutoff = center + off;
                let infected = t.partition_point(|v| *v <= cutoff);
                let frac = infected as f64 / n as f64;
                mean_frac[j] += frac / self.times.len() as f64;
                sup = sup.max((frac - logistic_cdf(*off)).abs());
            }
            sup_gaps.push(sup);
        }
        (sup_gaps, mean_frac)
    }
}

/// Offsets on which the aligned window curve is compared with the logistic
/// profile.
fn alignment_offsets() -> Vec<f64> {
    (0..=32).map(|i| -4.0 + 0.25 * i as f64).collect()
}

/// Limit-law battery for the pandemic on the complete graph:
/// exact means for the random-target and completion times, Gumbel limit of
/// the centered half-spread time, Gumbel-sum limit of the centered
/// completion time, logistic window alignment, and exactness/independence
/// of the rescaled stage durations.
pub fn pandemic_limit_suite(n: usize, replicas: usize, master_seed: u64) -> Result<SuiteReport> {
    if n < 200 {
        return Err(Error::invalid(format!("limit suite needs n >= 200, got {n}")));
    }
    if replicas < 50 {
        return Err(Error::invalid(format!("limit suite needs >= 50 replicas, got {replicas}")));
    }
    let samples = sample_complete_pandemics(n, replicas, master_seed)?;
    let mut report = SuiteReport::new(
        "pandemic-limits",
        json!({ "n": n, "replicas": replicas, "master_seed": master_seed }),
    );

    let target_stats = SummaryStats::from_samples(&samples.random_target_means())?;
    report.push(Check::identity(
        "random-target-mean",
        target_stats.mean,
        harmonic(n - 1),
        3.0 * target_stats.se,
    ));

    let completion = samples.completion_times();
    let completion_stats = SummaryStats::from_samples(&completion)?;
    report.push(Check::identity(
        "completion-mean",
        completion_stats.mean,
        complete_completion_mean(n),
        3.0 * completion_stats.se,
    ));

    let log_n = (n as f64).ln();
    let half_shifted: Vec<f64> =
        samples.spread_times(n / 2).iter().map(|t| t - log_n).collect();
    let half_ks = ks_statistic(&half_shifted, &Reference::Gumbel)?;
    report.push(Check::ks("half-spread-gumbel", half_ks.statistic, half_ks.critical(KS_ALPHA)));

    let completion_shifted: Vec<f64> = completion.iter().map(|t| t - 2.0 * log_n).collect();
    let sum_reference = Reference::Grid(gumbel_sum_reference().clone());
    let completion_ks = ks_statistic(&completion_shifted, &sum_reference)?;
    report.push(Check::ks(
        "completion-gumbel-sum",
        completion_ks.statistic,
        completion_ks.critical(KS_ALPHA),
    ));

    let offsets = alignment_offsets();
    let (sup_gaps, mean_frac) = samples.window_alignment(&offsets);
    let gap_mean = sup_gaps.iter().sum::<f64>() / sup_gaps.len() as f64;
    report.push(Check::bound("window-alignment-gap", gap_mean, 0.05));
    report.add_curve(
        "aligned-infected-fraction",
        offsets.iter().zip(&mean_frac).map(|(t, f)| [*t, *f]).collect(),
    );

    let increments = samples.scaled_increments();
    let inc_ks = ks_statistic(&increments, &Reference::Exponential { rate: 1.0 })?;
    report.push(Check::ks(
        "scaled-increment-exponential",
        inc_ks.statistic,
        inc_ks.critical(KS_ALPHA),
    ));
    let (lag_x, lag_y) = samples.lagged_increment_pairs();
    let rho = spearman(&lag_x, &lag_y)?;
    report.push(Check::identity(
        "increment-rank-correlation",
        rho,
        0.0,
        3.0 / ((lag_x.len() - 1) as f64).sqrt(),
    ));

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_forms_at_small_sizes() {
        // n = 3: random-target mean 1 + 1/2, completion mean 2.
        assert_relative_eq!(harmonic(2), 1.5);
        assert_relative_eq!(complete_completion_mean(3), 2.0, epsilon = 1e-15);
        // Partial fractions: (n-1) sum 1/(k(n-k)) = 2 (n-1) h_{n-1} / n.
        for n in [2usize, 5, 17, 64] {
            assert_relative_eq!(
                complete_completion_mean(n),
                2.0 * (n - 1) as f64 * harmonic(n - 1) / n as f64,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn small_complete_means_match_monte_carlo() {
        let samples = sample_complete_pandemics(3, 3000, 15_101).unwrap();
        let completion = SummaryStats::from_samples(&samples.completion_times()).unwrap();
        assert!(
            (completion.mean - 2.0).abs() <= 3.0 * completion.se,
            "completion mean {} se {}",
            completion.mean,
            completion.se
        );
        let target = SummaryStats::from_samples(&samples.random_target_means()).unwrap();
        assert!(
            (target.mean - 1.5).abs() <= 3.0 * target.se,
            "random-target mean {} se {}",
            target.mean,
            target.se
        );
    }

    #[test]
    fn rescaled_stage_durations_are_unit_exponential_and_independent() {
        let samples = sample_complete_pandemics(6, 500, 15_210).unwrap();
        let pooled = samples.scaled_increments();
        assert_eq!(pooled.len(), 500 * 5);
        let ks = ks_statistic(&pooled, &Reference::Exponential { rate: 1.0 }).unwrap();
        assert!(ks.passes(0.01), "pooled increments D = {}", ks.statistic);
        let (xs, ys) = samples.lagged_increment_pairs();
        let rho = spearman(&xs, &ys).unwrap();
        let bound = 3.0 / ((xs.len() - 1) as f64).sqrt();
        assert!(rho.abs() <= bound, "lagged correlation {rho} exceeds {bound}");
    }

    #[test]
    fn alignment_recovers_logistic_from_synthetic_logistic_times() {
        // Fabricated replica whose infection times are exact logistic
        // quantiles: the aligned curve must track the logistic profile to
        // within the 1/n quantization.
        let n = 1000;
        let times: Vec<f64> = (0..n)
            .map(|j| {
                let u = (j as f64 + 0.5) / n as f64;
                10.0 + (u / (1.0 - u)).ln()
            })
            .collect();
        let samples = PandemicSamples { n, times: vec![times] };
        let (sup_gaps, _) = samples.window_alignment(&alignment_offsets());
        assert!(sup_gaps[0] < 0.01, "synthetic sup gap {}", sup_gaps[0]);
    }

    #[test]
    fn limit_suite_passes_at_desk_scale() {
        let report = pandemic_limit_suite(200, 60, 15_322).unwrap();
        assert!(
            report.passed(),
            "failing checks: {:?}",
            report.failing().iter().map(|c| &c.name).collect::<Vec<_>>()
        );
        assert!(report.curves.contains_key("aligned-infected-fraction"));
        // Deterministic replay.
        let again = pandemic_limit_suite(200, 60, 15_322).unwrap();
        assert_eq!(report.to_json(), again.to_json());
    }

    #[test]
    fn preconditions_are_enforced() {
        assert!(sample_complete_pandemics(1, 10, 0).is_err());
        assert!(sample_complete_pandemics(5, 1, 0).is_err());
        assert!(pandemic_limit_suite(100, 60, 0).is_err());
        assert!(pandemic_limit_suite(200, 10, 0).is_err());
    }
}
