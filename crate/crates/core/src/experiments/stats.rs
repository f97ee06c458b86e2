//! Replica harness and summary statistics for Monte Carlo experiments.
//!
//! Every experiment runs as a set of independent replicas, one stream key per
//! replica, fanned out with rayon and merged back **by replica index** so the
//! result is identical regardless of how many worker threads execute the jobs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::meetings::{replica_keys, StreamKey};

/// Normal quantile used for the 95% confidence interval.
pub const Z_95: f64 = 1.96;

/// Count, mean, sample variance, standard error and 95% CI of a batch of
/// replica statistics.
#[derive(Clone, Copy, Debug)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub se: f64,
    /// `mean ± 1.96·se`.
    pub ci: (f64, f64),
}

impl SummaryStats {
    /// Summarizes a batch of at least two samples.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let count = samples.len();
        if count < 2 {
            return Err(Error::invalid(format!(
                "summary statistics need at least 2 samples, got {count}"
            )));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("non-finite sample {bad} in summary")));
        }
        let mean = samples.iter().sum::<f64>() / count as f64;
        let variance =
            samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64;
        let se = (variance / count as f64).sqrt();
        Ok(SummaryStats {
            count,
            mean,
            variance,
            se,
            ci: (mean - Z_95 * se, mean + Z_95 * se),
        })
    }

    /// Whether the 95% CI contains `value`.
    pub fn ci_covers(&self, value: f64) -> bool {
        self.ci.0 <= value && value <= self.ci.1
    }
}

/// Empirical CDF: sorted samples with the usual right-continuous step
/// evaluation `x -> #{samples <= x} / n`.
#[derive(Clone, Debug)]
pub struct Ecdf {
    values: Vec<f64>,
}

impl Ecdf {
    /// Sorts the samples; they may contain `+inf` (a statistic that never
    /// happened inside its observation window) but not NaN.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("empirical CDF needs at least one sample"));
        }
        if samples.iter().any(|v| v.is_nan()) {
            return Err(Error::numeric("NaN sample in empirical CDF"));
        }
        samples.sort_by(|a, b| a.total_cmp(b));
        Ok(Ecdf { values: samples })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sorted sample values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fraction of samples `<= x` (right-continuous step function).
    pub fn eval(&self, x: f64) -> f64 {
        let below = self.values.partition_point(|v| *v <= x);
        below as f64 / self.values.len() as f64
    }

    /// Order-statistic quantile with linear interpolation between ranks.
    pub fn quantile(&self, q: f64) -> f64 {
        assert!((0.0..=1.0).contains(&q), "quantile level out of range");
        let n = self.values.len();
        if n == 1 {
            return self.values[0];
        }
        let pos = q * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        self.values[lo] * (1.0 - frac) + self.values[hi] * frac
    }
}

/// Runs `job` once per replica (replica `r` gets `StreamKey::new(master_seed,
/// r)`) in parallel and returns the results ordered by replica index. The
/// output is a pure function of `master_seed` and `replicas` — thread count
/// and scheduling cannot affect it.
pub fn replicate<T, F>(replicas: usize, master_seed: u64, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(StreamKey) -> T + Sync + Send,
{
    replica_keys(master_seed, replicas).into_par_iter().map(job).collect()
}

/// Monte Carlo estimate of a scalar statistic: one replica per stream key,
/// summarized with mean / variance / SE / CI.
pub fn monte_carlo<F>(replicas: usize, master_seed: u64, statistic: F) -> Result<SummaryStats>
where
    F: Fn(StreamKey) -> f64 + Sync + Send,
{
    if replicas < 2 {
        return Err(Error::invalid(format!("monte carlo needs >= 2 replicas, got {replicas}")));
    }
    SummaryStats::from_samples(&replicate(replicas, master_seed, statistic))
}

/// Same harness, collecting the replica statistics into an empirical CDF.
pub fn monte_carlo_ecdf<F>(replicas: usize, master_seed: u64, statistic: F) -> Result<Ecdf>
where
    F: Fn(StreamKey) -> f64 + Sync + Send,
{
    if replicas < 2 {
        return Err(Error::invalid(format!("monte carlo needs >= 2 replicas, got {replicas}")));
    }
    Ecdf::new(replicate(replicas, master_seed, statistic))
}

/// Spearman rank correlation with average ranks for ties. Used as an
/// independence diagnostic (near 0 for independent pairs).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("rank correlation needs equal-length samples"));
    }
    if xs.len() < 3 {
        return Err(Error::invalid("rank correlation needs at least 3 pairs"));
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::numeric("rank correlation undefined for a constant sample"));
    }
    Ok(cov / (vx * vy).sqrt())
}

/// Average ranks (1-based) with ties sharing the mean rank of their run.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the average of ranks i+1..=j+1.
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            out[idx] = avg;
        }
        i = j + 1;
    }
    out
}

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("slope fit needs two equal-length samples of >= 2 points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope fit needs at least two distinct x values"));
    }
    Ok(sxy / sxx)
}
