//! Late-stage share statistics for the label-minimizing (deference) rule
//! and stationary diversity scaling for the fashion-adoption rule.
//!
//! On the complete graph the fraction of agents holding a label `<= k` at
//! time `ln n`, pushed through the logit, converges to `log(Gamma(k, 1))`
//! — the log of a sum of `k` unit exponentials. The fashion rule has a
//! stationary partition whose diversity statistic `s` (probability that
//! two distinct uniform agents share a fashion) decays like `1/lambda` on
//! the complete graph and like `lambda^{-2/3} m^{-2/3}` on the `m x m`
//! torus inside the window `1/m << lambda << m^2`.

use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::ks::{ks_statistic, log_gamma_reference, Reference};
use crate::experiments::pandemic::KS_ALPHA;
use crate::experiments::report::{Check, SuiteReport};
use crate::experiments::stats::{least_squares_slope, replicate, SummaryStats};
use crate::geometry::{build_complete, build_torus, Geometry};
use crate::meetings::{replica_keys, MeetingProcess, StreamKey};
use crate::models::{drive_sampled, run_fashionista, DeferenceState};

/// Torus sides for the exploratory diversity-exponent scan.
const TORUS_SIDES: [usize; 3] = [32, 64, 128];
/// Fixed origination rate for the torus scan; sits comfortably inside the
/// validity window `1/m << lambda << m^2` for every side used.
const TORUS_LAMBDA: f64 = 4.0;
const TORUS_REPLICAS: usize = 4;

/// Logit-transformed cumulative shares of labels `1..=k` under the
/// deference rule on the complete graph, sampled at absolute time `ln n`,
/// one value per replica. A replica that has already reached full adoption
/// contributes `+inf`, which the empirical-CDF machinery handles.
///
/// For large `n` these converge in law to `log(Gamma(k, 1))`.
pub fn deference_share_logits(
    n: usize,
    k: usize,
    replicas: usize,
    master_seed: u64,
) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid(format!("deference shares need n >= 2, got {n}")));
    }
    if k == 0 || k >= n {
        return Err(Error::invalid(format!("label cutoff k={k} must satisfy 1 <= k < n")));
    }
    if replicas < 2 {
        return Err(Error::invalid(format!("need >= 2 replicas, got {replicas}")));
    }
    let g = build_complete(n)?;
    let process = MeetingProcess::new(&g);
    let t_star = (n as f64).ln();
    Ok(replicate(replicas, master_seed, |key| {
        let mut state = DeferenceState::new(n);
        let (samples, _) =
            drive_sampled(&mut state, process.stream(key, Some(t_star)), &[t_star], |_, m| {
                m.cumulative_share(k)
            });
        let share = samples[0];
        (share / (1.0 - share)).ln()
    }))
}

/// Per-replica diversity trajectories of the fashion rule: one inner vector
/// of `sample_times.len()` diversity values per key.
fn diversity_runs(
    g: &Geometry,
    rate: f64,
    keys: &[StreamKey],
    burn_in: f64,
    sample_times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    keys.par_iter()
        .map(|key| {
            let run = run_fashionista(g, rate, *key, burn_in, sample_times)?;
            Ok(run.samples.iter().map(|s| s.diversity).collect())
        })
        .collect()
}

/// Mean of each replica's time-averaged diversity, with its spread.
fn diversity_summary(runs: &[Vec<f64>]) -> Result<SummaryStats> {
    let means: Vec<f64> = runs
        .iter()
        .map(|r| r.iter().sum::<f64>() / r.len() as f64)
        .collect();
    SummaryStats::from_samples(&means)
}

/// Limit-law battery for the two late-time rules:
/// - deference on the complete `n`-graph: KS test of the logit cumulative
///   share at time `ln n` against `log(Gamma(k, 1))` for each `k <= k_max`;
/// - fashion rule on the same graph at rates `lambda_base * {1, 2, 4, 8}`:
///   a paired early/late stationarity check per rate and the log-log slope
///   of diversity against rate (target `-1`, fixed tolerance `0.15`);
/// - fashion rule on `m x m` tori, `m` in {32, 64, 128}, at a fixed rate:
///   log-log slope of diversity against `m` (target `-2/3`) — exploratory,
///   since desk-scale sides leave visible finite-size bias.
pub fn deference_fashionista_suite(
    n: usize,
    k_max: usize,
    lambda_base: f64,
    replicas: usize,
    master_seed: u64,
) -> Result<SuiteReport> {
    if n < 500 {
        return Err(Error::invalid(format!("limit tests need n >= 500, got {n}")));
    }
    if k_max == 0 || k_max > 3 {
        return Err(Error::invalid(format!("label cutoff k_max={k_max} must be 1, 2 or 3")));
    }
    if !(lambda_base > 0.0 && lambda_base.is_finite()) {
        return Err(Error::invalid(format!("origination rate must be positive, got {lambda_base}")));
    }
    if replicas < 50 {
        return Err(Error::invalid(format!(
            "KS and stationarity tests need >= 50 replicas, got {replicas}"
        )));
    }

    let mut report = SuiteReport::new(
        "deference-fashionista",
        json!({
            "n": n,
            "k_max": k_max,
            "lambda_base": lambda_base,
            "replicas": replicas,
            "master_seed": master_seed,
            "torus_sides": TORUS_SIDES,
            "torus_lambda": TORUS_LAMBDA,
        }),
    );

    for k in 1..=k_max {
        let logits = deference_share_logits(n, k, replicas, master_seed)?;
        let reference = Reference::Grid(log_gamma_reference(k)?);
        let test = ks_statistic(&logits, &reference)?;
        report.push(Check::ks(
            format!("share-logit-k{k}"),
            test.statistic,
            test.critical(KS_ALPHA),
        ));
    }

    // The same replica keys drive the deference runs above and the fashion
    // runs below; the two rules read the event and auxiliary lanes
    // differently, and replicas stay i.i.d. within each family.
    let g = build_complete(n)?;
    let keys = replica_keys(master_seed, replicas);
    let burn_in = 25.0;
    let times: Vec<f64> = (0..8).map(|j| burn_in + 2.0 * j as f64).collect();
    let half = times.len() / 2;
    let mut log_rates = Vec::new();
    let mut log_means = Vec::new();
    let mut rate_curve = Vec::new();
    for factor in [1.0, 2.0, 4.0, 8.0] {
        let rate = lambda_base * factor;
        let runs = diversity_runs(&g, rate, &keys, burn_in, &times)?;
        let drift: Vec<f64> = runs
            .iter()
            .map(|r| {
                let early: f64 = r[..half].iter().sum::<f64>() / half as f64;
                let late: f64 = r[half..].iter().sum::<f64>() / (r.len() - half) as f64;
                early - late
            })
            .collect();
        let drift = SummaryStats::from_samples(&drift)?;
        report.push(Check::identity(
            format!("stationarity-drift-lambda{rate}"),
            drift.mean,
            0.0,
            3.0 * drift.se,
        ));
        let s = diversity_summary(&runs)?;
        if !(s.mean > 0.0) {
            return Err(Error::numeric(format!(
                "diversity collapsed to zero at rate {rate}; cannot fit a log-log slope"
            )));
        }
        log_rates.push(rate.ln());
        log_means.push(s.mean.ln());
        rate_curve.push([rate, s.mean]);
    }
    let slope = least_squares_slope(&log_rates, &log_means)?;
    report.push(Check::identity("diversity-decay-slope", slope, -1.0, 0.15));
    report.add_curve("diversity-vs-rate", rate_curve);

    let torus_keys = replica_keys(master_seed, TORUS_REPLICAS);
    let mut log_sides = Vec::new();
    let mut log_side_means = Vec::new();
    let mut side_curve = Vec::new();
    for m in TORUS_SIDES {
        let torus = build_torus(m, 2)?;
        // Patch linear scale (m^2 / lambda)^{1/3}; burn several patch
        // lifetimes and space samples about one patch scale apart.
        let patch = ((m * m) as f64 / TORUS_LAMBDA).cbrt();
        let torus_burn = 12.0 * patch;
        let torus_times: Vec<f64> = (0..5).map(|j| torus_burn + j as f64 * patch).collect();
        let runs = diversity_runs(&torus, TORUS_LAMBDA, &torus_keys, torus_burn, &torus_times)?;
        let s = diversity_summary(&runs)?;
        if !(s.mean > 0.0) {
            return Err(Error::numeric(format!(
                "torus diversity collapsed to zero at side {m}; cannot fit a log-log slope"
            )));
        }
        log_sides.push((m as f64).ln());
        log_side_means.push(s.mean.ln());
        side_curve.push([m as f64, s.mean]);
    }
    let torus_slope = least_squares_slope(&log_sides, &log_side_means)?;
    report.push(Check::exploratory("torus-diversity-exponent", torus_slope, -2.0 / 3.0, 0.2));
    report.add_curve("torus-diversity-vs-side", side_curve);

    Ok(report)
}
