//! Monte Carlo verification battery for the averaging rule: exponential
//! decay of the L2 norm at the spectral-gap rate, the exact value of the
//! pathwise Dirichlet integral, and entropy behavior (monotonicity, and
//! decay of the entropy gap at the log-Sobolev rate when the constant is
//! computable).

use serde_json::json;

use crate::chain::{entropy, l2_norm, log_sobolev, mean, spectral_gap, variance, Generator};
use crate::chain::MAX_LOG_SOBOLEV_AGENTS;
use crate::error::{Error, Result};
use crate::experiments::report::{Check, SuiteReport};
use crate::experiments::stats::{replicate, SummaryStats};
use crate::geometry::Geometry;
use crate::meetings::MeetingProcess;
use crate::models::{averaging_dirichlet_integral, run_averaging};

/// Sample times for the decay checks.
const T_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// Decrease below this slack between consecutive sampled entropies counts as
/// a monotonicity violation (the rule increases entropy pathwise; the slack
/// absorbs float rounding only).
const ENTROPY_SLACK: f64 = 1e-9;

struct Replica {
    l2: Vec<f64>,
    entropy_gap: Option<Vec<f64>>,
    violations: usize,
    dirichlet: f64,
}

/// Runs the averaging rule from `x0` on `g` and checks:
/// - `E ||X(t)||_2 <= ||x0||_2 e^{-lambda t / 4}` at each grid time
///   (zero-mean `x0` only), one-sided with the Monte Carlo margin subtracted;
/// - the pathwise Dirichlet integral has mean `2 Var(x0)` (two-sided CI);
/// - entropy never decreases along sampled trajectories, and when `x0` is a
///   probability vector on at most 12 agents, the entropy gap decays at
///   least as fast as `exp(-alpha t / 2)` for the log-Sobolev constant
///   `alpha`.
pub fn averaging_suite(
    g: &Geometry,
    x0: &[f64],
    replicas: usize,
    master_seed: u64,
) -> Result<SuiteReport> {
    if x0.len() != g.n() {
        return Err(Error::invalid(format!(
            "initial configuration has {} entries for {} agents",
            x0.len(),
            g.n()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("initial configuration must be finite"));
    }
    if replicas < 2 {
        return Err(Error::invalid(format!("averaging suite needs >= 2 replicas, got {replicas}")));
    }

    let n = g.n();
    let gen = Generator::new(g);
    let lambda = spectral_gap(&gen)?;
    let scale = x0.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let zero_mean = mean(x0).abs() <= 1e-9 * scale;
    let start_entropy = entropy(x0).ok();
    let alpha = match start_entropy {
        Some(_) if n <= MAX_LOG_SOBOLEV_AGENTS => Some(log_sobolev(&gen)?),
        _ => None,
    };

    let process = MeetingProcess::new(g);
    let horizon = *T_GRID.last().unwrap();
    let log_n = (n as f64).ln();
    let runs: Vec<Replica> = replicate(replicas, master_seed, |key| {
        let samples = run_averaging(g, x0, process.stream(key, Some(horizon)), &T_GRID);
        let l2 = samples.iter().map(|s| s.l2).collect();
        let entropies: Option<Vec<f64>> =
            samples.iter().map(|s| s.entropy).collect::<Option<Vec<_>>>();
        let violations = entropies
            .as_deref()
            .map(|e| e.windows(2).filter(|w| w[1] < w[0] - ENTROPY_SLACK).count())
            .unwrap_or(0);
        let entropy_gap = entropies.map(|e| e.iter().map(|v| log_n - v).collect());
        // Same key, unbounded stream: replays the same trajectory beyond the
        // sampling horizon until the Dirichlet form has decayed away.
        let dirichlet = averaging_dirichlet_integral(g, x0, process.stream(key, None));
        Replica { l2, entropy_gap, violations, dirichlet }
    });

    let mut report = SuiteReport::new(
        "averaging",
        json!({
            "geometry": g.label(),
            "n": n,
            "x0": x0,
            "replicas": replicas,
            "master_seed": master_seed,
            "t_grid": T_GRID,
            "spectral_gap": lambda,
            "log_sobolev": alpha,
        }),
    );

    let mut l2_curve = Vec::new();
    for (j, t) in T_GRID.iter().enumerate() {
        let values: Vec<f64> = runs.iter().map(|r| r.l2[j]).collect();
        let stats = SummaryStats::from_samples(&values)?;
        l2_curve.push([*t, stats.mean]);
        if zero_mean {
            report.push(Check::bound_with_margin(
                format!("l2-decay-t{t}"),
                stats.mean,
                3.0 * stats.se,
                l2_norm(x0) * (-lambda * t / 4.0).exp(),
            ));
        }
    }
    report.add_curve("l2-mean", l2_curve);

    let integrals: Vec<f64> = runs.iter().map(|r| r.dirichlet).collect();
    let stats = SummaryStats::from_samples(&integrals)?;
    report.push(Check::identity(
        "dirichlet-integral",
        stats.mean,
        2.0 * variance(x0),
        3.0 * stats.se,
    ));

    if start_entropy.is_some() {
        let violations: usize = runs.iter().map(|r| r.violations).sum();
        report.push(Check::identity("entropy-monotone-violations", violations as f64, 0.0, 0.0));
        if let Some(alpha) = alpha {
            let gap0 = log_n - start_entropy.unwrap();
            let mut gap_curve = Vec::new();
            for (j, t) in T_GRID.iter().enumerate() {
                let gaps: Vec<f64> =
                    runs.iter().map(|r| r.entropy_gap.as_ref().unwrap()[j]).collect();
                let stats = SummaryStats::from_samples(&gaps)?;
                gap_curve.push([*t, stats.mean]);
                // The 1e-12 addend keeps an exactly-tight bound (uniform
                // start: gap 0 vs target 0) from failing on float rounding.
                report.push(Check::bound_with_margin(
                    format!("entropy-gap-t{t}"),
                    stats.mean,
                    3.0 * stats.se,
                    gap0 * (-alpha * t / 2.0).exp() + 1e-12,
                ));
            }
            report.add_curve("entropy-gap-mean", gap_curve);
        }
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_complete;
    use approx::assert_relative_eq;

    #[test]
    fn two_agent_antisymmetric_start_respects_gap_bound() {
        // K2 has spectral gap 2, so the L2 bound is e^{-t/2}; the true decay
        // e^{-t} sits safely below it at every grid time.
        let g = build_complete(2).unwrap();
        let report = averaging_suite(&g, &[1.0, -1.0], 800, 16_001).unwrap();
        assert!(
            report.passed(),
            "failing: {:?}",
            report.failing().iter().map(|c| &c.name).collect::<Vec<_>>()
        );
        let check = report.find("l2-decay-t1").expect("zero-mean start has L2 checks");
        assert_relative_eq!(check.target, (-0.5f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn uniform_probability_start_is_entirely_trivial() {
        // Uniform start: nothing moves, every functional sits at its fixed
        // point, and the entropy gap bound is tight at zero.
        let g = build_complete(4).unwrap();
        let report = averaging_suite(&g, &[0.25; 4], 50, 16_101).unwrap();
        assert!(report.passed());
        assert!(report.find("l2-decay-t1").is_none(), "uniform start is not zero-mean");
        let dirichlet = report.find("dirichlet-integral").unwrap();
        assert_eq!(dirichlet.value, 0.0);
        assert_eq!(dirichlet.target, 0.0);
        assert!(report.find("entropy-gap-t1").unwrap().pass);
        assert!(report.find("entropy-monotone-violations").unwrap().pass);
    }

    #[test]
    fn point_mass_dirichlet_integral_matches_twice_variance() {
        // K5 from a point mass: 2 Var = 2 (1/5 - 1/25) = 8/25.
        let g = build_complete(5).unwrap();
        let mut x0 = vec![0.0; 5];
        x0[0] = 1.0;
        let report = averaging_suite(&g, &x0, 2000, 16_201).unwrap();
        assert!(
            report.passed(),
            "failing: {:?}",
            report.failing().iter().map(|c| &c.name).collect::<Vec<_>>()
        );
        let check = report.find("dirichlet-integral").unwrap();
        assert_relative_eq!(check.target, 8.0 / 25.0, epsilon = 1e-15);
        assert!((check.value - check.target).abs() <= check.tolerance);
    }

    #[test]
    fn suite_is_deterministic() {
        let g = build_complete(3).unwrap();
        let a = averaging_suite(&g, &[1.0, 0.0, -1.0], 120, 16_301).unwrap();
        let b = averaging_suite(&g, &[1.0, 0.0, -1.0], 120, 16_301).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let g = build_complete(3).unwrap();
        assert!(averaging_suite(&g, &[1.0, 2.0], 10, 0).is_err());
        assert!(averaging_suite(&g, &[1.0, f64::NAN, 0.0], 10, 0).is_err());
        assert!(averaging_suite(&g, &[1.0, 2.0, 3.0], 1, 0).is_err());
    }
}
