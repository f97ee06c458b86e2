//! Implementations behind the `geometry`, `run`, and `suite` subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use fmie_core::experiments::{
    averaging_suite, deference_fashionista_suite, pandemic_limit_suite, voter_suite,
    window_profile_suite, wlln_suite, SuiteReport, SCHEMA_VERSION,
};
use fmie_core::geometry::{cut_profile, kappa, Geometry};
use fmie_core::meetings::StreamKey;
use fmie_core::models::run_rule;
use fmie_core::{Error, Result};

use crate::spec::{ExperimentConfig, GeometrySpec};

/// Prints text to `path`, or to stdout when no path is given. A closed
/// stdout (e.g. piping into `head`) is not an error.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, text)?;
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => Ok(other?),
            }
        }
    }
}

pub fn geometry_build(spec: &GeometrySpec, out: Option<&Path>) -> Result<()> {
    let g = spec.build()?;
    emit(out, &g.to_json())?;
    if out.is_some() {
        eprintln!("wrote geometry '{}' ({} agents, {} edges)", g.label(), g.n(), g.edges().len());
    }
    Ok(())
}

pub fn geometry_inspect(input: &Path) -> Result<()> {
    let g = Geometry::read_json_file(input)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..g.n() {
        let s = g.row_sum(i);
        lo = lo.min(s);
        hi = hi.max(s);
    }
    println!("label: {}", g.label());
    println!("agents: {}", g.n());
    println!("edges: {}", g.edges().len());
    println!("row-sum range: [{lo:.6}, {hi:.6}]");
    // Loading already rejects disconnected inputs, so a loaded geometry is
    // always irreducible; say so explicitly for scripts that grep this.
    println!("connectivity: irreducible");
    Ok(())
}

pub fn geometry_bottleneck(input: &Path) -> Result<()> {
    let g = Geometry::read_json_file(input)?;
    let profile = cut_profile(&g)?;
    let k = kappa(&g)?;
    println!("geometry: {} ({} agents)", g.label(), g.n());
    println!("kappa = {k:.6}");
    println!("{:>4}  {:>12}", "m", "phi(m)");
    for (i, phi) in profile.iter().enumerate() {
        println!("{:>4}  {:>12.6}", i + 1, phi);
    }
    Ok(())
}

/// Flag overrides applied on top of a run config.
#[derive(Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub horizon: Option<f64>,
    pub trajectory: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

pub fn run_from_config(path: &Path, over: RunOverrides) -> Result<()> {
    let mut config = ExperimentConfig::from_file(path)?;
    if let Some(seed) = over.seed {
        config.master_seed = Some(seed);
    }
    if let Some(replicas) = over.replicas {
        config.replicas = replicas;
    }
    if let Some(horizon) = over.horizon {
        config.horizon = horizon;
    }
    if let Some(trajectory) = over.trajectory {
        config.trajectory_out = Some(trajectory);
    }
    if let Some(summary) = over.summary {
        config.summary_out = Some(summary);
    }
    config.validate()?;
    let seed = config.master_seed.ok_or_else(|| {
        Error::invalid("a seed is required: set master_seed in the config or pass --seed")
    })?;
    let trajectory_path = config.trajectory_out.clone().ok_or_else(|| {
        Error::invalid("set trajectory_out in the config or pass --trajectory")
    })?;
    let summary_path = config.summary_out.clone().ok_or_else(|| {
        Error::invalid("set summary_out in the config or pass --summary")
    })?;

    let g = config.geometry.build()?;
    // One independent stream per replica; the loop is sequential because
    // replicas are few and records must land in replica order anyway.
    let mut runs = Vec::with_capacity(config.replicas);
    for replica in 0..config.replicas as u64 {
        let key = StreamKey::new(seed, replica);
        runs.push(run_rule(&config.model, &g, key, config.horizon, &config.sample_times)?);
    }

    let mut trajectory = String::new();
    for (replica, run) in runs.iter().enumerate() {
        for record in &run.records {
            let mut line = record.clone();
            line.as_object_mut()
                .expect("trajectory records are objects")
                .insert("replica".into(), json!(replica));
            trajectory.push_str(&serde_json::to_string(&line).expect("record serializes"));
            trajectory.push('\n');
        }
    }
    std::fs::write(&trajectory_path, trajectory)?;

    let summary = json!({
        "schema": SCHEMA_VERSION,
        "command": "run",
        "rule": config.model.name(),
        "class": config.model.absorption_class(),
        "geometry": g.label(),
        "n": g.n(),
        "seed": seed,
        "replicas": config.replicas,
        "horizon": config.horizon,
        "sample_times": config.sample_times,
        "per_replica": runs.iter().map(|r| r.summary.clone()).collect::<Vec<_>>(),
    });
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
    eprintln!(
        "ran {} on {} for {} replica(s); trajectory: {}, summary: {}",
        config.model.name(),
        g.label(),
        config.replicas,
        trajectory_path.display(),
        summary_path.display()
    );
    Ok(())
}

/// Everything a suite might need; each suite picks the parameters it uses
/// and applies its own defaults.
pub struct SuiteParams {
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub n: Option<usize>,
    pub geometry: Option<GeometrySpec>,
    pub times: Option<Vec<f64>>,
    pub eps: Option<f64>,
    pub k_max: Option<usize>,
    pub lambda_base: Option<f64>,
    pub tolerance: Option<f64>,
    pub x0_agent: Option<usize>,
}

impl SuiteParams {
    fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::invalid("this suite is stochastic; --seed is required"))
    }

    fn geometry(&self) -> Result<Geometry> {
        let spec = self
            .geometry
            .as_ref()
            .ok_or_else(|| Error::invalid("this suite needs --geometry (or --geometry-file)"))?;
        spec.build()
    }
}

pub const SUITE_NAMES: [&str; 6] = [
    "pandemic-limits",
    "averaging",
    "voter",
    "deference-fashionista",
    "window-profile",
    "wlln-concentration",
];

pub fn run_suite(name: &str, params: &SuiteParams) -> Result<SuiteReport> {
    match name {
        "pandemic-limits" => pandemic_limit_suite(
            params.n.unwrap_or(1000),
            params.replicas.unwrap_or(2000),
            params.seed()?,
        ),
        "averaging" => {
            let g = params.geometry()?;
            let agent = params.x0_agent.unwrap_or(0);
            if agent >= g.n() {
                return Err(Error::invalid(format!(
                    "--x0-agent {agent} out of range for n={}",
                    g.n()
                )));
            }
            let mut x0 = vec![0.0; g.n()];
            x0[agent] = 1.0;
            averaging_suite(&g, &x0, params.replicas.unwrap_or(2000), params.seed()?)
        }
        "voter" => {
            let g = params.geometry()?;
            let times = params.times.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0, 2.0, 4.0]);
            voter_suite(&g, params.replicas.unwrap_or(1000), &times, params.seed()?)
        }
        "deference-fashionista" => deference_fashionista_suite(
            params.n.unwrap_or(1000),
            params.k_max.unwrap_or(3),
            params.lambda_base.unwrap_or(4.0),
            params.replicas.unwrap_or(200),
            params.seed()?,
        ),
        "window-profile" => window_profile_suite(params.tolerance.unwrap_or(1e-8)),
        "wlln-concentration" => {
            let g = params.geometry()?;
            wlln_suite(&g, params.eps.unwrap_or(0.3), params.replicas.unwrap_or(200), params.seed()?)
        }
        other => Err(Error::invalid(format!(
            "unknown suite '{other}'; available: {}",
            SUITE_NAMES.join(", ")
        ))),
    }
}

/// Writes the report (JSON and optional CSV), prints one line per check,
/// and says whether all gated checks passed.
pub fn emit_suite_report(
    report: &SuiteReport,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> Result<bool> {
    emit(out, &report.to_json())?;
    if let Some(path) = csv {
        std::fs::write(path, report.to_csv())?;
    }
    let mut stderr = std::io::stderr().lock();
    for check in &report.checks {
        let verdict = if check.pass { "pass" } else { "FAIL" };
        let gate = if check.kind == fmie_core::experiments::CheckKind::Exploratory {
            " (exploratory)"
        } else {
            ""
        };
        writeln!(
            stderr,
            "[{verdict}] {}: value {:.6e} vs target {:.6e} (tol {:.3e}){gate}",
            check.name, check.value, check.target, check.tolerance
        )?;
    }
    let ok = report.passed();
    writeln!(
        stderr,
        "suite {}: {} ({} checks, {} gated failures)",
        report.suite,
        if ok { "PASS" } else { "FAIL" },
        report.checks.len(),
        report.failing().len()
    )?;
    Ok(ok)
}
