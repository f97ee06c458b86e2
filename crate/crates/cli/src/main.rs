//! `fmie` — build meeting geometries, run information-exchange rules, and
//! execute the verification suites, from the command line.
//!
//! Exit codes (stable for scripting): 0 success, 2 usage or malformed
//! input, 3 size above a supported cap, 4 numeric failure, 5 one or more
//! gated suite checks failed (the report is still written).

mod commands;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{RunOverrides, SuiteParams};
use fmie_core::{Error, Result};
use spec::GeometrySpec;

#[derive(Parser)]
#[command(name = "fmie", version, about = "Finite Markov information exchange toolkit")]
struct Cli {
    /// Worker threads for replica parallelism (default: FMIE_THREADS env
    /// var, then all cores). Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, inspect, or analyze meeting geometries
    Geometry {
        #[command(subcommand)]
        cmd: GeometryCmd,
    },
    /// Run one update rule from a JSON config; writes a JSONL trajectory
    /// and a JSON summary
    Run(RunArgs),
    /// Run a named verification suite and write its report
    Suite(SuiteArgs),
}

#[derive(Subcommand)]
enum GeometryCmd {
    /// Build a named geometry and write its JSON
    Build {
        #[command(subcommand)]
        builder: BuilderCmd,
        /// Output file (default: stdout)
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Print size, edge count, row-sum range, and connectivity
    Inspect {
        /// Geometry JSON file
        #[arg(long)]
        input: PathBuf,
    },
    /// Print the bottleneck coefficient and the normalized cut profile
    Bottleneck {
        /// Geometry JSON file
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum BuilderCmd {
    /// Complete graph on n agents, pairwise rate 1/(n-1)
    Complete {
        #[arg(long)]
        n: usize,
    },
    /// Discrete torus Z_side^dim, nearest-neighbor rate 1/(2 dim)
    Torus {
        #[arg(long)]
        side: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Path on k agents, unit-rate edges
    Path {
        #[arg(long)]
        k: usize,
    },
    /// Star with k leaves, unit-rate spokes
    Star {
        #[arg(long)]
        k: usize,
    },
    /// Hamming cube {0,1}^d, rate 1/d per coordinate
    Hamming {
        #[arg(long)]
        d: usize,
    },
    /// Torus plus random shortcuts with density extra-density * r^-gamma
    SmallWorld {
        #[arg(long)]
        side: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        extra_density: f64,
        /// Seed for the shortcut draw (part of the geometry's identity)
        #[arg(long)]
        seed: u64,
    },
    /// Torus plus r^-gamma long-range rates, rows normalized to 1
    LongRangeTorus {
        #[arg(long)]
        side: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        gamma: f64,
    },
    /// 2d torus with weak uniform long-range rates summing to side^-alpha
    TwoScaleTorus {
        #[arg(long)]
        side: usize,
        #[arg(long)]
        alpha: f64,
    },
    /// Configuration-model random graph; degrees as "deg:prob,deg:prob"
    ConfigModel {
        #[arg(long)]
        degrees: String,
        #[arg(long)]
        n: usize,
        /// Seed for the pairing draw (part of the geometry's identity)
        #[arg(long)]
        seed: u64,
    },
}

impl BuilderCmd {
    fn to_spec(&self) -> Result<GeometrySpec> {
        Ok(match self {
            BuilderCmd::Complete { n } => GeometrySpec::Complete { n: *n },
            BuilderCmd::Torus { side, dim } => GeometrySpec::Torus { side: *side, dim: *dim },
            BuilderCmd::Path { k } => GeometrySpec::Path { k: *k },
            BuilderCmd::Star { k } => GeometrySpec::Star { k: *k },
            BuilderCmd::Hamming { d } => GeometrySpec::Hamming { d: *d },
            BuilderCmd::SmallWorld { side, dim, gamma, extra_density, seed } => {
                GeometrySpec::SmallWorld {
                    side: *side,
                    dim: *dim,
                    gamma: *gamma,
                    extra_density: *extra_density,
                    seed: *seed,
                }
            }
            BuilderCmd::LongRangeTorus { side, dim, gamma } => {
                GeometrySpec::LongRangeTorus { side: *side, dim: *dim, gamma: *gamma }
            }
            BuilderCmd::TwoScaleTorus { side, alpha } => {
                GeometrySpec::TwoScaleTorus { side: *side, alpha: *alpha }
            }
            BuilderCmd::ConfigModel { degrees, n, seed } => GeometrySpec::ConfigModel {
                degrees: parse_degrees(degrees)?,
                n: *n,
                seed: *seed,
            },
        })
    }
}

fn parse_degrees(text: &str) -> Result<Vec<(usize, f64)>> {
    text.split(',')
        .map(|part| {
            let (d, p) = part
                .split_once(':')
                .ok_or_else(|| Error::invalid(format!("degree entry '{part}' is not deg:prob")))?;
            let d = d
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::invalid(format!("bad degree in '{part}': {e}")))?;
            let p = p
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad probability in '{part}': {e}")))?;
            Ok((d, p))
        })
        .collect()
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's replica count
    #[arg(long)]
    replicas: Option<usize>,
    /// Override the config's horizon
    #[arg(long)]
    horizon: Option<f64>,
    /// Override the trajectory output path
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Override the summary output path
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// One of: pandemic-limits, averaging, voter, deference-fashionista,
    /// window-profile, wlln-concentration
    name: String,
    /// Master seed (required for every stochastic suite)
    #[arg(long)]
    seed: Option<u64>,
    /// Replicas per Monte Carlo estimate (suite-specific default)
    #[arg(long)]
    replicas: Option<usize>,
    /// Agent count for suites that build their own complete graph
    #[arg(long)]
    n: Option<usize>,
    /// Geometry builder name (complete, torus, path, star, hamming,
    /// long-range-torus, two-scale-torus) with its flags below
    #[arg(long)]
    geometry: Option<String>,
    /// Geometry JSON file (alternative to --geometry)
    #[arg(long)]
    geometry_file: Option<PathBuf>,
    /// Torus side length for --geometry torus / long-range-torus / two-scale-torus
    #[arg(long)]
    side: Option<usize>,
    /// Torus dimension (default 2)
    #[arg(long)]
    dim: Option<usize>,
    /// Agent count for --geometry path / star
    #[arg(long)]
    k: Option<usize>,
    /// Cube dimension for --geometry hamming
    #[arg(long)]
    d: Option<usize>,
    /// Long-range decay exponent
    #[arg(long)]
    gamma: Option<f64>,
    /// Long-range total-rate exponent for two-scale-torus
    #[arg(long)]
    alpha: Option<f64>,
    /// Sample times for the voter suite, comma-separated
    #[arg(long)]
    times: Option<String>,
    /// Relative tolerance for the concentration suite
    #[arg(long)]
    eps: Option<f64>,
    /// Deference labels tested (1..=k_max)
    #[arg(long)]
    k_max: Option<usize>,
    /// Base origination rate for the fashionista scan
    #[arg(long)]
    lambda_base: Option<f64>,
    /// Convergence tolerance for the window-profile solver
    #[arg(long)]
    tolerance: Option<f64>,
    /// Agent carrying the initial point mass in the averaging suite
    #[arg(long)]
    x0_agent: Option<usize>,
    /// Report JSON file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the checks as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl SuiteArgs {
    fn geometry_spec(&self) -> Result<Option<GeometrySpec>> {
        if let Some(path) = &self.geometry_file {
            if self.geometry.is_some() {
                return Err(Error::invalid("give either --geometry or --geometry-file, not both"));
            }
            return Ok(Some(GeometrySpec::File { path: path.clone() }));
        }
        let Some(name) = &self.geometry else {
            return Ok(None);
        };
        let missing = |flag: &str| {
            Error::invalid(format!("geometry '{name}' needs {flag}"))
        };
        let spec = match name.as_str() {
            "complete" => GeometrySpec::Complete { n: self.n.ok_or_else(|| missing("--n"))? },
            "torus" => GeometrySpec::Torus {
                side: self.side.ok_or_else(|| missing("--side"))?,
                dim: self.dim.unwrap_or(2),
            },
            "path" => GeometrySpec::Path { k: self.k.ok_or_else(|| missing("--k"))? },
            "star" => GeometrySpec::Star { k: self.k.ok_or_else(|| missing("--k"))? },
            "hamming" => GeometrySpec::Hamming { d: self.d.ok_or_else(|| missing("--d"))? },
            "long-range-torus" => GeometrySpec::LongRangeTorus {
                side: self.side.ok_or_else(|| missing("--side"))?,
                dim: self.dim.unwrap_or(2),
                gamma: self.gamma.ok_or_else(|| missing("--gamma"))?,
            },
            "two-scale-torus" => GeometrySpec::TwoScaleTorus {
                side: self.side.ok_or_else(|| missing("--side"))?,
                alpha: self.alpha.ok_or_else(|| missing("--alpha"))?,
            },
            other => {
                return Err(Error::invalid(format!(
                    "unknown geometry builder '{other}' (random builders need a geometry file)"
                )))
            }
        };
        Ok(Some(spec))
    }

    fn times(&self) -> Result<Option<Vec<f64>>> {
        let Some(text) = &self.times else {
            return Ok(None);
        };
        let times = text
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(format!("bad time '{part}': {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Some(times))
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::UnsupportedSize(_) => 3,
        Error::Numeric(_) => 4,
        Error::InvalidArgument(_) | Error::Malformed(_) | Error::Io(_) => 2,
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Geometry { cmd } => {
            match cmd {
                GeometryCmd::Build { builder, out } => {
                    commands::geometry_build(&builder.to_spec()?, out.as_deref())?
                }
                GeometryCmd::Inspect { input } => commands::geometry_inspect(&input)?,
                GeometryCmd::Bottleneck { input } => commands::geometry_bottleneck(&input)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => {
            commands::run_from_config(
                &args.config,
                RunOverrides {
                    seed: args.seed,
                    replicas: args.replicas,
                    horizon: args.horizon,
                    trajectory: args.trajectory,
                    summary: args.summary,
                },
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Suite(args) => {
            let params = SuiteParams {
                seed: args.seed,
                replicas: args.replicas,
                n: args.n,
                geometry: args.geometry_spec()?,
                times: args.times()?,
                eps: args.eps,
                k_max: args.k_max,
                lambda_base: args.lambda_base,
                tolerance: args.tolerance,
                x0_agent: args.x0_agent,
            };
            let report = commands::run_suite(&args.name, &params)?;
            let ok = commands::emit_suite_report(&report, args.out.as_deref(), args.csv.as_deref())?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(5) })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FMIE_LOG")).init();
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("FMIE_THREADS").ok().and_then(|s| s.parse().ok()));
    if let Some(k) = threads {
        // Replica merging is keyed by index, so results do not depend on
        // the pool size; a failure here (pool already built) is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn degree_lists_parse() {
        assert_eq!(parse_degrees("3:0.5,4:0.5").unwrap(), vec![(3, 0.5), (4, 0.5)]);
        assert!(parse_degrees("3-0.5").is_err());
        assert!(parse_degrees("x:0.5").is_err());
    }

    #[test]
    fn error_exit_codes_follow_the_contract() {
        assert_eq!(exit_code(&Error::invalid("x")), 2);
        assert_eq!(exit_code(&Error::malformed("x")), 2);
        assert_eq!(exit_code(&Error::unsupported("x")), 3);
        assert_eq!(exit_code(&Error::numeric("x")), 4);
    }
}
