//! Configuration-file schema: geometry specifications and the experiment
//! config consumed by `fmie run`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fmie_core::geometry::{
    build_complete, build_config_model, build_hamming, build_long_range_torus, build_path,
    build_small_world, build_star, build_torus, build_two_scale_torus, Geometry,
};
use fmie_core::models::RuleSpec;
use fmie_core::{Error, Result};

fn default_dim() -> usize {
    2
}

/// A meeting geometry, named either by builder + parameters or by a JSON
/// file produced by `fmie geometry build`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case")]
pub enum GeometrySpec {
    /// Complete graph on `n` agents, pairwise rate `1/(n-1)`.
    Complete { n: usize },
    /// Discrete torus `Z_side^dim`, nearest-neighbor rate `1/(2 dim)`.
    Torus {
        side: usize,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// Path on `k` agents with unit-rate edges.
    Path { k: usize },
    /// Star with `k` leaves and unit-rate spokes.
    Star { k: usize },
    /// Hamming cube `{0,1}^d`, rate `1/d` per bit flip.
    Hamming { d: usize },
    /// Torus plus random long shortcuts with density `extra_density r^-gamma`.
    SmallWorld { side: usize, dim: usize, gamma: f64, extra_density: f64, seed: u64 },
    /// Torus plus `r^-gamma` long-range rates, rows normalized to 1.
    LongRangeTorus { side: usize, dim: usize, gamma: f64 },
    /// 2d torus with weak uniform long-range rates summing to `side^-alpha`.
    TwoScaleTorus { side: usize, alpha: f64 },
    /// Configuration-model random graph with the given degree distribution.
    ConfigModel { degrees: Vec<(usize, f64)>, n: usize, seed: u64 },
    /// Geometry loaded from a JSON file.
    File { path: PathBuf },
}

impl GeometrySpec {
    /// Materializes the geometry (building it or loading the file).
    pub fn build(&self) -> Result<Geometry> {
        match self {
            GeometrySpec::Complete { n } => build_complete(*n),
            GeometrySpec::Torus { side, dim } => build_torus(*side, *dim),
            GeometrySpec::Path { k } => build_path(*k),
            GeometrySpec::Star { k } => build_star(*k),
            GeometrySpec::Hamming { d } => build_hamming(*d),
            GeometrySpec::SmallWorld { side, dim, gamma, extra_density, seed } => {
                build_small_world(*side, *dim, *gamma, *extra_density, *seed)
            }
            GeometrySpec::LongRangeTorus { side, dim, gamma } => {
                build_long_range_torus(*side, *dim, *gamma)
            }
            GeometrySpec::TwoScaleTorus { side, alpha } => build_two_scale_torus(*side, *alpha),
            GeometrySpec::ConfigModel { degrees, n, seed } => {
                build_config_model(degrees, *n, *seed)
            }
            GeometrySpec::File { path } => Geometry::read_json_file(path),
        }
    }
}

/// One `fmie run` invocation: geometry, rule, replication, sampling, seed,
/// and output destinations. The seed has no default on purpose — runs must
/// be reproducible from their config alone.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub geometry: GeometrySpec,
    pub model: RuleSpec,
    pub replicas: usize,
    pub horizon: f64,
    pub sample_times: Vec<f64>,
    #[serde(default)]
    pub master_seed: Option<u64>,
    /// JSONL file receiving one record per (replica, sample time).
    #[serde(default)]
    pub trajectory_out: Option<PathBuf>,
    /// JSON file receiving the run summary.
    #[serde(default)]
    pub summary_out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| {
            Error::malformed(format!("config {}: {e}", path.display()))
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas < 1 {
            return Err(Error::invalid("config needs replicas >= 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_specs_round_trip_and_build() {
        let specs = vec![
            GeometrySpec::Complete { n: 5 },
            GeometrySpec::Torus { side: 4, dim: 2 },
            GeometrySpec::Path { k: 3 },
            GeometrySpec::Hamming { d: 3 },
        ];
        for spec in specs {
            let text = serde_json::to_string(&spec).unwrap();
            let back: GeometrySpec = serde_json::from_str(&text).unwrap();
            assert_eq!(spec, back);
            assert!(spec.build().is_ok(), "{text} failed to build");
        }
    }

    #[test]
    fn torus_dim_defaults_to_two() {
        let spec: GeometrySpec =
            serde_json::from_str(r#"{"builder": "torus", "side": 4}"#).unwrap();
        assert_eq!(spec, GeometrySpec::Torus { side: 4, dim: 2 });
        assert_eq!(spec.build().unwrap().n(), 16);
    }

    #[test]
    fn config_parses_with_optional_fields_missing() {
        let text = r#"{
            "geometry": {"builder": "complete", "n": 2},
            "model": {"rule": "voter"},
            "replicas": 1,
            "horizon": 5.0,
            "sample_times": [0.0, 5.0]
        }"#;
        let config: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config.master_seed, None);
        assert!(config.validate().is_ok());
    }
}
