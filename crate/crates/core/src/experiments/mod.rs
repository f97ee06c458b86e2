//! Monte Carlo experiment suites and their statistical machinery.
//!
//! Each suite runs a replica-parallel simulation battery against exact or
//! asymptotic targets and returns a [`SuiteReport`]: a schema-versioned
//! list of named checks (identities tested two-sided within a confidence
//! interval, bounds tested one-sided with the Monte Carlo margin
//! subtracted, distributional KS tests, and non-gating exploratory
//! values), plus optional curves for plotting. Reports serialize to JSON
//! and to a flat CSV mirror, and are deterministic functions of their
//! master seed.
//!
//! Supporting pieces: summary statistics and the replica harness
//! ([`stats`]), reference distributions and the KS machinery ([`ks`]), and
//! the grid solver for the spread-window limit profile ([`window`]).

pub mod averaging;
pub mod deference_fashionista;
pub mod ks;
pub mod pandemic;
pub mod report;
pub mod stats;
pub mod voter;
pub mod window;
pub mod wlln;

pub use averaging::averaging_suite;
pub use deference_fashionista::{deference_fashionista_suite, deference_share_logits};
pub use ks::{
    gumbel_cdf, gumbel_sum_reference, ks_statistic, log_gamma_reference, logistic_cdf, GridCdf,
    KsTest, Reference,
};
pub use pandemic::{
    complete_completion_mean, harmonic, pandemic_limit_suite, sample_complete_pandemics,
    PandemicSamples, KS_ALPHA,
};
pub use report::{Check, CheckKind, SuiteReport, SCHEMA_VERSION};
pub use stats::{
    least_squares_slope, monte_carlo, monte_carlo_ecdf, replicate, spearman, Ecdf, SummaryStats,
};
pub use voter::{bottleneck_consensus_bound, voter_suite};
pub use window::{
    default_window_grid, solve_window_profile, window_profile_suite, GridSpec, WindowProfile,
};
pub use wlln::{wlln_concentration, wlln_suite, WllnReport, MAX_WLLN_AGENTS};
