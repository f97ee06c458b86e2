//! Simulation and exact analytics for finite Markov information exchange
//! processes.
//!
//! An information exchange process puts one agent at each vertex of a
//! weighted meeting graph (a [`geometry::Geometry`]): agents `i` and `j`
//! meet at the times of a Poisson process with rate `nu_ij`, and at each
//! meeting both agents update their local states through a rule that only
//! sees the two states involved. The crate provides:
//!
//! - [`geometry`]: builders for the standard meeting structures and their
//!   bottleneck statistics;
//! - [`meetings`]: exact-in-law samplers for the superposed Poisson meeting
//!   process, with reproducible per-replica streams;
//! - [`chain`]: dense exact analytics for the associated Markov chain
//!   (spectra, kernels, functional inequalities, hitting and meeting times);
//! - [`models`]: the concrete update rules (token, spread, averaging, voter,
//!   coalescing, gambler, interchange, deference, fashionista) and drivers;
//! - [`experiments`]: Monte Carlo harnesses, distributional tests, and the
//!   prebuilt verification suites.

pub mod chain;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod meetings;
pub mod models;

pub use error::{Error, Result};
