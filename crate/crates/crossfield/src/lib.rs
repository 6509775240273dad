//! Cross near-/far-field channel simulator for extremely large antenna
//! arrays.
//!
//! The library generates deterministic, seedable MIMO channel realizations
//! built from twin-scatterer multipath clusters, classifies every cluster
//! parameter as near- or far-field against per-parameter boundary distances,
//! and synthesizes per-element delays and angles with the approximation tier
//! each parameter's classification allows (exact spherical, first/second
//! order expansions, or per-sub-array expansion).
//!
//! Entry points:
//! - [`geometry`]: array layouts, frames, apertures.
//! - [`range_approx`]: exact element-to-scatterer range and its expansions,
//!   phase-error profiling across an array.
//! - [`nf_boundary`]: boundary distances, maximum angular deviations, and
//!   per-parameter near/far classification.
//! - [`cluster_gen`]: cluster/ray statistical generation.
//! - [`twin_scatterer`]: first/last-bounce scatterer placement from delays.
//! - [`synthesis`]: per-element parameter synthesis and channel assembly.
//! - [`analysis`]: power-delay/angle profiles, spatial correlation, degrees
//!   of freedom, near-field probability sweeps, coefficient comparisons.

pub mod analysis;
pub mod cli;
pub mod cluster_gen;
pub mod config;
pub mod error;
pub mod geometry;
pub mod nf_boundary;
pub mod output;
pub mod range_approx;
pub mod seeding;
pub mod synthesis;
pub mod twin_scatterer;
pub mod vec3;

pub use error::{Error, Result};
