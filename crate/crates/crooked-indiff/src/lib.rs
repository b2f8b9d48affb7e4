//! A desk-scale laboratory for crooked indifferentiability.
//!
//! The crate implements subverted oracle implementations, the enveloped-XOR
//! and randomized-sponge constructions with their simulators and game
//! chains, and exact/Monte-Carlo evaluators for the quantities their
//! security bounds are made of. Everything runs at small bit widths
//! (n <= 16) so that claims can be checked by exhaustive enumeration or
//! seeded sampling rather than taken on faith.
//!
//! Layout:
//! - [`oracle`]: lazily sampled random functions, resampling, transcripts
//! - [`subversion`]: the two-stage implementor model and built-in subverters
//! - [`exor`]: the enveloped-XOR construction, simulator, and game chain
//! - [`sponge`]: the randomized sponge, graph simulator, and game chain
//! - [`analysis`]: point classification, critical sets, resampling sets,
//!   theorem bounds, and the rejection-resampling checker
//! - [`harness`]: the experiment catalog, parallel trial driver, reports
//!
//! Every random draw is a pure function of (master seed, label), so any
//! experiment re-runs bit-identically at any parallelism level.

pub mod adversary;
pub mod analysis;
pub mod bits;
pub mod error;
pub mod exor;
pub mod harness;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod sponge;
pub mod stats;
pub mod subversion;

pub use bits::BitStr;
pub use error::{Error, Result};
pub use oracle::{FunctionTable, Point, Provenance, Transcript};
