//! Hopfield-network signature verification.
//!
//! The crate is organised bottom-up:
//!
//! * [`hopfield`] is a discrete Hopfield associative memory over `{0,1}`
//!   states: corrective learning, asynchronous recall and energy.
//! * [`imageops`] loads and normalises signature images, binarises them and
//!   builds difference images and their histograms.
//! * [`change`] is a node-per-pixel network that relaxes a change labeling of
//!   a difference image, scored against a truth grid with the `Perc` metric.
//! * [`verifier`] composes the above into enrollment, verification, FRR/FAR
//!   evaluation and a seeded synthetic dataset generator.

pub mod change;
pub mod error;
pub mod hopfield;
pub mod imageops;
pub(crate) mod rng;
pub mod verifier;

pub use error::{Error, Result};
