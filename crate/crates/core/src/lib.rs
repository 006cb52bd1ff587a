//! Knowledge-aided estimation for linear Gaussian models.
//!
//! The library implements two row-action estimators that fold a Gaussian
//! prior N(mean, cov) on the parameter vector into every update:
//!
//! * a knowledge-aided Kaczmarz solver with a residual-triggered
//!   step-width decay schedule ([`kaczmarz`]), and
//! * a knowledge-aided LMS filter for streaming convolution rows
//!   ([`lms`]),
//!
//! together with the closed-form LS and MAP estimators they are measured
//! against ([`batch`]), model/noise/prior construction and SNR calibration
//! ([`model`]), a deterministic parallel Monte-Carlo experiment harness
//! ([`harness`]), and the small dense kernel underneath ([`numerics`]).
//!
//! Start with the runnable examples (one per capability):
//!
//! ```text
//! cargo run --example oracles_map_ls
//! cargo run --example ka_kaczmarz_run
//! cargo run --example ka_lms_identification
//! cargo run --example step_width_bounds
//! cargo run --example mse_vs_iterations
//! cargo run --example mse_vs_snr
//! cargo run --example convolution_equivalence
//! ```
//!
//! The `ka-solve` binary wraps the same entry points behind `preset`,
//! `experiment`, `solve-kaczmarz`, and `solve-lms` subcommands.
//!
//! All randomness is seeded and all trial reductions happen in a fixed
//! order, so every result in this crate is byte-reproducible regardless of
//! worker count.

pub mod batch;
pub mod error;
pub mod harness;
pub mod kaczmarz;
pub mod lms;
pub mod model;
pub mod numerics;

pub use error::{Error, Result};
pub use numerics::{DenseMatrix, DenseVector};
