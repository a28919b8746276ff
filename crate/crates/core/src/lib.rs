//! Stochastic-target GAN training for semi-supervised novelty detection on
//! gesture feature vectors.
//!
//! The crate is organised bottom-up:
//!
//! - [`nn`]: a small dense feed-forward engine with hand-written
//!   backpropagation, the two cross-entropy losses and Adam.
//! - [`data`]: dataset ingestion, stratified splits, feature extraction,
//!   standardization and target encoding.
//! - [`gan`]: generator/discriminator builders and the interleaved two-stage
//!   adversarial training loop, plus the plain-classifier baselines.
//! - [`eval`]: set distances, thresholded decisions, GCA/NDA, threshold
//!   tuning and ROC/AUC.
//! - [`synth`]: deterministic surrogate datasets and the per-class Gaussian
//!   comparison sampler.
//! - [`cli`]: the experiment runner behind the `stgan-nd` binary.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod gan;
pub mod nn;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
