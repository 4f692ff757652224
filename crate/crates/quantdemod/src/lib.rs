//! Design of capacity-optimal output quantizers for Gaussian channels and
//! bit-metric demodulators for 8PSK BICM receivers.
//!
//! The crate is organized in layers:
//!
//! - [`numerics`]: Gaussian tail function, quadrature, 1-D optimization,
//!   root finding, log-domain arithmetic.
//! - [`channel`]: PAM constellations, the unit-noise Gaussian channel,
//!   quantizer schemes and the discrete channels they induce, mutual
//!   information functionals.
//! - [`matched`]: iterative capacity-optimal quantizer search for matched
//!   (maximum-likelihood) decoding, small/large SNR asymptotics, Lloyd-Max
//!   small-SNR thresholds, high-rate loss estimates.
//! - [`mismatched`]: generalized mutual information (GMI) of symmetric
//!   binary-input channels under fixed decoding metrics, alpha-parameterized
//!   optimal thresholds, asymptotics, high-rate loss.
//! - [`psk8`]: Gray-labeled 8PSK bit metrics: exact and max-log LLRs,
//!   GMI/GCR metric assignments, and the fast 8-region LLR decomposition.
//! - [`sim`]: Monte-Carlo AWGN link (convolutional code, block interleaver,
//!   8PSK mapping, pluggable demapper, Viterbi decoding).
//! - [`cli`]: the command-line front end used by the `quantdemod` binary.
//!
//! All capacities are in nats internally; the CLI converts to bits on output.

pub mod channel;
pub mod cli;
pub mod error;
pub mod matched;
pub mod mismatched;
pub mod numerics;
pub mod psk8;
pub mod sim;

pub use error::{QuantError, Result};
