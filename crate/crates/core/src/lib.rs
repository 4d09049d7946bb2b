//! Finite-alphabet machinery for compression-based denoising.
//!
//! A lossy compressor tuned to the channel-matched distortion
//! `rho(z, y) = -ln P(z | y)` at level `D = H(Z | X)` behaves, asymptotically,
//! like a sampler from the posterior of the clean source given the noisy
//! observation. This crate provides the pieces needed to check that picture
//! numerically on small alphabets:
//!
//! * [`prob`]: pmfs, channels, entropies, divergences and the matched distortion.
//! * [`source`]: i.i.d. and Markov sources with exact block laws and sampling.
//! * [`inference`]: forward-backward smoothing, posterior path sampling,
//!   windowed posteriors, the closed-form erasure posterior and the
//!   double-sided mixing coefficient.
//! * [`ratedist`]: Blahut-Arimoto, the matched-level identity, indirect rate
//!   distortion and the rate-distortion-perception optimality test.
//! * [`codec`]: random and exhaustively optimized codebooks, minimum
//!   distortion encoding and the posterior-sampling denoiser.
//! * [`empirics`]: empirical window distributions, loss baselines, the
//!   Markov-violation bound and closed forms for the worked examples.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that is parallel is
//! expressed through the [`exec::Executor`] trait so callers decide how trials
//! are scheduled; results never depend on the schedule.
//!
//! All information quantities are in nats.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod codec;
pub mod empirics;
mod error;
pub mod exec;
pub mod inference;
pub mod lp;
pub(crate) mod math;
pub mod matrix;
pub mod prob;
pub mod ratedist;
pub mod rng;
pub mod source;

pub use error::{Error, Result};
pub use matrix::Matrix;
