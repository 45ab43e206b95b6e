//! Rate-profile construction and decoding for polarization-adjusted
//! convolutional (PAC) codes.
//!
//! * [`pac`]: profiles, connection polynomials and the encoding chain.
//! * [`channel`]: BPSK over AWGN with seeded per-frame noise streams.
//! * [`cutoff`]: cutoff-rate polarization and per-segment information budgets.
//! * [`scl`]: list decoding, weight-spectrum estimation and the union bound.
//! * [`fano`]: Fano sequential decoding with visit accounting.
//! * [`drpo`]: the evolutionary rate-profile search with adaptive list sizes.
//! * [`sim`]: Monte Carlo FER/ANV sweeps.
//!
//! Batch work (frames, candidate evaluations) goes through [`exec::Executor`],
//! which uses rayon when the `parallel` feature is enabled.

pub mod channel;
pub mod cli;
pub mod cutoff;
pub mod drpo;
pub mod error;
pub mod exec;
pub mod fano;
pub mod pac;
pub mod presets;
pub mod sc;
pub mod scl;
pub mod sim;

pub use error::{Error, Result};
pub use pac::{BitWord, ConnectionPolynomial, PacCode, RateProfile, TapOrder};
