//! Security bounds and asymptotic key rates for the small-number-random
//! differential-phase-shift (SNRDPS) QKD protocol.
//!
//! The protocol sends blocks of `L` coherent pulses; Bob interferes pulse
//! pairs at a delay drawn from the small set `R = ∪_{m=1..t} {m, L−m}`.
//! This crate computes the information-theoretic machinery needed to turn
//! an observed bit error rate into a secret-key rate:
//!
//! * [`povm`] — measurement operators on the single-photon space and, for
//!   verification, on the full register space;
//! * [`bounds`] — the per-photon-number phase-error upper bounds and their
//!   entropy supporting lines;
//! * [`rate`] — channel model, adversarial photon-number allocation,
//!   privacy amplification and key-rate scans (including the round-robin
//!   DPS baseline);
//! * [`verify`] — brute-force oracles that validate every analytic
//!   shortcut used by the fast paths;
//! * [`linalg`] — the small dense kernels everything above relies on.
//!
//! Runnable entry points live in `examples/` and in the `snrdps` binary
//! (`bounds`, `rate` and `verify` subcommands).

pub mod bounds;
pub mod cli;
mod error;
pub mod linalg;
pub mod povm;
pub mod rate;
pub mod verify;

pub use error::{Error, Result};
pub use povm::ProtocolParams;
