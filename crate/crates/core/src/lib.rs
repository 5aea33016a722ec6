//! Movable-antenna NOMA short-packet downlink.
//!
//! A two-user downlink where an access point serves a near (core) user and a
//! far (edge) user with power-domain NOMA over a finite blocklength. Each user
//! carries a single movable antenna inside a square region. The crate covers:
//!
//! - [`channel`]: far-field field-response model and random instance generation,
//! - [`fbl`]: normal-approximation error probabilities and effective throughput,
//! - [`placement`]: per-user antenna placement by successive convex approximation,
//! - [`alloc`]: power and rate allocation for NOMA, plus a TDMA (OMA) baseline,
//! - [`experiments`]: seeded, parallel Monte Carlo sweeps over the four schemes,
//! - [`cli`]: the `ma-noma` command-line front end.

pub mod alloc;
pub mod channel;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod fbl;
pub mod numeric;
pub mod placement;
pub mod plot;
pub mod selftest;

pub use error::{Error, Result};
