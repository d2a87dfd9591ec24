//! Relay-network analysis toolkit.
//!
//! Models deterministic (broadcast-only and general) and Gaussian relay
//! networks, computes exact cut-set capacity bounds by exhaustive cut
//! enumeration, validates random-coding achievability by Monte-Carlo
//! simulation, generates batch and pipelined block-transmission schedules
//! with delay analysis, and evaluates decode-and-forward SNR-scaling
//! formulas.
//!
//! All computations are deterministic: bound sweeps reduce exact doubles,
//! and simulations derive every random draw from a master seed, so results
//! are bit-identical across runs and worker counts. The default `parallel`
//! feature fans independent work out over rayon; without it the same code
//! paths run sequentially.

pub mod coding;
pub mod cuts;
pub mod error;
pub mod gaussian;
pub mod info;
pub mod network;
pub mod par;
pub mod schedule;

mod rng;

pub use error::{Error, Result};
