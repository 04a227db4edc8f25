//! Link-level Monte Carlo simulator for NOMA joint broadcast and multicast
//! transmission over MIMO beams.
//!
//! A base station with `N_t` antennas superposes one broadcast stream, sent on
//! every beam, with one multicast stream per beam. Users decode both streams
//! with an MMSE successive-interference-cancellation receiver or a one-shot
//! joint MMSE receiver. The [`simulation`] module turns per-user packet error
//! rates into coverage figures over an (MCS, α) grid.

pub mod beamforming;
pub mod channel;
pub mod cli;
pub mod codec;
pub mod config;
pub mod error;
pub mod linalg;
pub mod mmse;
pub mod receivers;
pub mod simulation;
pub mod transmitter;
pub mod validation;

pub use error::Error;
