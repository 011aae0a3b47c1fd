//! Simulator for two-crystal photon-pair interferometers.
//!
//! Single-system and entangled signal/idler states are propagated through
//! phase shifters and variable beam splitters ([`optics`]), reduced with
//! partial traces ([`density`]), and checked against analytic expressions
//! ([`closed_form`]). [`experiments`] builds the entangled and separable
//! two-crystal setups and runs the delayed-choice protocol as a seeded
//! Monte Carlo event stream.

pub mod cli;
pub mod closed_form;
pub mod density;
pub mod error;
pub mod experiments;
pub mod optics;
pub mod state;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
