//! Real-time path-integral propagation of a few-level system with
//! pure-dephasing coupling to a harmonic bath and local-in-time Lindblad
//! relaxation folded into every time step.

pub mod adm;
pub mod bath;
pub mod error;
pub mod influence;
pub mod liouville;
pub mod models;
pub mod oracles;
pub mod series;
pub mod units;

pub use error::{Error, Result};
