//! Stimulated Raman adiabatic passage in Λ and Tm:YAG-like four-level +
//! metastable systems: dressed-state diagnostics, Lindblad dynamics,
//! inhomogeneous Raman averaging and the scans built on them.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dressed;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod exec;
pub mod model;
pub mod pulses;

pub use error::{Error, Result};
