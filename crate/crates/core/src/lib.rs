//! Mean-field transmit-power allocation for grant-free uplink access in
//! dense IoT networks.
//!
//! * [`model`]: parameters, the time x energy lattice and fields on it.
//! * [`geometry`]: nearest-BS distance, cell-area and active-device laws and
//!   the mean-field interference.
//! * [`mfg`]: forward transport, backward costate sweep and the
//!   equilibrium iteration.
//! * [`queueing`]: queue-length chain, success probability, its fixed point
//!   with queue activity and the delay metrics.
//! * [`montecarlo`]: brute-force estimators used to check the closed forms.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod error;
pub mod geometry;
pub mod mfg;
pub mod model;
pub mod montecarlo;
pub mod quad;
pub mod queueing;

pub use error::{Error, Result};
pub use model::{Field, FieldRole, Grid, SystemParams};
