//! Dynamics of a periodically kicked, dissipative collective spin: the
//! classical stroboscopic map, spectral analysis of its orbits, and the
//! open quantum system at finite spin.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod meanfield;
pub mod model;
pub mod par;
pub mod phase;
pub mod quantum;
pub mod rng;
pub mod spectral;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{BlochVector, ModelParams, Spin};
pub use phase::PhaseLabel;
