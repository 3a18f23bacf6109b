//! Variational-Bayes tracking of multiple extended targets with the
//! gamma-Gaussian-inverse-Wishart (GGIW) random-matrix model.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: small symmetric-matrix helpers and densities,
//! - [`model`]: the GGIW state and its time update,
//! - [`association`]: gating, association events and their weights,
//! - [`update`]: the variational measurement update for each scheme,
//! - [`tracker`]: a fixed-cardinality tracker combining the two updates,
//! - [`sim`] and [`metrics`]: scenario simulation and track scoring,
//! - [`harness`]: Monte-Carlo experiments, artifacts and sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod par;
pub mod sim;
pub mod tracker;
pub mod update;

pub use error::{Error, Result};
pub use model::{GgiwState, MotionModel, MotionParams};
pub use tracker::{Tracker, TrackerConfig};
pub use update::{Scheme, VbConfig};
