//! TS-UCB and baseline bandit policies with a deterministic simulation
//! harness.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod conjugate;
pub mod envs;
pub mod error;
pub mod harness;
pub mod karmed;
pub mod linalg;
pub mod linear;
pub mod policies;
pub mod scoring;
pub mod streams;

pub use error::{Error, Result};
pub use scoring::{dynamic_alpha, psi, psi_randomized, select_arm, ConfidenceBounds, TargetValue};
