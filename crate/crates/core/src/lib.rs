//! Explicit-dynamics continuum-based 9-node shell elements with large-strain
//! hyperelastic lamina constitutive updates.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod constitutive;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod kinematics;
pub mod materials;
pub mod oracles;
pub mod output;
pub mod runner;
pub mod scenarios;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
