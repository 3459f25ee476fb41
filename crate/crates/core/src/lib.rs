//! Dominant and partial accumulative interference in Poisson networks with
//! directional reception.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Reference values in tests keep every digit of the high-precision oracle.
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod cli;
pub mod config;
pub mod error;
pub mod laplace;
pub mod model;
pub mod numerics;
pub mod order_stats;
pub mod reliability;
pub mod simulator;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
