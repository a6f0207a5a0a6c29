// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod error;
pub mod harness;
pub mod inference;
pub mod market;
pub mod policy;
pub mod quadrature;
pub mod simulator;

pub use error::{Error, Result};
