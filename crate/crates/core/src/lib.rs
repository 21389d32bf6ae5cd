#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod equilibrium;
pub mod experiments;
pub mod error;
pub mod game;
pub mod metrics;
pub mod par;
pub mod simplex;
pub mod stability;

pub use error::{Error, Result};
