#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod diagnostics;
pub mod entropy;
pub mod error;
pub mod fields;
pub mod hyperbolic;
pub mod parabolic;
pub mod scenario;
pub mod subsolution;
pub mod suites;

pub use error::{Error, Result};
