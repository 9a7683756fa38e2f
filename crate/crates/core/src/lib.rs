// `!(x >= 0.0)` is the idiom here for rejecting NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod memory;
pub mod metrics;
pub mod oracles;
pub mod special;

pub use error::{Error, Result};
