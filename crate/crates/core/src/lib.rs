// `!(x > y)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
mod dd;
pub mod error;
pub mod func;
pub mod green;
pub mod inequality;
pub mod json;
pub mod nystrom;
pub mod prabhakar;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
