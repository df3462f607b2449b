#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimates;
pub mod flow;
pub mod forcing;
pub mod geom;
pub mod network;
pub mod quadrature;
pub mod report;
pub mod varifold;

pub use error::{Error, Result};
