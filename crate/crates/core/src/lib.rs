// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod cli;
pub mod domain;
pub mod eigen;
pub mod error;
pub mod quadrature;
pub mod sigma;
pub mod sparse;
pub mod verify;
