// `!(x > 0.0)` is the NaN-rejecting form used throughout validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod constants;
pub mod data;
pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod newton;
pub mod operators;
pub mod parabolic;
pub mod quadrature;
pub mod runner;

pub use error::{Error, Result};
