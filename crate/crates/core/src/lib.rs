//! Coincidence points and common fixed points of Geraghty-type contractions on
//! partially ordered metric spaces.
//!
//! The crate provides hypothesis checkers for triples of maps `(f, g, H)`, the
//! alternating iteration `H x_{n+1} = f x_n` / `H x_{n+2} = g x_{n+1}` with
//! runtime monitors, an exhaustive oracle on small finite models, and a grid
//! solver for a pair of Fredholm-type integral equations.

// NaN must fail every tolerance check, so comparisons are written negated.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod finite_oracle;
pub mod integral_app;
pub mod order_metric;
pub mod solver;
pub mod triple;

pub use error::{Error, Result};
