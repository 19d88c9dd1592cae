//! Discrete Li-Yau theory on weighted graphs: operators, the heat semigroup,
//! the exponential curvature-dimension condition, rate profiles, and numerical
//! verifiers for the gradient, Hamilton and Harnack estimates.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acceptance;
pub mod cli;
pub mod curvature;
pub mod cutoff;
pub mod error;
pub mod estimates;
pub mod graph;
pub mod harnack;
pub mod heat;
pub mod operators;
pub mod optimize;
pub mod profiles;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
pub use graph::{generate, Family, GraphBounds, MeasureKind, WeightedGraph, Weighting};
