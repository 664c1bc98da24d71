//! Numerical laboratory for sparse-latent linear regression.
//!
//! The data model is `X = A Z + xi`, `Y = <w, Z>` with a sparse latent `Z`,
//! an incoherent dictionary `A` and Gaussian noise. The crate compares three
//! families of predictors for `Y`:
//!
//! * a two-layer ReLU network computing coordinatewise soft thresholding of
//!   `A^T X` ([`estimators::estimate_nn`]),
//! * the same network with every ReLU replaced by a low-degree polynomial
//!   ([`relu_approx::build_poly_soft_threshold`], [`estimators::estimate_poly`]),
//! * the best polynomial of a fixed degree, computed exactly from Gaussian
//!   mixture moments ([`estimators::best_poly_oracle`]).
//!
//! Risks are measured either exactly (closed forms, moment oracles) or by
//! seeded Monte Carlo ([`evaluation::mc_risk`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod experiments;
pub mod model;
pub mod polybasis;
pub mod relu_approx;

mod par;

pub use error::{Error, Result};
