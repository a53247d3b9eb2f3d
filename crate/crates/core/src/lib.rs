//! Point estimates, identified sets and set-valid inference for marginal
//! effects in nonlinear panel models with discrete regressors.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; file formats and the command line live in the
//! `panelbounds` companion crate.
//!
//! Module map:
//!
//! * [`panel`]: discrete panels, support enumeration, cell frequencies and means.
//! * [`linear_fe`]: within estimator, its probability limit, Chamberlain's average slope.
//! * [`npbounds`]: nonparametric bounds for the conditional mean model (static and predetermined).
//! * [`choice`]: binary choice likelihoods with logit and probit links.
//! * [`solvers`]: dense LP, simplex-constrained QP, chi-square and normal special functions.
//! * [`setid`]: minimum-distance identified sets, projections, LP effect bounds, FEMLE limits.
//! * [`inference`]: goodness-of-fit regions, modified projection, perturbed bootstrap, bound CIs.
//! * [`simlab`]: data generating processes with exact population cells.
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod choice;
pub mod error;
pub mod inference;
pub mod linear_fe;
pub mod npbounds;
pub mod panel;
mod par;
pub mod rng;
pub mod setid;
pub mod simlab;
pub mod solvers;

pub use error::{Error, Result};
