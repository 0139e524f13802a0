//! Numerical laboratory for the supercooled Stefan problem in obstacle form,
//! `w_t - Δw = -χ{w>0}` with `w >= 0` and `w_t <= 0`.
//!
//! The crate holds an implicit LCP solver, exact caloric-polynomial algebra,
//! Gaussian-weighted frequency functionals, blow-up classification,
//! free-boundary measurements, and the reference example fields.

pub mod blowup;
pub mod calpoly;
pub mod error;
pub mod examples;
pub mod export;
pub mod field;
pub mod freeboundary;
pub mod functionals;
pub mod solver;

pub use error::{Error, Result};
