//! Leader-controlled Hegselmann-Krause opinion dynamics with pointwise and
//! distributed time delays.
//!
//! The crate integrates the delayed systems with a method-of-steps RK4 scheme,
//! provides the saturated consensus, steering and waypoint controls for the
//! leader, and evaluates the delay certificates and Lyapunov functionals that
//! guarantee consensus.

// Negated float comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod controllers;
pub mod domain;
pub mod engine;
mod error;
pub mod scenario;

pub use error::{Error, Result};
