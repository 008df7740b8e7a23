//! State-of-charge estimation for LFP cells with a residual-bias compensated
//! dual extended Kalman filter running over a control-oriented single
//! particle model.
//!
//! The crate is split into the electrochemical model ([`model`]), its exact
//! zero-order-hold discretization ([`discretize`]), the estimators
//! ([`filters`]), a truth-model test harness ([`harness`]) and file formats
//! ([`io`]).

pub mod discretize;
pub mod error;
pub mod filters;
pub mod fixtures;
pub mod harness;
pub mod io;
pub mod model;

pub use error::{Error, Result};
