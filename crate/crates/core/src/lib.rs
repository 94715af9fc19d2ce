//! Extended Clauser-Horne inequality toolkit.
//!
//! - [`model`] and [`functional`]: hidden-variable types and the CH / extended
//!   CH functionals at the hidden-variable and experimental level.
//! - [`audit`]: exact extremes of the experimental functional over local
//!   hidden-variable ensembles, via vertex enumeration and [`lp`].
//! - [`quantum`]: efficiency-parameterized quantum predictions and the
//!   violation region.
//! - [`montecarlo`]: seeded event-level simulation of the six experiments.

pub mod audit;
pub mod error;
pub mod functional;
pub mod lp;
pub mod model;
pub mod montecarlo;
pub mod quantum;
pub mod rng;
pub mod search;

pub use error::{Error, Result};
