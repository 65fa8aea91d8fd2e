//! Geometric-stochastic channel model for industrial indoor radio in the
//! 2-6 GHz range.
//!
//! - [`params`]: scenario tables and the log-linear LSP model.
//! - [`fields`]: spatially consistent, cross-correlated LSP realizations.
//! - [`smallscale`]: multipath synthesis and impulse/frequency responses.
//! - [`analysis`]: estimators and the fitting pipeline that inverts the model.

pub mod analysis;
pub mod error;
pub mod fields;
pub mod params;
pub mod smallscale;

pub use error::{Error, Result};
pub use fields::Point;
