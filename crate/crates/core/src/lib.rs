//! Spectral contour dynamics for sharp fronts of the generalized SQG
//! equation with `1 < beta < 2`, together with the numerical diagnostics
//! (analytic norms, strip-radius estimates, Picard iteration) used to
//! verify the regularized evolution system.

pub mod arc_chord;
pub mod curve;
pub mod error;
pub mod evolution;
pub mod field;
pub mod io;
pub mod norms;
pub mod quadrature;
pub mod symbol;
pub mod velocity;
pub mod verify;

pub use error::{GsqgError, Result};
pub use field::{BiPeriodicField, FieldKind, PeriodicField, C64};
