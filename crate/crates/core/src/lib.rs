//! Singularity invariants of hypersurfaces over a complete discrete valuation
//! ring, computed at finite precision.

#![allow(clippy::needless_range_loop)]

pub mod acceptance;
pub mod coeff;
pub mod error;
pub mod expr;
pub mod invariants;
pub mod localalg;
pub mod normform;
pub mod pderiv;
pub mod series;

pub use coeff::{Coeff, Dvr, DvrSpec, Ramification};
pub use error::{Bounds, Error, Result};
pub use series::{IdealPresentation, Monomial, PrecisionEvent, Series, VarSet};
