//! Numerical tools for the two-phase parabolic obstacle-type problem
//! `Δu − ∂ₜu = λ₊ χ{u>0} − λ₋ χ{u<0}`.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod exact;
pub mod freeboundary;
pub mod geometry;
pub mod monotonicity;
pub mod quadrature;
pub mod scenarios;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{Cylinder, CylinderVariant, GridSpec, Point, ScalarField};
pub use solver::{BoundaryData, CoefficientField, CoefficientPair, SolveControls, SolveReport};
