//! Numerics for the vector-bundle Monge-Ampere equation: pointwise curvature
//! positivity on surfaces, the Fubini-Study model, and the Monge-Ampere vortex
//! equation on a flat torus together with verification of the rank-2 vortex bundle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exterior;
pub mod fubini_study;
pub mod io;
pub mod mav;
pub mod positivity;
pub mod theta;
pub mod torus;
pub mod vortex;

pub use error::{AlgebraError, GeometryError, SolveError};
pub use torus::{
    curvature_increment, integrate, make_grid, poisson_solve, Density11, ScalarField, TorusGrid,
};
