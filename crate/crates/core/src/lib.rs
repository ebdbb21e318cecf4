//! Kepler-type motion on spherical surfaces of revolution of constant
//! curvature: integrals of motion, conic orbits, McGehee blow-up of the
//! pole collision and the isolating-block test for regularizability.

pub mod block;
pub mod blowup;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod invariants;
pub mod ode;
pub mod quadrature;
pub mod report;
pub mod trajectory;

pub use error::{Error, Result};
