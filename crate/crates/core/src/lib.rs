//! Boundary integral equation toolkit for time-harmonic scattering of an
//! obliquely incident plane wave by a homogeneous penetrable cylinder.
//!
//! The crate covers the forward transmission problem (Nyström discretization
//! of the Helmholtz layer operators, far-field patterns, a separation of
//! variables oracle for circular cylinders) and the inverse problem of
//! recovering a star-shaped cross section from far-field data with a
//! regularized two-step iteration.

pub mod direct;
pub mod error;
pub mod geometry;
pub mod io;
pub mod inverse;
pub mod linalg;
pub mod operators;
pub mod oracle;
pub mod params;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub type CMatrix = nalgebra::DMatrix<Complex64>;
pub type CVector = nalgebra::DVector<Complex64>;
pub type RMatrix = nalgebra::DMatrix<f64>;
