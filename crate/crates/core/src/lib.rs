//! Special quadrature for non-local slender-body theory in Stokes flow.
//!
//! The crate evaluates the operators that relate the centerline velocity of
//! a thin fiber to the force per unit length acting on it:
//!
//! * [`finitepart`] applies the local operator and the finite-part
//!   non-local operator with product integration on composite
//!   Gauss-Legendre panels. The singular sign kernel is integrated exactly
//!   through a table of target-specific weights computed once per rule.
//! * [`nearsing`] evaluates the Stokeslet line integral at arbitrary field
//!   points. Panels close to the evaluation point are treated by dividing
//!   out the nearest complex root pair of the squared distance and
//!   integrating the remaining polynomial against analytic moments.
//! * [`oracle`] holds independent adaptive Gauss-Kronrod references and
//!   the self-convergence study used to validate both.
//!
//! ```
//! use slenderquad::quadcore::{gauss_legendre, panelize};
//! use slenderquad::finitepart::{build_weight_table, eval_l, ScalarDensity};
//!
//! let rule = gauss_legendre(16).unwrap();
//! let grid = panelize(1.0, 2, &rule).unwrap();
//! let table = build_weight_table(&rule).unwrap();
//! // L[P1](s) = -2 P1(s) with P1(s) = 2s - 1
//! let f = ScalarDensity::sample(&grid, |s| 2.0 * s - 1.0);
//! let s = grid.global_nodes()[5];
//! let value = eval_l(&f, &grid, &table, 5).unwrap();
//! assert!((value + 2.0 * (2.0 * s - 1.0)).abs() < 1e-13);
//! ```

pub mod cli;
pub mod error;
pub mod finitepart;
pub mod geometry;
pub mod nearsing;
pub mod oracle;
pub mod quadcore;

pub use error::{Error, Result};

/// Three-component real vector used for positions, tangents and forces.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3x3 real matrix.
pub type Mat3 = nalgebra::Matrix3<f64>;
