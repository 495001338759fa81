//! Entire spacelike hypersurfaces of constant Gauss curvature in Minkowski
//! space, computed end to end: cap geometry on the ideal boundary, the
//! semitrough profile and its boosted family, sub/supersolution barriers,
//! finite-difference curvature operators, a damped Newton solver for the
//! Dirichlet problem on boxes, the logarithmic Gauss curvature flow, and
//! exhaustion over growing domains with the runtime monitors that certify
//! each run.

pub mod barrier;
pub mod config;
pub mod diagnostics;
pub mod diffops;
pub mod elliptic;
pub mod error;
pub mod exhaust;
pub mod flow;
pub mod grid;
pub mod hull;
pub mod linalg;
pub mod profile;
pub mod report;
pub mod semitrough;
pub mod sphere;
pub mod surface;

pub use error::{Error, Result};
