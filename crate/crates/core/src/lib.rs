//! Exotic vortices on constant-curvature surfaces: analytic integrable
//! solutions, a Newton–Krylov solver for coupled abelian vortex systems and
//! diagnostics comparing the two.

pub mod charge;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod holomorphic;
pub mod integrable;
pub mod io;
mod multigrid;
pub mod solver;
pub mod surface;

pub use error::{Result, VortexError};
pub use num_complex::Complex64;
