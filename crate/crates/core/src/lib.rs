//! Pseudo-spectral simulation of a two-phase Muskat bubble driven by gravity
//! and surface tension.
//!
//! The interface is written in polar form `z(α) = (1 + f(α))(cos α, sin α) + c(t)`
//! in rescaled units (`R = 1`, `A_σ = 1`). The crate evaluates the vorticity
//! equation and the contour velocity `N(f)`, the diagonalized linear theory,
//! and marches `f` with an exponential integrator in the eigenbasis of the
//! linearized operator.

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod integrator;
pub mod io;
pub mod linear;
pub mod quadrature;
pub mod spectral;
pub mod vorticity;

pub use error::{Error, Result};
pub use spectral::{NormSpec, SpectralFunction};
