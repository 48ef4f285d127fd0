//! Pseudo-spectral simulation of the kinematic dynamo equation on the
//! 3-torus, together with the mean-field (alpha-effect) spectral analysis
//! that predicts when a rescaled ABC flow amplifies a large-scale magnetic
//! field.
//!
//! The crate is organised around five subsystems:
//!
//! * [`spectral`]: Fourier representation of complex 3-component fields on
//!   `[0,2π)³`, transforms, Bloch-shifted vector calculus, checkpoint I/O.
//! * [`velocity`]: the catalog of velocity fields (ABC flow, its rescalings,
//!   the mean-seed generator) and the piecewise-in-time schedule that drives
//!   the intermittent growth experiment.
//! * [`solver`]: integrating-factor RK4 time integration of the induction
//!   equation with energy diagnostics and closed-form oracles.
//! * [`bloch`]: the Bloch operator `L(j)`, the fluctuation corrector, the
//!   alpha matrix and its leading eigenvalues, and the rescaling symmetry
//!   check.
//! * [`matrix`]: finite-dimensional spectral utilities: contour Riesz
//!   projectors, matrix semigroups, growth dichotomy, eigenvalue
//!   perturbation slopes, monodromy matrices and the spectral-radius /
//!   fitted-rate comparison.

pub mod bloch;
pub mod error;
pub mod matrix;
mod par;
pub mod solver;
pub mod spectral;
pub mod velocity;

pub use error::{Error, Result};
pub use spectral::{Grid3, PhysicalField, SpectralField};

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
