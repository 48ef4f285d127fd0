//! Fourier representation of complex 3-component fields on the periodic box
//! `[0,2π)³` and the Bloch-shifted vector calculus built on top of it.
//!
//! Conventions:
//! * forward transform divides by the number of grid points, so the `k = 0`
//!   coefficient of a field is its spatial average and constants have unit
//!   `L²` norm under the normalized torus measure;
//! * the mode lattice per axis of length `n` is `{-n/2+1, …, n/2}`, stored
//!   in standard FFT order;
//! * every operation is a pure function of its inputs.

mod checkpoint;
mod fft;
mod field;
mod grid;
mod ops;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use field::{PhysicalField, ScalarSpectralField, SpectralField};
pub use grid::Grid3;
pub use ops::{
    backward_transform, cross_product, curl_bloch, dealias, divergence_bloch, forward_transform,
    inverse_laplacian_zero_mean, l2_norm, laplacian_bloch, leray_project, mean, zero_nyquist,
};
