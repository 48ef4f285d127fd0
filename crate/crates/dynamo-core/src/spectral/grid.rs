use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform collocation grid on `[0,2π)³`. Axis lengths must be even and at
/// least 4; the mode lattice per axis of length `n` is `{-n/2+1, …, n/2}`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Grid3 {
    nx: usize,
    ny: usize,
    nz: usize,
}

impl Grid3 {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        let ok = |n: usize| n >= 4 && n % 2 == 0;
        if ok(nx) && ok(ny) && ok(nz) {
            Ok(Self { nx, ny, nz })
        } else {
            Err(Error::InvalidGrid { nx, ny, nz })
        }
    }

    pub fn cubic(n: usize) -> Result<Self> {
        Self::new(n, n, n)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn nz(&self) -> usize {
        self.nz
    }

    /// Number of grid points (and of modes).
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Storage index of grid point / mode slot `(ix, iy, iz)`.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.ny + iy) * self.nz + iz
    }

    /// Signed frequency of FFT slot `i` on an axis of length `n`.
    #[inline]
    pub fn freq(i: usize, n: usize) -> i64 {
        if i <= n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// FFT slot of signed frequency `k` on an axis of length `n`, if it is on
    /// the lattice.
    #[inline]
    pub fn slot(k: i64, n: usize) -> Option<usize> {
        let half = (n / 2) as i64;
        if k > half || k <= -half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + n as i64) as usize)
        }
    }

    /// Wavevector of mode slot `(ix, iy, iz)`.
    #[inline]
    pub fn wavevector(&self, ix: usize, iy: usize, iz: usize) -> [i64; 3] {
        [
            Self::freq(ix, self.nx),
            Self::freq(iy, self.ny),
            Self::freq(iz, self.nz),
        ]
    }

    /// True when any axis sits exactly on its Nyquist frequency `n/2`.
    #[inline]
    pub fn is_nyquist(&self, k: [i64; 3]) -> bool {
        k[0] == (self.nx / 2) as i64
            || k[1] == (self.ny / 2) as i64
            || k[2] == (self.nz / 2) as i64
    }

    /// Physical coordinates of grid point `(ix, iy, iz)`.
    #[inline]
    pub fn point(&self, ix: usize, iy: usize, iz: usize) -> [f64; 3] {
        let tau = 2.0 * std::f64::consts::PI;
        [
            tau * ix as f64 / self.nx as f64,
            tau * iy as f64 / self.ny as f64,
            tau * iz as f64 / self.nz as f64,
        ]
    }
}
