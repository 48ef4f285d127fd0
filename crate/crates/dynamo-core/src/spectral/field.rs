use super::grid::Grid3;
use crate::error::{Error, Result};
use crate::Complex;

/// 3-component field in spectral representation, optionally carrying a Bloch
/// offset wavevector `j` so that the represented function is
/// `e^{i j·x} Σ_k F̂(k) e^{i k·x}`.
///
/// Coefficients are stored component-major: component `c` occupies
/// `coeffs[c * grid.len() .. (c + 1) * grid.len()]` with modes in FFT slot
/// order (`grid.index`).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: Grid3,
    pub bloch_j: [f64; 3],
    pub coeffs: Vec<Complex>,
}

impl SpectralField {
    pub fn zeros(grid: Grid3) -> Self {
        Self {
            grid,
            bloch_j: [0.0; 3],
            coeffs: vec![Complex::ZERO; 3 * grid.len()],
        }
    }

    pub fn zeros_bloch(grid: Grid3, bloch_j: [f64; 3]) -> Self {
        Self {
            bloch_j,
            ..Self::zeros(grid)
        }
    }

    /// Constant field with the given spatial average.
    pub fn constant(grid: Grid3, value: [Complex; 3]) -> Self {
        let mut f = Self::zeros(grid);
        for c in 0..3 {
            f.coeffs[c * grid.len()] = value[c];
        }
        f
    }

    /// Single-mode field `v e^{i k·x}`; errors if `k` is off the lattice.
    pub fn single_mode(grid: Grid3, k: [i64; 3], v: [Complex; 3]) -> Result<Self> {
        let (ix, iy, iz) = (
            Grid3::slot(k[0], grid.nx()).ok_or_else(|| off_lattice(k))?,
            Grid3::slot(k[1], grid.ny()).ok_or_else(|| off_lattice(k))?,
            Grid3::slot(k[2], grid.nz()).ok_or_else(|| off_lattice(k))?,
        );
        let mut f = Self::zeros(grid);
        let idx = grid.index(ix, iy, iz);
        for c in 0..3 {
            f.coeffs[c * grid.len() + idx] = v[c];
        }
        Ok(f)
    }

    #[inline]
    pub fn coeff(&self, c: usize, idx: usize) -> Complex {
        self.coeffs[c * self.grid.len() + idx]
    }

    #[inline]
    pub fn coeff_mut(&mut self, c: usize, idx: usize) -> &mut Complex {
        &mut self.coeffs[c * self.grid.len() + idx]
    }

    /// Coefficient at signed wavevector `k` (zero if off the lattice).
    pub fn at_mode(&self, c: usize, k: [i64; 3]) -> Complex {
        let slot = (
            Grid3::slot(k[0], self.grid.nx()),
            Grid3::slot(k[1], self.grid.ny()),
            Grid3::slot(k[2], self.grid.nz()),
        );
        match slot {
            (Some(ix), Some(iy), Some(iz)) => self.coeff(c, self.grid.index(ix, iy, iz)),
            _ => Complex::ZERO,
        }
    }

    pub fn component(&self, c: usize) -> &[Complex] {
        &self.coeffs[c * self.grid.len()..(c + 1) * self.grid.len()]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex] {
        let n = self.grid.len();
        &mut self.coeffs[c * n..(c + 1) * n]
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}

fn off_lattice(k: [i64; 3]) -> Error {
    Error::InvalidParameter(format!("mode {k:?} is off the grid lattice"))
}

/// 3-component field sampled at the collocation points, component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    pub grid: Grid3,
    pub values: Vec<Complex>,
}

impl PhysicalField {
    pub fn zeros(grid: Grid3) -> Self {
        Self {
            grid,
            values: vec![Complex::ZERO; 3 * grid.len()],
        }
    }

    /// Sample `f(x, y, z) -> [c1, c2, c3]` at every grid point.
    pub fn sample<F: Fn(f64, f64, f64) -> [Complex; 3]>(grid: Grid3, f: F) -> Self {
        let mut field = Self::zeros(grid);
        let n = grid.len();
        for ix in 0..grid.nx() {
            for iy in 0..grid.ny() {
                for iz in 0..grid.nz() {
                    let [x, y, z] = grid.point(ix, iy, iz);
                    let v = f(x, y, z);
                    let idx = grid.index(ix, iy, iz);
                    for c in 0..3 {
                        field.values[c * n + idx] = v[c];
                    }
                }
            }
        }
        field
    }

    #[inline]
    pub fn value(&self, c: usize, idx: usize) -> Complex {
        self.values[c * self.grid.len() + idx]
    }

    pub fn component(&self, c: usize) -> &[Complex] {
        &self.values[c * self.grid.len()..(c + 1) * self.grid.len()]
    }

    /// Maximum pointwise Euclidean norm of the 3-vector values.
    pub fn max_norm(&self) -> f64 {
        let n = self.grid.len();
        (0..n)
            .map(|i| {
                (self.values[i].norm_sqr()
                    + self.values[n + i].norm_sqr()
                    + self.values[2 * n + i].norm_sqr())
                .sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}

/// Scalar field in spectral representation (e.g. a divergence).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSpectralField {
    pub grid: Grid3,
    pub bloch_j: [f64; 3],
    pub coeffs: Vec<Complex>,
}

impl ScalarSpectralField {
    pub fn zeros(grid: Grid3, bloch_j: [f64; 3]) -> Self {
        Self {
            grid,
            bloch_j,
            coeffs: vec![Complex::ZERO; grid.len()],
        }
    }

    /// `L²` norm under the normalized torus measure (Parseval).
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn at_mode(&self, k: [i64; 3]) -> Complex {
        let slot = (
            Grid3::slot(k[0], self.grid.nx()),
            Grid3::slot(k[1], self.grid.ny()),
            Grid3::slot(k[2], self.grid.nz()),
        );
        match slot {
            (Some(ix), Some(iy), Some(iz)) => self.coeffs[self.grid.index(ix, iy, iz)],
            _ => Complex::ZERO,
        }
    }
}
