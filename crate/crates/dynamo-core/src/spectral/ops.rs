use super::fft::fft3_inplace;
use super::field::{PhysicalField, ScalarSpectralField, SpectralField};
use crate::error::Result;
use crate::Complex;

const I: Complex = Complex::new(0.0, 1.0);

/// Discrete Fourier analysis of a collocation field. The `k = 0`
/// coefficient equals the spatial average; `backward_transform` inverts this
/// exactly (up to roundoff).
pub fn forward_transform(f: &PhysicalField) -> SpectralField {
    let grid = f.grid;
    let mut out = SpectralField::zeros(grid);
    let scale = 1.0 / grid.len() as f64;
    for c in 0..3 {
        let slab = out.component_mut(c);
        slab.copy_from_slice(f.component(c));
        fft3_inplace(slab, grid, true);
        for v in slab.iter_mut() {
            *v *= scale;
        }
    }
    out
}

/// Fourier synthesis back to the collocation points. The Bloch offset is a
/// property of the representation, not of the stored coefficients, so it is
/// ignored here.
pub fn backward_transform(f: &SpectralField) -> PhysicalField {
    let grid = f.grid;
    let mut out = PhysicalField::zeros(grid);
    for c in 0..3 {
        let slab = &mut out.values[c * grid.len()..(c + 1) * grid.len()];
        slab.copy_from_slice(f.component(c));
        fft3_inplace(slab, grid, false);
    }
    out
}

fn map_modes<F>(f: &SpectralField, apply: F) -> SpectralField
where
    F: Fn([f64; 3], [Complex; 3]) -> [Complex; 3],
{
    let grid = f.grid;
    let n = grid.len();
    let j = f.bloch_j;
    let mut out = SpectralField::zeros_bloch(grid, j);
    for ix in 0..grid.nx() {
        for iy in 0..grid.ny() {
            for iz in 0..grid.nz() {
                let idx = grid.index(ix, iy, iz);
                let k = grid.wavevector(ix, iy, iz);
                let kj = [
                    k[0] as f64 + j[0],
                    k[1] as f64 + j[1],
                    k[2] as f64 + j[2],
                ];
                let v = [f.coeffs[idx], f.coeffs[n + idx], f.coeffs[2 * n + idx]];
                let w = apply(kj, v);
                out.coeffs[idx] = w[0];
                out.coeffs[n + idx] = w[1];
                out.coeffs[2 * n + idx] = w[2];
            }
        }
    }
    out
}

/// Bloch curl: coefficient at `k` maps to `i (k + j) × F̂(k)`.
pub fn curl_bloch(f: &SpectralField) -> SpectralField {
    map_modes(f, |kj, v| {
        [
            I * (kj[1] * v[2] - kj[2] * v[1]),
            I * (kj[2] * v[0] - kj[0] * v[2]),
            I * (kj[0] * v[1] - kj[1] * v[0]),
        ]
    })
}

/// Bloch Laplacian: coefficient at `k` multiplied by `-|k + j|²`.
pub fn laplacian_bloch(f: &SpectralField) -> SpectralField {
    map_modes(f, |kj, v| {
        let m = -(kj[0] * kj[0] + kj[1] * kj[1] + kj[2] * kj[2]);
        [m * v[0], m * v[1], m * v[2]]
    })
}

/// Bloch divergence: scalar coefficient `i (k + j) · F̂(k)`.
pub fn divergence_bloch(f: &SpectralField) -> ScalarSpectralField {
    let grid = f.grid;
    let n = grid.len();
    let j = f.bloch_j;
    let mut out = ScalarSpectralField::zeros(grid, j);
    for ix in 0..grid.nx() {
        for iy in 0..grid.ny() {
            for iz in 0..grid.nz() {
                let idx = grid.index(ix, iy, iz);
                let k = grid.wavevector(ix, iy, iz);
                let kj = [
                    k[0] as f64 + j[0],
                    k[1] as f64 + j[1],
                    k[2] as f64 + j[2],
                ];
                out.coeffs[idx] = I
                    * (kj[0] * f.coeffs[idx]
                        + kj[1] * f.coeffs[n + idx]
                        + kj[2] * f.coeffs[2 * n + idx]);
            }
        }
    }
    out
}

/// Inverse Laplacian returning the zero-average representative: `k ≠ 0`
/// coefficients are divided by `-|k|²` and the mean is discarded.
/// Requires `bloch_j = 0` (the shifted operator is invertible and does not
/// need this convention).
pub fn inverse_laplacian_zero_mean(f: &SpectralField) -> SpectralField {
    debug_assert_eq!(f.bloch_j, [0.0; 3]);
    map_modes(f, |k, v| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            [Complex::ZERO; 3]
        } else {
            let m = -1.0 / k2;
            [m * v[0], m * v[1], m * v[2]]
        }
    })
}

/// Pointwise complex-bilinear cross product (no conjugation).
pub fn cross_product(a: &PhysicalField, b: &PhysicalField) -> Result<PhysicalField> {
    a.same_shape(b)?;
    let n = a.grid.len();
    let mut out = PhysicalField::zeros(a.grid);
    let (a1, a2, a3) = (a.component(0), a.component(1), a.component(2));
    let (b1, b2, b3) = (b.component(0), b.component(1), b.component(2));
    for i in 0..n {
        out.values[i] = a2[i] * b3[i] - a3[i] * b2[i];
        out.values[n + i] = a3[i] * b1[i] - a1[i] * b3[i];
        out.values[2 * n + i] = a1[i] * b2[i] - a2[i] * b1[i];
    }
    Ok(out)
}

/// Zero every coefficient with any `|k_axis| > fmax`.
pub fn dealias(f: &SpectralField, fmax: i64) -> SpectralField {
    let mut out = f.clone();
    dealias_in_place(&mut out, fmax);
    out
}

pub(crate) fn dealias_in_place(f: &mut SpectralField, fmax: i64) {
    let grid = f.grid;
    let n = grid.len();
    for ix in 0..grid.nx() {
        for iy in 0..grid.ny() {
            for iz in 0..grid.nz() {
                let k = grid.wavevector(ix, iy, iz);
                if k[0].abs() > fmax || k[1].abs() > fmax || k[2].abs() > fmax {
                    let idx = grid.index(ix, iy, iz);
                    f.coeffs[idx] = Complex::ZERO;
                    f.coeffs[n + idx] = Complex::ZERO;
                    f.coeffs[2 * n + idx] = Complex::ZERO;
                }
            }
        }
    }
}

/// Zero the Nyquist planes (`k_axis = n/2`). Applied after pointwise
/// products so derivatives never act on the sign-ambiguous mode.
pub fn zero_nyquist(f: &mut SpectralField) {
    let grid = f.grid;
    let n = grid.len();
    for ix in 0..grid.nx() {
        for iy in 0..grid.ny() {
            for iz in 0..grid.nz() {
                let k = grid.wavevector(ix, iy, iz);
                if grid.is_nyquist(k) {
                    let idx = grid.index(ix, iy, iz);
                    f.coeffs[idx] = Complex::ZERO;
                    f.coeffs[n + idx] = Complex::ZERO;
                    f.coeffs[2 * n + idx] = Complex::ZERO;
                }
            }
        }
    }
}

/// Spatial average (the `k = 0` coefficient).
pub fn mean(f: &SpectralField) -> [Complex; 3] {
    let n = f.grid.len();
    [f.coeffs[0], f.coeffs[n], f.coeffs[2 * n]]
}

/// `L²` norm under the normalized torus measure (Parseval).
pub fn l2_norm(f: &SpectralField) -> f64 {
    f.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Project onto (Bloch-)divergence-free fields: at every mode with
/// `k + j ≠ 0` subtract the component along `k + j`; the `k + j = 0` slot is
/// left unchanged.
pub fn leray_project(f: &SpectralField) -> SpectralField {
    map_modes(f, |kj, v| {
        let k2 = kj[0] * kj[0] + kj[1] * kj[1] + kj[2] * kj[2];
        if k2 == 0.0 {
            return v;
        }
        let dot = kj[0] * v[0] + kj[1] * v[1] + kj[2] * v[2];
        let s = dot / k2;
        [v[0] - kj[0] * s, v[1] - kj[1] * s, v[2] - kj[2] * s]
    })
}
