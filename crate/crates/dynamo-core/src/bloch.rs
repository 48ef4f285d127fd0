//! Spectral machinery around the alpha effect of the two-mode ABC flow
//! `U = (cos y, sin x, sin y + cos x)`: the corrector field `S(v)`, the Riesz
//! projection onto near-mean fields, the 3×3 alpha matrix, the Bloch operator
//! `𝓛(j)` on the z-invariant subspace with its leading eigenvalue, and the
//! discrete rescaling symmetry check.

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::solver::{simulate, SolverConfig};
use crate::spectral::{
    backward_transform, cross_product, curl_bloch, dealias, forward_transform,
    inverse_laplacian_zero_mean, laplacian_bloch, mean, zero_nyquist, Grid3,
    PhysicalField, SpectralField,
};
use crate::velocity::{eps_n, sample_velocity, Polarization, Schedule, VelocityTag};
use crate::Complex;
use serde::Serialize;

const I: Complex = Complex::new(0.0, 1.0);

/// Grid used internally whenever an operation needs the base ABC flow but no
/// caller-visible field: the flow has unit horizontal frequency and no
/// z-dependence, so a thin z axis suffices.
fn analysis_grid() -> Grid3 {
    Grid3::new(32, 32, 4).expect("static grid dimensions are valid")
}

fn curl_of_product(u: &PhysicalField, s_phys: &PhysicalField, limit: i64) -> Result<SpectralField> {
    let prod = cross_product(u, s_phys)?;
    let mut spec = forward_transform(&prod);
    zero_nyquist(&mut spec);
    Ok(curl_bloch(&dealias(&spec, limit)))
}

fn constant_physical(grid: Grid3, v: [Complex; 3]) -> PhysicalField {
    let mut f = PhysicalField::zeros(grid);
    let n = grid.len();
    for c in 0..3 {
        for x in &mut f.values[c * n..(c + 1) * n] {
            *x = v[c];
        }
    }
    f
}

fn difference_norm(a: &SpectralField, b: &SpectralField) -> f64 {
    a.coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Zero-mean solution `S(v)` of `∇×(δU×S) + ΔS = ∇×(v×δU)`, computed by the
/// fixed-point iteration `S ← Δ⁻¹(∇×(v×δU) − ∇×(δU×S))`, a contraction for
/// δ < 1.
pub fn solve_corrector(v: [Complex; 3], delta: f64, grid: Grid3) -> Result<SpectralField> {
    let u = sample_velocity(VelocityTag::Abc { delta }, grid)?;
    let limit = (grid.nx().min(grid.ny()).min(grid.nz()) / 3) as i64;
    let v_phys = constant_physical(grid, v);
    let rhs = curl_of_product(&v_phys, &u, limit)?;
    let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();

    let mut s = SpectralField::zeros(grid);
    let mut increment = f64::INFINITY;
    for _ in 0..200 {
        let s_phys = backward_transform(&s);
        let advect = curl_of_product(&u, &s_phys, limit)?;
        let mut forcing = rhs.clone();
        for (f, a) in forcing.coeffs.iter_mut().zip(&advect.coeffs) {
            *f -= a;
        }
        let next = inverse_laplacian_zero_mean(&forcing);
        increment = difference_norm(&next, &s);
        s = next;
        if increment <= 1e-13 * vnorm.max(1.0) {
            break;
        }
    }
    if increment > 1e-13 * vnorm.max(1.0) {
        return Err(Error::CorrectorDiverged {
            iterations: 200,
            increment,
        });
    }

    // Residual of the defining equation.
    let s_phys = backward_transform(&s);
    let advect = curl_of_product(&u, &s_phys, limit)?;
    let lap = laplacian_bloch(&s);
    let residual = rhs
        .coeffs
        .iter()
        .zip(&advect.coeffs)
        .zip(&lap.coeffs)
        .map(|((r, a), l)| (a + l - r).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > 1e-10 * vnorm.max(1e-30) {
        return Err(Error::CorrectorDiverged {
            iterations: 200,
            increment: residual,
        });
    }
    Ok(s)
}

/// Riesz projection `P H = ⟨H⟩ + S(⟨H⟩)` onto the slow subspace.
pub fn riesz_projection(h: &SpectralField, delta: f64) -> Result<SpectralField> {
    let m = mean(h);
    let mut out = solve_corrector(m, delta, h.grid)?;
    for c in 0..3 {
        *out.coeff_mut(c, 0) += m[c];
    }
    Ok(out)
}

/// 3×3 alpha-effect matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaMatrix(pub [[Complex; 3]; 3]);

impl AlphaMatrix {
    /// Printed closed form `iδ²·(0,−1,0; 1,0,0; 0,0,0)`.
    pub fn closed_form(delta: f64) -> Self {
        let d2 = I * delta * delta;
        let z = Complex::ZERO;
        AlphaMatrix([[z, -d2, z], [d2, z, z], [z, z, z]])
    }

    pub fn to_square(&self) -> SquareMatrix {
        SquareMatrix::from_fn(3, |i, j| self.0[i][j])
    }

    /// Eigenvalues sorted by decreasing real part.
    pub fn eigenvalues(&self) -> Result<Vec<Complex>> {
        self.to_square().eigenvalues()
    }

    /// Eigenvector of the eigenvalue closest to `target`, normalized so that
    /// its second entry is 1.
    pub fn eigenvector_for(&self, target: Complex) -> Result<[Complex; 3]> {
        let (vals, vecs) = self.to_square().eigen_pairs()?;
        let (best, _) = vals
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
            .ok_or_else(|| Error::EigenFailure("empty spectrum".into()))?;
        let raw = [vecs.at(0, best), vecs.at(1, best), vecs.at(2, best)];
        if raw[1].norm() < 1e-12 {
            return Err(Error::EigenFailure(
                "eigenvector has vanishing second entry".into(),
            ));
        }
        Ok([raw[0] / raw[1], Complex::ONE, raw[2] / raw[1]])
    }

    /// Row-major serialization as `[re, im]` pairs.
    pub fn to_json_rows(&self) -> Vec<Vec<[f64; 2]>> {
        self.0
            .iter()
            .map(|row| row.iter().map(|v| [v.re, v.im]).collect())
            .collect()
    }
}

/// Alpha matrix assembled from correctors: column `ℓ` is
/// `i e₃ × ⟨δU × S(e_ℓ)⟩`.
pub fn assemble_alpha_matrix(delta: f64, grid: Grid3) -> Result<AlphaMatrix> {
    let u = sample_velocity(VelocityTag::Abc { delta }, grid)?;
    let mut cols = [[Complex::ZERO; 3]; 3];
    for (l, col) in cols.iter_mut().enumerate() {
        let mut e = [Complex::ZERO; 3];
        e[l] = Complex::ONE;
        let s = solve_corrector(e, delta, grid)?;
        let s_phys = backward_transform(&s);
        let prod = cross_product(&u, &s_phys)?;
        let npts = grid.len() as f64;
        let avg: Vec<Complex> = (0..3)
            .map(|c| prod.component(c).iter().sum::<Complex>() / npts)
            .collect();
        // i e3 x w = i (-w2, w1, 0).
        *col = [-I * avg[1], I * avg[0], Complex::ZERO];
    }
    Ok(AlphaMatrix([
        [cols[0][0], cols[1][0], cols[2][0]],
        [cols[0][1], cols[1][1], cols[2][1]],
        [cols[0][2], cols[1][2], cols[2][2]],
    ]))
}

/// Pick the generation polarization that the assembled alpha matrix actually
/// amplifies: the eigenvector for the eigenvalue nearest `+δ²`, which is
/// `(±i, 1, 0)` up to `O(δ)` corrections.
pub fn growing_polarization(delta: f64) -> Result<(Polarization, [Complex; 3])> {
    let m = assemble_alpha_matrix(delta, analysis_grid())?;
    let target = Complex::new(delta * delta, 0.0);
    let v = m.eigenvector_for(target)?;
    let pol = if v[0].im > 0.0 {
        Polarization::PlusI
    } else {
        Polarization::MinusI
    };
    Ok((pol, v))
}

/// Matrix of the Bloch operator `𝓛(j) = ∇_j×(u×·) + Δ_j` restricted to the
/// z-invariant subspace `k_z = 0`, truncated to `|k_x|, |k_y| ≤ K`.
pub struct BlochMatrix {
    pub k_trunc: usize,
    pub j: f64,
    pub matrix: SquareMatrix,
}

impl BlochMatrix {
    pub fn dim(&self) -> usize {
        3 * (2 * self.k_trunc + 1) * (2 * self.k_trunc + 1)
    }

    /// Row index of component `c` at horizontal mode `(kx, ky)`.
    pub fn index(&self, c: usize, kx: i64, ky: i64) -> usize {
        let k = self.k_trunc as i64;
        let side = (2 * self.k_trunc + 1) as i64;
        ((((kx + k) * side) + (ky + k)) * 3 + c as i64) as usize
    }

    /// Inverse of `index`.
    pub fn mode(&self, row: usize) -> (usize, i64, i64) {
        let side = 2 * self.k_trunc + 1;
        let c = row % 3;
        let rest = row / 3;
        let kx = (rest / side) as i64 - self.k_trunc as i64;
        let ky = (rest % side) as i64 - self.k_trunc as i64;
        (c, kx, ky)
    }
}

/// Fourier modes of the ABC flow at unit amplitude: `(q, Û_q)` with
/// `q = (q_x, q_y)`.
fn abc_modes() -> [([i64; 2], [Complex; 3]); 4] {
    let half = Complex::new(0.5, 0.0);
    let ihalf = Complex::new(0.0, 0.5);
    [
        ([1, 0], [Complex::ZERO, -ihalf, half]),
        ([-1, 0], [Complex::ZERO, ihalf, half]),
        ([0, 1], [half, Complex::ZERO, -ihalf]),
        ([0, -1], [half, Complex::ZERO, ihalf]),
    ]
}

fn cross(a: [Complex; 3], b: [Complex; 3]) -> [Complex; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Assemble the truncated Bloch matrix. The flow couples only adjacent
/// horizontal modes, so each column has the diffusion diagonal plus at most
/// four advection stencil blocks.
pub fn assemble_bloch_matrix(delta: f64, j: f64, k_trunc: usize) -> Result<BlochMatrix> {
    if k_trunc < 2 {
        return Err(Error::InvalidParameter(format!(
            "truncation must be at least 2, got {k_trunc}"
        )));
    }
    let side = 2 * k_trunc + 1;
    let dim = 3 * side * side;
    let mut out = BlochMatrix {
        k_trunc,
        j,
        matrix: SquareMatrix::zeros(dim),
    };
    let kk = k_trunc as i64;
    let modes = abc_modes();
    for kx in -kk..=kk {
        for ky in -kk..=kk {
            for c in 0..3 {
                let col = out.index(c, kx, ky);
                let diag = -((kx * kx + ky * ky) as f64 + j * j);
                *out.matrix.at_mut(col, col) += Complex::new(diag, 0.0);
                let mut e = [Complex::ZERO; 3];
                e[c] = Complex::ONE;
                for (q, uq) in modes {
                    let (rx, ry) = (kx + q[0], ky + q[1]);
                    if rx.abs() > kk || ry.abs() > kk {
                        continue;
                    }
                    let uq = [delta * uq[0], delta * uq[1], delta * uq[2]];
                    let uxe = cross(uq, e);
                    // i (k' + j e3) x (U_q x e_c) at the receiving mode k'.
                    let kj = [
                        Complex::new(rx as f64, 0.0),
                        Complex::new(ry as f64, 0.0),
                        Complex::new(j, 0.0),
                    ];
                    let term = cross(kj, uxe);
                    for rc in 0..3 {
                        *out.matrix.at_mut(out.index(rc, rx, ry), col) += I * term[rc];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Matrix-free Bloch operator `𝓛(j)H` on a grid field carrying
/// `bloch_j = (0, 0, j)`.
pub fn apply_bloch_operator(h: &SpectralField, delta: f64, limit: i64) -> Result<SpectralField> {
    let u = sample_velocity(VelocityTag::Abc { delta }, h.grid)?;
    let h_phys = backward_transform(h);
    let prod = cross_product(&u, &h_phys)?;
    let mut spec = forward_transform(&prod);
    spec.bloch_j = h.bloch_j;
    zero_nyquist(&mut spec);
    let advect = curl_bloch(&dealias(&spec, limit));
    let mut out = laplacian_bloch(h);
    for (o, a) in out.coeffs.iter_mut().zip(&advect.coeffs) {
        *o += a;
    }
    Ok(out)
}

/// Leading Bloch eigenpair.
#[derive(Clone, Debug, Serialize)]
pub struct EigenReport {
    pub k_trunc: usize,
    pub j: f64,
    /// Eigenvalues sorted by decreasing real part (at most the first 10).
    pub eigenvalues: Vec<[f64; 2]>,
    pub leading: [f64; 2],
    pub residual: f64,
    /// Mean 3-vector (horizontal mode (0,0)) of the leading eigenvector.
    pub mean_vector: [[f64; 2]; 3],
    #[serde(skip)]
    pub eigenvector: Vec<Complex>,
}

/// Eigenvalue of maximal real part of the truncated Bloch matrix, with its
/// eigenvector, by dense eigensolve (dimension at most 2000; larger
/// truncations must go through the semigroup power iteration instead).
pub fn leading_bloch_mode(delta: f64, j: f64, k_trunc: usize) -> Result<EigenReport> {
    let bloch = assemble_bloch_matrix(delta, j, k_trunc)?;
    let dim = bloch.dim();
    if dim > 2000 {
        return Err(Error::MonodromyTooLarge { dim, max: 2000 });
    }
    let (vals, vecs) = bloch.matrix.eigen_pairs()?;
    let (best, _) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.re.total_cmp(&b.1.re))
        .ok_or_else(|| Error::EigenFailure("empty spectrum".into()))?;
    let leading = vals[best];
    let v: Vec<Complex> = (0..dim).map(|i| vecs.at(i, best)).collect();
    let vnorm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let av = bloch.matrix.apply(&v);
    let residual = av
        .iter()
        .zip(&v)
        .map(|(a, x)| (a - leading * x).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / (vnorm * bloch.matrix.frobenius_norm()).max(1e-300);

    let mut sorted = vals.clone();
    sorted.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let mean_vector = [
        v[bloch.index(0, 0, 0)],
        v[bloch.index(1, 0, 0)],
        v[bloch.index(2, 0, 0)],
    ];
    Ok(EigenReport {
        k_trunc,
        j,
        eigenvalues: sorted
            .iter()
            .take(10)
            .map(|x| [x.re, x.im])
            .collect(),
        leading: [leading.re, leading.im],
        residual,
        mean_vector: [
            [mean_vector[0].re, mean_vector[0].im],
            [mean_vector[1].re, mean_vector[1].im],
            [mean_vector[2].re, mean_vector[2].im],
        ],
        eigenvector: v,
    })
}

/// Leading-order growth rate of the Bloch eigenvalue: `jδ² − j²`.
pub fn predicted_alpha_rate(delta: f64, j: f64) -> f64 {
    j * delta * delta - j * j
}

/// Initial datum for the growth phase: the mean `(0,0,1)` plus, at mode
/// `(0,0,n)`, the eigenvector of the assembled alpha matrix for the
/// eigenvalue nearest `+δ²`, normalized so its second entry is 1 (so it is
/// `(±i, 1, 0)` up to `O(δ)`). Its norm is `√3` up to the same corrections.
pub fn growth_initial_datum(delta: f64, grid: Grid3, n: u32) -> Result<SpectralField> {
    let (_, v) = growing_polarization(delta)?;
    let mut f = SpectralField::single_mode(grid, [0, 0, n as i64], v)?;
    *f.coeff_mut(2, 0) += Complex::ONE;
    Ok(f)
}

/// Outcome of the rescaling-symmetry comparison.
#[derive(Clone, Debug, Serialize)]
pub struct RescalingReport {
    pub n: u32,
    pub n0: u32,
    pub horizon: f64,
    pub samples_compared: usize,
    pub max_relative_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks the rescaling symmetry `B⁽ⁿ⁾(t, x) = B(t, n x)`: the base problem
/// (block size 1, diffusivity `1/N₀²`) and the `n`-fold rescaled problem
/// (diffusivity `1/(N₀²n²)`, grid refined `n`-fold so the rescaling is exact
/// on the discretization) must produce the same energy history.
pub fn rescaling_check(
    delta: f64,
    n0: u32,
    n: u32,
    horizon: f64,
    base_grid: Grid3,
) -> Result<RescalingReport> {
    let fine_grid = Grid3::new(
        base_grid.nx() * n as usize,
        base_grid.ny() * n as usize,
        base_grid.nz() * n as usize,
    )?;
    let base_limit = (base_grid.nx().min(base_grid.ny()).min(base_grid.nz()) / 3) as i64;

    let run = |grid: Grid3, block: u32, eps: f64, limit: i64| -> Result<_> {
        let tag = VelocityTag::RescaledAbc {
            n: block,
            n0,
            delta,
        };
        let schedule = Schedule::constant(tag, horizon);
        let datum = growth_initial_datum(delta, grid, block)?;
        let config = SolverConfig {
            dt: Some(0.05),
            eps,
            dealias_limit: Some(limit),
            sample_every: 4,
            leray_every: 100,
        };
        simulate(&schedule, &datum, &config, horizon)
    };

    let (_, base_hist) = run(base_grid, 1, eps_n(1, n0), base_limit)?;
    let (_, fine_hist) = run(fine_grid, n, eps_n(n, n0), base_limit * n as i64)?;

    if base_hist.samples.len() != fine_hist.samples.len() {
        return Err(Error::ShapeMismatch(format!(
            "history lengths differ: {} vs {}",
            base_hist.samples.len(),
            fine_hist.samples.len()
        )));
    }
    let mut max_rel: f64 = 0.0;
    for (a, b) in base_hist.samples.iter().zip(&fine_hist.samples) {
        let rel = (a.l2_norm - b.l2_norm).abs() / a.l2_norm.max(1e-300);
        max_rel = max_rel.max(rel);
    }
    Ok(RescalingReport {
        n,
        n0,
        horizon,
        samples_compared: base_hist.samples.len(),
        max_relative_deviation: max_rel,
        tolerance: 1e-6,
        pass: max_rel <= 1e-6,
    })
}
