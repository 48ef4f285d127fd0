//! Finite-dimensional spectral-theory toolkit: circular-contour Riesz
//! projectors, matrix exponentials and semigroup growth checks, eigenvalue
//! perturbation slopes, and the monodromy matrix of a time-periodic
//! velocity schedule with its Gelfand-formula cross-check.

use crate::error::{Error, Result};
use crate::par;
use crate::solver::{simulate, SolverConfig};
use crate::spectral::{Grid3, SpectralField};
use crate::velocity::Schedule;
use crate::Complex;
use faer::complex_native::c64;
use faer::prelude::*;
use faer::Mat;
use serde::Serialize;

/// Dense complex square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<Complex>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            *m.at_mut(i, i) = Complex::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n);
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn from_fn<F: Fn(usize, usize) -> Complex>(n: usize, f: F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                *m.at_mut(i, j) = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex {
        &mut self.data[i * self.n + j]
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| s * v).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-Complex::ONE))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                if a == Complex::ZERO {
                    continue;
                }
                for j in 0..n {
                    *out.at_mut(i, j) += a * other.at(k, j);
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &[Complex]) -> Vec<Complex> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.at(i, j) * x[j])
                    .sum::<Complex>()
            })
            .collect()
    }

    pub fn trace(&self) -> Complex {
        (0..self.n).map(|i| self.at(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    fn to_faer(&self) -> Mat<c64> {
        Mat::from_fn(self.n, self.n, |i, j| {
            let v = self.at(i, j);
            c64::new(v.re, v.im)
        })
    }

    /// Eigenvalues, sorted by decreasing real part.
    pub fn eigenvalues(&self) -> Result<Vec<Complex>> {
        let evd = self
            .to_faer()
            .eigendecomposition::<c64>();
        let s = evd.s().column_vector();
        let mut vals: Vec<Complex> = (0..self.n)
            .map(|i| {
                let v = s.read(i);
                Complex::new(v.re, v.im)
            })
            .collect();
        if vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::EigenFailure("non-finite eigenvalue".into()));
        }
        vals.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
        Ok(vals)
    }

    /// Full eigendecomposition; returns (eigenvalues, right eigenvectors as
    /// columns), unsorted.
    pub fn eigen_pairs(&self) -> Result<(Vec<Complex>, SquareMatrix)> {
        let evd = self.to_faer().eigendecomposition::<c64>();
        let s = evd.s().column_vector();
        let u = evd.u();
        let vals: Vec<Complex> = (0..self.n)
            .map(|i| {
                let v = s.read(i);
                Complex::new(v.re, v.im)
            })
            .collect();
        if vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::EigenFailure("non-finite eigenvalue".into()));
        }
        let vecs = SquareMatrix::from_fn(self.n, |i, j| {
            let v = u.read(i, j);
            Complex::new(v.re, v.im)
        });
        Ok((vals, vecs))
    }

    /// Solve `A X = B` for dense `B` (columns independently).
    fn solve_mat(&self, b: &SquareMatrix) -> SquareMatrix {
        let lu = self.to_faer().partial_piv_lu();
        let rhs = b.to_faer();
        let x = lu.solve(&rhs);
        SquareMatrix::from_fn(self.n, |i, j| {
            let v = x.read(i, j);
            Complex::new(v.re, v.im)
        })
    }
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &SquareMatrix) -> Result<f64> {
    Ok(m.eigenvalues()?
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max))
}

/// Circle along which the resolvent is integrated.
#[derive(Clone, Copy, Debug)]
pub struct ContourSpec {
    pub center: Complex,
    pub radius: f64,
    pub points: usize,
}

impl ContourSpec {
    pub fn new(center: Complex, radius: f64) -> Self {
        Self {
            center,
            radius,
            points: 64,
        }
    }
}

/// Riesz projector `(1/2πi) ∮ (z − A)⁻¹ dz` over the circle, by trapezoidal
/// quadrature (spectrally accurate since the integrand is analytic on the
/// contour). Errors when an eigenvalue sits within 1e−8 of the circle.
pub fn contour_projector(a: &SquareMatrix, spec: &ContourSpec) -> Result<SquareMatrix> {
    if spec.radius <= 0.0 || spec.points < 16 {
        return Err(Error::InvalidParameter(
            "contour needs positive radius and at least 16 quadrature points".into(),
        ));
    }
    for lambda in a.eigenvalues()? {
        let dist = ((lambda - spec.center).norm() - spec.radius).abs();
        if dist < 1e-8 {
            return Err(Error::ContourTooClose { dist });
        }
    }
    let n = a.dim();
    let m = spec.points;
    let mut p = SquareMatrix::zeros(n);
    for q in 0..m {
        let theta = 2.0 * std::f64::consts::PI * q as f64 / m as f64;
        let w = spec.radius * Complex::new(0.0, theta).exp();
        let z = spec.center + w;
        // (z - A) X = I, weighted by r e^{iθ}/m from dz = i r e^{iθ} dθ.
        let shifted = SquareMatrix::identity(n).scale(z).sub(a);
        let resolvent = shifted.solve_mat(&SquareMatrix::identity(n));
        p = p.add(&resolvent.scale(w / m as f64));
    }
    Ok(p)
}

/// `e^{At}` by scaling-and-squaring with a Taylor series on the scaled
/// matrix.
pub fn matrix_exponential(a: &SquareMatrix, t: f64) -> SquareMatrix {
    let n = a.dim();
    let at = a.scale(Complex::new(t, 0.0));
    let norm = at.frobenius_norm();
    let squarings = if norm <= 0.5 {
        0
    } else {
        (norm / 0.5).log2().ceil() as u32
    };
    let scaled = at.scale(Complex::new(0.5f64.powi(squarings as i32), 0.0));
    let mut result = SquareMatrix::identity(n);
    let mut term = SquareMatrix::identity(n);
    for k in 1..64 {
        term = term.matmul(&scaled).scale(Complex::new(1.0 / k as f64, 0.0));
        result = result.add(&term);
        if term.frobenius_norm() < 1e-18 * result.frobenius_norm().max(1.0) {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// `e^{At} x`.
pub fn semigroup_action(a: &SquareMatrix, x: &[Complex], t: f64) -> Vec<Complex> {
    matrix_exponential(a, t).apply(x)
}

/// Comparison record emitted by the verification routines.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CheckReport {
    pub expected: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(expected: f64, measured: f64, tolerance: f64) -> Self {
        Self {
            expected,
            measured,
            tolerance,
            pass: (expected - measured).abs() <= tolerance,
        }
    }
}

fn vec_norm(x: &[Complex]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Cluster eigenvalues whose real parts agree to `tol`, rightmost first.
fn real_part_clusters(eigs: &[Complex], tol: f64) -> Vec<Vec<Complex>> {
    let mut sorted = eigs.to_vec();
    sorted.sort_by(|a, b| b.re.total_cmp(&a.re));
    let mut clusters: Vec<Vec<Complex>> = Vec::new();
    for v in sorted {
        match clusters.last_mut() {
            Some(c) if (c[0].re - v.re).abs() <= tol => c.push(v),
            _ => clusters.push(vec![v]),
        }
    }
    clusters
}

fn cluster_projector(a: &SquareMatrix, cluster: &[Complex], others: &[Complex]) -> Result<SquareMatrix> {
    let center = cluster.iter().sum::<Complex>() / cluster.len() as f64;
    let spread = cluster
        .iter()
        .map(|v| (v - center).norm())
        .fold(0.0, f64::max);
    let gap = others
        .iter()
        .map(|v| (v - center).norm())
        .fold(f64::INFINITY, f64::min);
    let radius = if gap.is_finite() {
        spread + 0.5 * (gap - spread)
    } else {
        spread + 1.0
    };
    contour_projector(a, &ContourSpec::new(center, radius))
}

/// Verifies that the long-run growth rate of `t ↦ ‖e^{At}x‖` equals the
/// largest `Re λ` over eigenvalue clusters on which the Riesz projection of
/// `x` is nonzero.
pub fn growth_dichotomy_check(a: &SquareMatrix, x: &[Complex], horizon: f64) -> Result<CheckReport> {
    let eigs = a.eigenvalues()?;
    let clusters = real_part_clusters(&eigs, 1e-8);
    let xnorm = vec_norm(x);
    let mut expected = f64::NEG_INFINITY;
    for (ci, cluster) in clusters.iter().enumerate() {
        let others: Vec<Complex> = clusters
            .iter()
            .enumerate()
            .filter(|(cj, _)| *cj != ci)
            .flat_map(|(_, c)| c.iter().copied())
            .collect();
        let p = cluster_projector(a, cluster, &others)?;
        if vec_norm(&p.apply(x)) > 1e-8 * xnorm {
            expected = cluster[0].re;
            break;
        }
    }
    if !expected.is_finite() {
        return Err(Error::InvalidParameter(
            "initial vector has no spectral content".into(),
        ));
    }
    let gap = if clusters.len() >= 2 {
        clusters[0][0].re - clusters[1][0].re
    } else {
        1.0
    };
    // Fit log-norm slope over [horizon/2, horizon].
    let samples = 9;
    let mut pts = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = horizon / 2.0 + horizon / 2.0 * i as f64 / (samples - 1) as f64;
        pts.push((t, vec_norm(&semigroup_action(a, x, t)).ln()));
    }
    let measured = slope(&pts);
    Ok(CheckReport::new(expected, measured, 0.02 * gap.abs().max(1e-12)))
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    num / den
}

/// Result of the first-order perturbation comparison at one eigenvalue.
#[derive(Clone, Debug, Serialize)]
pub struct PerturbationReport {
    /// Eigenvalues of the projected perturbation restricted to the
    /// eigenspace (the predicted slopes).
    pub predicted: Vec<[f64; 2]>,
    /// Finite-difference slopes measured at the smallest offset in `j_list`.
    pub measured: Vec<[f64; 2]>,
    pub tolerance: Vec<f64>,
    pub pass: bool,
}

/// First-order slopes of the eigenvalues of `T₀ + j T₁` branching from the
/// semisimple eigenvalue `p` of `T₀`, compared against the eigenvalues of
/// `P T₁ P` restricted to the eigenspace. Branches are matched by nearest
/// neighbor.
pub fn perturbation_slopes(
    t0: &SquareMatrix,
    t1: &SquareMatrix,
    p_eig: Complex,
    j_list: &[f64],
) -> Result<PerturbationReport> {
    if j_list.is_empty() {
        return Err(Error::TooFewSamples { found: 0, need: 1 });
    }
    let eigs = t0.eigenvalues()?;
    let cluster: Vec<Complex> = eigs
        .iter()
        .copied()
        .filter(|v| (v - p_eig).norm() <= 1e-8)
        .collect();
    let others: Vec<Complex> = eigs
        .iter()
        .copied()
        .filter(|v| (v - p_eig).norm() > 1e-8)
        .collect();
    if cluster.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{p_eig} is not an eigenvalue of T0"
        )));
    }
    let rank = cluster.len();
    let proj = cluster_projector(t0, &cluster, &others)?;

    // Orthonormal basis of range(P) by column-pivoted Gram-Schmidt.
    let n = t0.dim();
    let mut basis: Vec<Vec<Complex>> = Vec::with_capacity(rank);
    for j in 0..n {
        if basis.len() == rank {
            break;
        }
        let mut col: Vec<Complex> = (0..n).map(|i| proj.at(i, j)).collect();
        for b in &basis {
            let dot: Complex = b.iter().zip(&col).map(|(bi, ci)| bi.conj() * ci).sum();
            for (ci, bi) in col.iter_mut().zip(b) {
                *ci -= dot * bi;
            }
        }
        let norm = vec_norm(&col);
        if norm > 1e-8 {
            for c in col.iter_mut() {
                *c /= norm;
            }
            basis.push(col);
        }
    }
    if basis.len() != rank {
        return Err(Error::EigenFailure(
            "projector range basis deficient".into(),
        ));
    }

    // Restricted matrix Q* T1 Q.
    let restricted = SquareMatrix::from_fn(rank, |i, j| {
        let t1qj = t1.apply(&basis[j]);
        basis[i]
            .iter()
            .zip(&t1qj)
            .map(|(bi, vi)| bi.conj() * vi)
            .sum()
    });
    let mut predicted = restricted.eigenvalues()?;

    // Finite differences at the smallest offset.
    let j_small = j_list.iter().copied().fold(f64::INFINITY, f64::min);
    let perturbed = t0.add(&t1.scale(Complex::new(j_small, 0.0)));
    let mut branch_eigs = perturbed.eigenvalues()?;
    branch_eigs.sort_by(|a, b| (a - p_eig).norm().total_cmp(&(b - p_eig).norm()));
    let mut measured: Vec<Complex> = branch_eigs[..rank]
        .iter()
        .map(|v| (v - p_eig) / j_small)
        .collect();

    // Nearest-neighbor matching of measured slopes to predictions.
    predicted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut matched = Vec::with_capacity(rank);
    for p in &predicted {
        let (best, _) = measured
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - p).norm().total_cmp(&(b.1 - p).norm()))
            .expect("branch list non-empty");
        matched.push(measured.remove(best));
    }

    let tolerance: Vec<f64> = predicted
        .iter()
        .map(|mu| (0.05 * mu.norm()).max(1e-6))
        .collect();
    let pass = predicted
        .iter()
        .zip(&matched)
        .zip(&tolerance)
        .all(|((p, m), tol)| (p - m).norm() <= *tol);
    Ok(PerturbationReport {
        predicted: predicted.iter().map(|v| [v.re, v.im]).collect(),
        measured: matched.iter().map(|v| [v.re, v.im]).collect(),
        tolerance,
        pass,
    })
}

/// Matrix of the period map of a time-periodic schedule: each spectral basis
/// vector on `grid` (optionally restricted to one `k_z` plane, which is
/// invariant because every scheduled velocity is z-independent) is evolved
/// over one period and read back out. Columns are built in parallel.
pub fn monodromy_matrix(
    schedule: &Schedule,
    config: &SolverConfig,
    grid: Grid3,
    kz_plane: Option<i64>,
) -> Result<SquareMatrix> {
    let mut slots: Vec<(usize, usize)> = Vec::new();
    for c in 0..3 {
        for ix in 0..grid.nx() {
            for iy in 0..grid.ny() {
                for iz in 0..grid.nz() {
                    let k = grid.wavevector(ix, iy, iz);
                    if let Some(plane) = kz_plane {
                        if k[2] != plane {
                            continue;
                        }
                    }
                    slots.push((c, grid.index(ix, iy, iz)));
                }
            }
        }
    }
    let dim = slots.len();
    if dim > 4000 {
        return Err(Error::MonodromyTooLarge { dim, max: 4000 });
    }
    let period = schedule.horizon();
    let columns: Vec<Result<Vec<Complex>>> = par::map_indices(dim, |col| {
        let (c, idx) = slots[col];
        let mut b = SpectralField::zeros(grid);
        b.coeffs[c * grid.len() + idx] = Complex::ONE;
        let (b_final, _) = simulate(schedule, &b, config, period)?;
        Ok(slots
            .iter()
            .map(|&(cc, ii)| b_final.coeffs[cc * grid.len() + ii])
            .collect())
    });
    let mut phi = SquareMatrix::zeros(dim);
    for (col, res) in columns.into_iter().enumerate() {
        let column = res?;
        for (row, v) in column.into_iter().enumerate() {
            *phi.at_mut(row, col) = v;
        }
    }
    Ok(phi)
}

/// Gelfand cross-check: `log r(Φ)/period` against an independently fitted
/// long-run rate. Tolerance is 5% relative, or 0.005 absolute near zero.
pub fn gelfand_check(phi: &SquareMatrix, period: f64, fitted_rate: f64) -> Result<CheckReport> {
    let expected = spectral_radius(phi)?.ln() / period;
    let tolerance = (0.05 * expected.abs()).max(0.005);
    Ok(CheckReport::new(expected, fitted_rate, tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(entries: &[Complex]) -> SquareMatrix {
        SquareMatrix::from_fn(entries.len(), |i, j| {
            if i == j {
                entries[i]
            } else {
                Complex::ZERO
            }
        })
    }

    fn re(x: f64) -> Complex {
        Complex::new(x, 0.0)
    }

    #[test]
    fn projector_isolates_a_diagonal_eigenvalue() {
        let a = diag(&[re(1.0), re(2.0), re(3.0)]);
        let p = contour_projector(&a, &ContourSpec::new(re(1.0), 0.4)).unwrap();
        let expected = diag(&[re(1.0), re(0.0), re(0.0)]);
        assert!(p.sub(&expected).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn projector_identities_hold() {
        let a = SquareMatrix::from_fn(4, |i, j| {
            Complex::new(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 - 1.0)
        });
        let eigs = a.eigenvalues().unwrap();
        let lead = eigs[0];
        let gap = eigs[1..]
            .iter()
            .map(|v| (v - lead).norm())
            .fold(f64::INFINITY, f64::min);
        let p = contour_projector(&a, &ContourSpec::new(lead, gap / 2.0)).unwrap();
        assert!(p.matmul(&p).sub(&p).frobenius_norm() <= 1e-10);
        let comm = p.matmul(&a).sub(&a.matmul(&p));
        assert!(comm.frobenius_norm() <= 1e-10 * a.frobenius_norm());
        let tr = p.trace();
        assert_abs_diff_eq!(tr.re, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(tr.im, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn quadrature_converges_exponentially() {
        let a = diag(&[re(0.0), re(1.0)]);
        let exact = diag(&[re(1.0), re(0.0)]);
        let err = |m: usize| {
            let spec = ContourSpec {
                center: re(0.0),
                radius: 0.5,
                points: m,
            };
            contour_projector(&a, &spec)
                .unwrap()
                .sub(&exact)
                .frobenius_norm()
        };
        let e16 = err(16);
        let e32 = err(32);
        assert!(e32 <= e16 / 100.0 || e32 <= 1e-12);
    }

    #[test]
    fn contour_through_an_eigenvalue_is_rejected() {
        let a = diag(&[re(1.0), re(2.0)]);
        let r = contour_projector(&a, &ContourSpec::new(re(1.0), 1.0));
        assert!(matches!(r, Err(Error::ContourTooClose { .. })));
    }

    #[test]
    fn exponential_special_cases() {
        let x = vec![re(2.0), re(-1.0)];
        let zero = SquareMatrix::zeros(2);
        let y = semigroup_action(&zero, &x, 3.0);
        assert!(vec_norm(&[y[0] - x[0], y[1] - x[1]]) <= 1e-14);

        let a = diag(&[re(-1.0), re(-1.0)]);
        let y = semigroup_action(&a, &x, 1.0);
        let e = (-1.0f64).exp();
        assert_abs_diff_eq!(y[0].re, 2.0 * e, epsilon = 1e-12);

        // Nilpotent: e^{At}x = x + t (x2, 0).
        let mut nil = SquareMatrix::zeros(2);
        *nil.at_mut(0, 1) = re(1.0);
        let t = 0.7;
        let y = semigroup_action(&nil, &x, t);
        assert_abs_diff_eq!(y[0].re, 2.0 + t * -1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(y[1].re, -1.0, epsilon = 1e-13);
    }

    #[test]
    fn dichotomy_depends_on_projection() {
        let a = diag(&[re(1.0), re(-1.0)]);
        let r = growth_dichotomy_check(&a, &[re(0.0), re(1.0)], 10.0).unwrap();
        assert!(r.pass);
        assert_abs_diff_eq!(r.expected, -1.0, epsilon = 1e-12);
        let r = growth_dichotomy_check(&a, &[re(1.0), re(1.0)], 10.0).unwrap();
        assert!(r.pass);
        assert_abs_diff_eq!(r.expected, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn riesz_split_rates_straddle_the_gap() {
        let a = diag(&[re(0.5), re(-0.7), re(-0.7)]);
        let x = vec![re(1.0), re(1.0), re(0.5)];
        let p = contour_projector(&a, &ContourSpec::new(re(0.5), 0.5)).unwrap();
        let px = p.apply(&x);
        let qx: Vec<Complex> = x.iter().zip(&px).map(|(a, b)| a - b).collect();
        let rate = |v: &[Complex]| {
            let pts: Vec<(f64, f64)> = (1..=8)
                .map(|i| {
                    let t = i as f64;
                    (t, vec_norm(&semigroup_action(&a, v, t)).ln())
                })
                .collect();
            slope(&pts)
        };
        assert_abs_diff_eq!(rate(&px), 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(rate(&qx), -0.7, epsilon = 1e-8);
    }

    #[test]
    fn exact_linear_family_slopes() {
        let t0 = SquareMatrix::zeros(3);
        let t1 = diag(&[re(1.0), re(2.0), re(3.0)]);
        let report = perturbation_slopes(&t0, &t1, Complex::ZERO, &[0.01]).unwrap();
        assert!(report.pass);
        let got: Vec<f64> = report.predicted.iter().map(|v| v[0]).collect();
        assert_abs_diff_eq!(got[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(got[1], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(got[2], 3.0, epsilon = 1e-9);
    }

    #[test]
    fn projector_continuity_under_scaling() {
        // T(kappa) = kappa*T0 + T1 with T0 negative definite.
        let t0 = diag(&[re(-1.0), re(-2.0), re(-3.0)]);
        let t1 = SquareMatrix::from_fn(3, |i, j| re(if i == j { 0.3 } else { 0.1 }));
        let proj_at = |kappa: f64| {
            let a = t0.scale(re(kappa)).add(&t1);
            let eigs = a.eigenvalues().unwrap();
            let lead = eigs[0];
            let gap = eigs[1..]
                .iter()
                .map(|v| (v - lead).norm())
                .fold(f64::INFINITY, f64::min);
            contour_projector(&a, &ContourSpec::new(lead, gap / 2.0)).unwrap()
        };
        let p1 = proj_at(1.0);
        let mut last = f64::INFINITY;
        for kappa in [1.1, 1.05, 1.01] {
            let d = proj_at(kappa).sub(&p1).frobenius_norm();
            assert!(d < last);
            last = d;
        }
    }
}
