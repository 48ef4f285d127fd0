//! Time integration of the induction equation
//! `∂ₜB = ∇×(u×B) + εΔB` with piecewise-constant-in-time velocities.
//!
//! Diffusion is handled exactly through an integrating factor
//! `e^{−ε|k+j|²dt}` per mode; the advection-stretching term is discretized in
//! curl form (which conserves the spatial mean identically) and advanced with
//! the classical 4-stage rule. Segments with zero velocity are propagated by
//! the exact heat semigroup.

use crate::error::{Error, Result};
use crate::spectral::{
    backward_transform, cross_product, curl_bloch, dealias, divergence_bloch, forward_transform,
    l2_norm, leray_project, mean, zero_nyquist, Grid3, PhysicalField, SpectralField,
};
use crate::velocity::{sample_velocity, Schedule, VelocityTag};
use crate::Complex;
use std::io::Write;

/// Integration parameters. `dt = None` selects the default step
/// `min(0.1, 0.25/(k_max·max|u|))` per segment; an explicit `dt` is used as
/// given. `dealias_limit = None` keeps modes with every
/// `|k_axis| ≤ min_axis/3` (the 3/2 rule).
#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    pub dt: Option<f64>,
    pub eps: f64,
    pub dealias_limit: Option<i64>,
    pub sample_every: usize,
    pub leray_every: usize,
}

impl SolverConfig {
    pub fn new(eps: f64) -> Self {
        Self {
            dt: None,
            eps,
            dealias_limit: None,
            sample_every: 16,
            leray_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "diffusivity must be positive, got {}",
                self.eps
            )));
        }
        if let Some(dt) = self.dt {
            if dt <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "time step must be positive, got {dt}"
                )));
            }
        }
        Ok(())
    }

    fn limit_for(&self, grid: Grid3) -> i64 {
        self.dealias_limit.unwrap_or_else(|| {
            (grid.nx().min(grid.ny()).min(grid.nz()) / 3) as i64
        })
    }

    fn dt_for(&self, grid: Grid3, tag: VelocityTag) -> f64 {
        if let Some(dt) = self.dt {
            return dt;
        }
        let base = 0.1;
        let sup = tag.sup_norm();
        if sup == 0.0 {
            return base;
        }
        let k_max = self.limit_for(grid) as f64;
        base.min(0.25 / (k_max * sup))
    }
}

/// Advection-stretching term `∇×(u×B)` evaluated pseudo-spectrally: synthesis
/// of `B`, pointwise cross product, analysis, Nyquist zeroing, dealiasing,
/// Bloch curl.
pub fn rhs_advect_stretch(
    b: &SpectralField,
    u: &PhysicalField,
    dealias_limit: i64,
) -> Result<SpectralField> {
    if b.grid != u.grid {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            b.grid, u.grid
        )));
    }
    let b_phys = backward_transform(b);
    let prod = cross_product(u, &b_phys)?;
    let mut spec = forward_transform(&prod);
    spec.bloch_j = b.bloch_j;
    zero_nyquist(&mut spec);
    let spec = dealias(&spec, dealias_limit);
    Ok(curl_bloch(&spec))
}

/// One integrating-factor RK4 stepper for a fixed `(grid, bloch_j, ε, dt)`;
/// the per-mode half-step decay factors are cached.
pub struct Stepper {
    grid: Grid3,
    bloch_j: [f64; 3],
    dt: f64,
    dealias_limit: i64,
    e_half: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: Grid3, bloch_j: [f64; 3], eps: f64, dt: f64, dealias_limit: i64) -> Self {
        let mut e_half = vec![0.0; grid.len()];
        for ix in 0..grid.nx() {
            for iy in 0..grid.ny() {
                for iz in 0..grid.nz() {
                    let k = grid.wavevector(ix, iy, iz);
                    let kj2 = (k[0] as f64 + bloch_j[0]).powi(2)
                        + (k[1] as f64 + bloch_j[1]).powi(2)
                        + (k[2] as f64 + bloch_j[2]).powi(2);
                    e_half[grid.index(ix, iy, iz)] = (-eps * kj2 * dt / 2.0).exp();
                }
            }
        }
        Self {
            grid,
            bloch_j,
            dt,
            dealias_limit,
            e_half,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn apply_factor(&self, f: &mut SpectralField, half_steps: i32) {
        let n = self.grid.len();
        for c in 0..3 {
            let slab = &mut f.coeffs[c * n..(c + 1) * n];
            for (v, &e) in slab.iter_mut().zip(&self.e_half) {
                *v *= e.powi(half_steps);
            }
        }
    }

    /// Advance `b` by one step of length `dt` under frozen velocity `u`.
    pub fn step(&self, b: &SpectralField, u: &PhysicalField) -> Result<SpectralField> {
        debug_assert_eq!(b.grid, self.grid);
        debug_assert_eq!(b.bloch_j, self.bloch_j);
        let dt = self.dt;
        let rhs = |f: &SpectralField| -> Result<SpectralField> {
            let mut r = rhs_advect_stretch(f, u, self.dealias_limit)?;
            scale(&mut r, dt);
            Ok(r)
        };

        let a = rhs(b)?;

        let mut s2 = b.clone();
        add_scaled(&mut s2, &a, 0.5);
        self.apply_factor(&mut s2, 1);
        let bb = rhs(&s2)?;

        let mut s3 = b.clone();
        self.apply_factor(&mut s3, 1);
        add_scaled(&mut s3, &bb, 0.5);
        let cc = rhs(&s3)?;

        let mut s4 = b.clone();
        self.apply_factor(&mut s4, 2);
        let mut ec = cc.clone();
        self.apply_factor(&mut ec, 1);
        add_scaled(&mut s4, &ec, 1.0);
        let dd = rhs(&s4)?;

        let mut out = b.clone();
        self.apply_factor(&mut out, 2);
        let mut acc = a;
        self.apply_factor(&mut acc, 2);
        add_scaled(&mut out, &acc, 1.0 / 6.0);
        let mut bc = bb;
        add_scaled(&mut bc, &cc, 1.0);
        self.apply_factor(&mut bc, 1);
        add_scaled(&mut out, &bc, 1.0 / 3.0);
        add_scaled(&mut out, &dd, 1.0 / 6.0);
        Ok(out)
    }
}

fn scale(f: &mut SpectralField, s: f64) {
    for v in f.coeffs.iter_mut() {
        *v *= s;
    }
}

fn add_scaled(f: &mut SpectralField, g: &SpectralField, s: f64) {
    debug_assert_eq!(f.coeffs.len(), g.coeffs.len());
    for (a, b) in f.coeffs.iter_mut().zip(&g.coeffs) {
        *a += s * b;
    }
}

/// Exact heat-semigroup propagation over `dt` (used for zero-velocity
/// segments, where it is the full solution operator).
pub fn diffuse_exact(b: &mut SpectralField, eps: f64, dt: f64) {
    let grid = b.grid;
    let n = grid.len();
    let j = b.bloch_j;
    for ix in 0..grid.nx() {
        for iy in 0..grid.ny() {
            for iz in 0..grid.nz() {
                let k = grid.wavevector(ix, iy, iz);
                let kj2 = (k[0] as f64 + j[0]).powi(2)
                    + (k[1] as f64 + j[1]).powi(2)
                    + (k[2] as f64 + j[2]).powi(2);
                let e = (-eps * kj2 * dt).exp();
                let idx = grid.index(ix, iy, iz);
                b.coeffs[idx] *= e;
                b.coeffs[n + idx] *= e;
                b.coeffs[2 * n + idx] *= e;
            }
        }
    }
}

/// One energy-history sample.
#[derive(Clone, Copy, Debug)]
pub struct EnergySample {
    pub t: f64,
    pub l2_norm: f64,
    pub mean: [Complex; 3],
    pub div_residual: f64,
}

/// Time series of norms, means and divergence residuals along a run.
#[derive(Clone, Debug, Default)]
pub struct EnergyHistory {
    pub samples: Vec<EnergySample>,
}

impl EnergyHistory {
    pub fn record(&mut self, t: f64, b: &SpectralField) {
        if let Some(last) = self.samples.last() {
            if t <= last.t {
                return;
            }
        }
        self.samples.push(EnergySample {
            t,
            l2_norm: l2_norm(b),
            mean: mean(b),
            div_residual: divergence_bloch(b).l2_norm(),
        });
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "t,l2norm,mean1_re,mean1_im,mean2_re,mean2_im,mean3_re,mean3_im,div_residual"
        )?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                s.t,
                s.l2_norm,
                s.mean[0].re,
                s.mean[0].im,
                s.mean[1].re,
                s.mean[1].im,
                s.mean[2].re,
                s.mean[2].im,
                s.div_residual
            )?;
        }
        Ok(())
    }
}

/// Advance `b_in` through the schedule up to `t_end`, switching velocity
/// samples at segment boundaries. Boundaries are hit exactly: the final step
/// into a boundary is shortened.
pub fn simulate(
    schedule: &Schedule,
    b_in: &SpectralField,
    config: &SolverConfig,
    t_end: f64,
) -> Result<(SpectralField, EnergyHistory)> {
    config.validate()?;
    if t_end > schedule.horizon() + 1e-9 {
        return Err(Error::OutOfSchedule {
            t: t_end,
            horizon: schedule.horizon(),
        });
    }
    let grid = b_in.grid;
    let limit = config.limit_for(grid);
    let mut b = b_in.clone();
    let mut history = EnergyHistory::default();
    history.record(0.0, &b);

    for seg in &schedule.segments {
        if seg.t0 >= t_end {
            break;
        }
        let seg_end = seg.t1.min(t_end);
        let len = seg_end - seg.t0;
        if len <= 0.0 {
            continue;
        }
        match seg.tag {
            VelocityTag::Zero => {
                // Exact semigroup; substeps only exist to populate the
                // history.
                let nsub = 64usize.min((len / 1e-3).ceil() as usize).max(1);
                let dt = len / nsub as f64;
                for i in 1..=nsub {
                    diffuse_exact(&mut b, config.eps, dt);
                    history.record(seg.t0 + i as f64 * dt, &b);
                }
            }
            tag => {
                let u = sample_velocity(tag, grid)?;
                let dt = config.dt_for(grid, tag);
                let nfull = (len / dt).floor() as usize;
                let rem = len - nfull as f64 * dt;
                let stepper = Stepper::new(grid, b.bloch_j, config.eps, dt, limit);
                for i in 1..=nfull {
                    b = stepper.step(&b, &u)?;
                    if i % config.leray_every == 0 {
                        b = leray_project(&b);
                    }
                    if i % config.sample_every == 0 {
                        history.record(seg.t0 + i as f64 * dt, &b);
                    }
                }
                if rem > 1e-12 * dt.max(1.0) {
                    let short = Stepper::new(grid, b.bloch_j, config.eps, rem, limit);
                    b = short.step(&b, &u)?;
                }
            }
        }
        history.record(seg_end, &b);
    }
    Ok((b, history))
}

/// Closed-form state after running the generation field for block size `n`
/// on the mean initial datum `(0,0,1)` for time `t`:
/// `(0,0,1) + φ(t)·w e^{inz}` with `φ(t) = (1 − e^{−εn²t})/(εn²)`.
pub fn analytic_generation_field(
    n: u32,
    eps: f64,
    t: f64,
    grid: Grid3,
    w: [Complex; 3],
) -> Result<SpectralField> {
    let phi = generation_amplitude(n, eps, t);
    let mut f = SpectralField::single_mode(
        grid,
        [0, 0, n as i64],
        [phi * w[0], phi * w[1], phi * w[2]],
    )?;
    *f.coeff_mut(2, 0) += Complex::ONE;
    Ok(f)
}

/// `φ(t) = (1 − e^{−εn²t})/(εn²)`, the Duhamel amplitude accumulated by the
/// generation forcing against the heat semigroup.
pub fn generation_amplitude(n: u32, eps: f64, t: f64) -> f64 {
    let a = eps * (n as f64).powi(2);
    (1.0 - (-a * t).exp()) / a
}

/// Least-squares slope of `log‖B‖` versus `t` over samples in
/// `[t_a, t_b]`. Needs at least 8 samples in the window.
pub fn fit_growth_rate(history: &EnergyHistory, window: [f64; 2]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = history
        .samples
        .iter()
        .filter(|s| window[0] <= s.t && s.t <= window[1] && s.l2_norm > 0.0)
        .map(|s| (s.t, s.l2_norm.ln()))
        .collect();
    if pts.len() < 8 {
        return Err(Error::TooFewSamples {
            found: pts.len(),
            need: 8,
        });
    }
    let n = pts.len() as f64;
    let (st, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (tm, ym) = (st / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |a, p| {
        (a.0 + (p.0 - tm) * (p.1 - ym), a.1 + (p.0 - tm).powi(2))
    });
    if den == 0.0 {
        return Err(Error::InvalidParameter(
            "growth window has zero time extent".into(),
        ));
    }
    Ok(num / den)
}

/// `max over checkpoints of (1/t)·log(‖B(t)‖/‖B(0)‖)` evaluated on recorded
/// samples; each checkpoint must match a sample time.
pub fn limsup_rate(history: &EnergyHistory, checkpoints: &[f64]) -> Result<f64> {
    if checkpoints.is_empty() {
        return Err(Error::TooFewSamples { found: 0, need: 1 });
    }
    let norm0 = history
        .samples
        .first()
        .ok_or(Error::TooFewSamples { found: 0, need: 1 })?
        .l2_norm;
    let mut best = f64::NEG_INFINITY;
    for &t in checkpoints {
        let sample = history
            .samples
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .ok_or(Error::MissingCheckpoint(t))?;
        if t <= 0.0 || (sample.t - t).abs() > 1e-6 * t.abs().max(1.0) {
            return Err(Error::MissingCheckpoint(t));
        }
        best = best.max((sample.l2_norm / norm0).ln() / t);
    }
    Ok(best)
}
