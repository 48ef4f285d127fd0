//! Velocity fields of the construction and the piecewise-in-time schedule.
//!
//! Four velocities appear: the zero field, the two-mode ABC flow with
//! `a = 0`, `b = c = 1` at amplitude `δ`, its `n`-fold rescaling at amplitude
//! `δ/(N₀n)` and spatial frequency `N₀n`, and the generation field
//! `(e^{inz}/(in)) w` with a horizontal circular polarization `w`. A schedule
//! interval for block size `n` runs the pattern
//! zero / generator / rescaled-ABC so that the field first relaxes to its
//! mean, then acquires a horizontal seed from the mean through the generation
//! window of unit length, then amplifies that seed through the alpha effect
//! of the rescaled ABC flow.

use crate::error::{Error, Result};
use crate::spectral::{Grid3, PhysicalField};
use crate::Complex;
use serde::{Deserialize, Serialize};

/// Horizontal circular polarization used by the generation field and the
/// growth initial datum. `MinusI` is `(-i, 1, 0)`, `PlusI` is `(i, 1, 0)`.
/// Which of the two is amplified by the alpha effect depends on the sign
/// convention of the alpha matrix; callers should select it from the
/// numerically computed growing eigenvector rather than hard-code one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    MinusI,
    PlusI,
}

impl Polarization {
    pub fn vector(self) -> [Complex; 3] {
        let i = Complex::new(0.0, 1.0);
        match self {
            Polarization::MinusI => [-i, Complex::ONE, Complex::ZERO],
            Polarization::PlusI => [i, Complex::ONE, Complex::ZERO],
        }
    }
}

/// One of the four velocity fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum VelocityTag {
    Zero,
    Abc {
        delta: f64,
    },
    RescaledAbc {
        n: u32,
        n0: u32,
        delta: f64,
    },
    Generator {
        n: u32,
        polarization: Polarization,
    },
}

impl VelocityTag {
    /// Maximum spatial frequency per axis.
    pub fn max_frequency(&self) -> [i64; 3] {
        match *self {
            VelocityTag::Zero => [0, 0, 0],
            VelocityTag::Abc { .. } => [1, 1, 0],
            VelocityTag::RescaledAbc { n, n0, .. } => {
                let m = (n as i64) * (n0 as i64);
                [m, m, 0]
            }
            VelocityTag::Generator { n, .. } => [0, 0, n as i64],
        }
    }

    /// Pointwise supremum of `|u|`.
    pub fn sup_norm(&self) -> f64 {
        match *self {
            VelocityTag::Zero => 0.0,
            VelocityTag::Abc { delta } => 2.0 * delta,
            VelocityTag::RescaledAbc { n, n0, delta } => 2.0 * delta / (n as f64 * n0 as f64),
            VelocityTag::Generator { n, .. } => std::f64::consts::SQRT_2 / n as f64,
        }
    }

    /// Pointwise supremum of the Frobenius norm of `∇u`.
    pub fn gradient_sup(&self) -> f64 {
        match *self {
            VelocityTag::Zero => 0.0,
            VelocityTag::Abc { delta } | VelocityTag::RescaledAbc { delta, .. } => {
                std::f64::consts::SQRT_2 * delta
            }
            VelocityTag::Generator { .. } => std::f64::consts::SQRT_2,
        }
    }

    /// `W^{1,∞}` norm, the larger of `sup|u|` and `sup|∇u|`.
    pub fn w1_inf_norm(&self) -> f64 {
        self.sup_norm().max(self.gradient_sup())
    }
}

/// Exact pointwise samples of the tagged velocity. Errors unless every axis
/// resolves the field's maximum frequency with a factor-3 margin, the
/// headroom the 3/2 dealiasing rule needs.
pub fn sample_velocity(tag: VelocityTag, grid: Grid3) -> Result<PhysicalField> {
    let fmax = tag.max_frequency();
    let axes = [grid.nx(), grid.ny(), grid.nz()];
    for (f, n) in fmax.iter().zip(axes) {
        if 3 * f > n as i64 {
            return Err(Error::UnderResolved {
                nx: grid.nx(),
                ny: grid.ny(),
                nz: grid.nz(),
                freq: *f,
            });
        }
    }
    let field = match tag {
        VelocityTag::Zero => PhysicalField::zeros(grid),
        VelocityTag::Abc { delta } => sample_abc(grid, delta, 1),
        VelocityTag::RescaledAbc { n, n0, delta } => {
            let m = n * n0;
            sample_abc(grid, delta / m as f64, m)
        }
        VelocityTag::Generator { n, polarization } => {
            let w = polarization.vector();
            let inv_in = (Complex::new(0.0, n as f64)).inv();
            PhysicalField::sample(grid, |_, _, z| {
                let phase = inv_in * Complex::new(0.0, n as f64 * z).exp();
                [phase * w[0], phase * w[1], phase * w[2]]
            })
        }
    };
    Ok(field)
}

fn sample_abc(grid: Grid3, amplitude: f64, m: u32) -> PhysicalField {
    let m = m as f64;
    PhysicalField::sample(grid, |x, y, _| {
        let (sx, cx) = (m * x).sin_cos();
        let (sy, cy) = (m * y).sin_cos();
        [
            Complex::new(amplitude * cy, 0.0),
            Complex::new(amplitude * sx, 0.0),
            Complex::new(amplitude * (sy + cx), 0.0),
        ]
    })
}

/// `ε_n = 1/(N₀²n²)`, the diffusivity matched to block size `n`.
pub fn eps_n(n: u32, n0: u32) -> f64 {
    1.0 / ((n0 as f64 * n as f64).powi(2))
}

/// `a_k` from the diagonal enumeration 1; 1,2; 1,2,3; …, which visits every
/// positive integer infinitely often.
pub fn diagonal_index(k: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "diagonal index is defined for k >= 1".into(),
        ));
    }
    // Smallest m with m(m+1)/2 >= k locates the block; a_k is the offset
    // into it.
    let mut m = 1u64;
    while m * (m + 1) / 2 < k {
        m += 1;
    }
    Ok(k - m * (m - 1) / 2)
}

/// Constants defining the schedule. `lambda_hat` is the measured growth rate
/// of the alpha-driven Bloch mode; `eta` the closeness tolerance of the decay
/// phase; `c_prefactor` the prefactor estimate. `fixed_n` restricts every
/// interval to one block size instead of the diagonal sequence.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub n0: u32,
    pub delta: f64,
    pub lambda_hat: f64,
    pub eta: f64,
    pub c_prefactor: f64,
    pub fixed_n: Option<u32>,
    pub polarization: Polarization,
}

impl ScheduleParams {
    pub fn validate(&self) -> Result<()> {
        if self.n0 < 1 {
            return Err(Error::InvalidParameter("N0 must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0,1), got {}",
                self.delta
            )));
        }
        if self.lambda_hat <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda_hat must be positive, got {}",
                self.lambda_hat
            )));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eta must lie in (0,1), got {}",
                self.eta
            )));
        }
        if self.c_prefactor < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "prefactor must be >= 1, got {}",
                self.c_prefactor
            )));
        }
        Ok(())
    }

    /// Minimum growth-phase length `(4/λ̂)·log(10C/η)`, chosen so the growth
    /// phase always dominates the preceding decay in log-energy.
    pub fn growth_min(&self) -> f64 {
        4.0 / self.lambda_hat * (10.0 * self.c_prefactor / self.eta).ln()
    }
}

/// Decay-plus-generation budget for interval `k`:
/// `Δt = 4n²N₀²·t_{k−1} + 4n²N₀²·log(10/η) + (4/λ̂)·log C`.
pub fn delta_t(n: u32, params: &ScheduleParams, t_prev: f64) -> Result<f64> {
    if params.lambda_hat <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda_hat must be positive, got {}",
            params.lambda_hat
        )));
    }
    if t_prev < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "t_prev must be nonnegative, got {t_prev}"
        )));
    }
    let nn0 = 4.0 * (n as f64).powi(2) * (params.n0 as f64).powi(2);
    Ok(nn0 * t_prev + nn0 * (10.0 / params.eta).ln()
        + 4.0 / params.lambda_hat * params.c_prefactor.ln())
}

/// One schedule segment: velocity `tag` on `[t0, t1)` (left-closed).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub tag: VelocityTag,
}

/// Piecewise-constant-in-time velocity schedule over `[0, t_K)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Schedule {
    pub params: ScheduleParams,
    pub segments: Vec<Segment>,
    /// Interval endpoints `t_1 < … < t_K` (the checkpoint times).
    pub times: Vec<f64>,
    /// Per-interval `Δt_k`.
    pub delta_ts: Vec<f64>,
}

impl Schedule {
    /// A single-segment schedule holding `tag` on `[0, horizon)`.
    pub fn constant(tag: VelocityTag, horizon: f64) -> Self {
        Self {
            params: ScheduleParams {
                n0: 1,
                delta: 0.5,
                lambda_hat: 1.0,
                eta: 0.1,
                c_prefactor: 1.0,
                fixed_n: None,
                polarization: Polarization::MinusI,
            },
            segments: vec![Segment {
                t0: 0.0,
                t1: horizon,
                tag,
            }],
            times: vec![horizon],
            delta_ts: vec![],
        }
    }

    pub fn horizon(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t1)
    }

    /// Tag of the unique segment containing `t` (segments are left-closed).
    pub fn velocity_at(&self, t: f64) -> Result<VelocityTag> {
        self.segments
            .iter()
            .find(|s| s.t0 <= t && t < s.t1)
            .map(|s| s.tag)
            .ok_or(Error::OutOfSchedule {
                t,
                horizon: self.horizon(),
            })
    }
}

/// Build the `K`-interval schedule: `t_0 = 0` and for each interval
/// `t_k = t_{k−1} + Δt + max(Δt, T_growth)` with block size `n = a_k` (or the
/// configured fixed `n`), split into the zero / generator / rescaled-ABC
/// pattern with a unit-length generation window.
pub fn build_schedule(params: &ScheduleParams, k_intervals: usize) -> Result<Schedule> {
    params.validate()?;
    if k_intervals == 0 {
        return Err(Error::InvalidParameter(
            "schedule needs at least one interval".into(),
        ));
    }
    let growth_min = params.growth_min();
    let mut segments = Vec::with_capacity(3 * k_intervals);
    let mut times = Vec::with_capacity(k_intervals);
    let mut delta_ts = Vec::with_capacity(k_intervals);
    let mut t_prev = 0.0;
    for k in 1..=k_intervals {
        let n = match params.fixed_n {
            Some(n) => n,
            None => diagonal_index(k as u64)? as u32,
        };
        let dt = delta_t(n, params, t_prev)?;
        let t_k = t_prev + dt + dt.max(growth_min);
        let gen_start = t_prev + dt / 2.0;
        segments.push(Segment {
            t0: t_prev,
            t1: gen_start,
            tag: VelocityTag::Zero,
        });
        segments.push(Segment {
            t0: gen_start,
            t1: gen_start + 1.0,
            tag: VelocityTag::Generator {
                n,
                polarization: params.polarization,
            },
        });
        segments.push(Segment {
            t0: gen_start + 1.0,
            t1: t_k,
            tag: VelocityTag::RescaledAbc {
                n,
                n0: params.n0,
                delta: params.delta,
            },
        });
        times.push(t_k);
        delta_ts.push(dt);
        t_prev = t_k;
    }
    Ok(Schedule {
        params: *params,
        segments,
        times,
        delta_ts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(n0: u32, eta: f64, c: f64, lambda: f64) -> ScheduleParams {
        ScheduleParams {
            n0,
            delta: 0.2,
            lambda_hat: lambda,
            eta,
            c_prefactor: c,
            fixed_n: None,
            polarization: Polarization::MinusI,
        }
    }

    #[test]
    fn abc_samples_match_closed_form_at_origin_line() {
        let grid = Grid3::cubic(8).unwrap();
        let u = sample_velocity(VelocityTag::Abc { delta: 0.1 }, grid).unwrap();
        // x = y = 0: cos 0 = 1, sin 0 = 0 so u = 0.1·(1, 0, 1) at any z.
        for iz in 0..8 {
            let idx = grid.index(0, 0, iz);
            assert_abs_diff_eq!(u.value(0, idx).re, 0.1, epsilon = 1e-15);
            assert_abs_diff_eq!(u.value(1, idx).re, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(u.value(2, idx).re, 0.1, epsilon = 1e-15);
        }
    }

    #[test]
    fn rescaled_abc_amplitude_and_frequency() {
        let grid = Grid3::new(36, 36, 4).unwrap();
        let tag = VelocityTag::RescaledAbc {
            n: 2,
            n0: 3,
            delta: 0.1,
        };
        let u = sample_velocity(tag, grid).unwrap();
        // Amplitude 0.1/6 at the origin line, component pattern (1, 0, 1).
        let idx = grid.index(0, 0, 0);
        assert_abs_diff_eq!(u.value(0, idx).re, 0.1 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u.value(2, idx).re, 0.1 / 6.0, epsilon = 1e-15);
        // Spatial frequency 6: half a period after 3 of the 36 grid points,
        // so cos(6x) flips sign at ix = 3.
        let idx3 = grid.index(3, 0, 0);
        assert_abs_diff_eq!(u.value(1, idx3).re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u.value(2, idx3).re, -0.1 / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn generator_at_z_zero() {
        let grid = Grid3::cubic(8).unwrap();
        let tag = VelocityTag::Generator {
            n: 1,
            polarization: Polarization::MinusI,
        };
        let u = sample_velocity(tag, grid).unwrap();
        // (1/i)·(−i, 1, 0) = (−1, −i, 0).
        let idx = grid.index(3, 5, 0);
        assert_abs_diff_eq!(u.value(0, idx).re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u.value(0, idx).im, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u.value(1, idx).re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u.value(1, idx).im, -1.0, epsilon = 1e-15);
        assert_eq!(u.value(2, idx), Complex::ZERO);
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let grid = Grid3::cubic(8).unwrap();
        let tag = VelocityTag::RescaledAbc {
            n: 2,
            n0: 3,
            delta: 0.1,
        };
        assert!(matches!(
            sample_velocity(tag, grid),
            Err(Error::UnderResolved { freq: 6, .. })
        ));
    }

    #[test]
    fn diagonal_sequence_prefix() {
        let got: Vec<u64> = (1..=7).map(|k| diagonal_index(k).unwrap()).collect();
        assert_eq!(got, vec![1, 1, 2, 1, 2, 3, 1]);
        assert_eq!(diagonal_index(10).unwrap(), 4);
        assert!(diagonal_index(0).is_err());
    }

    #[test]
    fn diagonal_sequence_visits_small_n_repeatedly() {
        for n in 1..=5 {
            let hits = (1..=28)
                .filter(|&k| diagonal_index(k).unwrap() == n)
                .count();
            assert!(hits >= 3, "n={n} appears only {hits} times");
        }
    }

    #[test]
    fn delta_t_formula_arithmetic() {
        // n=1, N0=1, eta=10/e so log(10/eta)=1, C=1, t_prev=0.
        let p = params(1, 10.0 / std::f64::consts::E, 1.0, 0.3);
        assert_abs_diff_eq!(delta_t(1, &p, 0.0).unwrap(), 4.0, epsilon = 1e-12);
        // C=1 contributes nothing regardless of lambda_hat.
        let p2 = params(1, 10.0 / std::f64::consts::E, 1.0, 7.0);
        assert_abs_diff_eq!(delta_t(1, &p2, 0.0).unwrap(), 4.0, epsilon = 1e-12);
        // n=2, N0=2, t_prev=1, eta=0.1.
        let p3 = params(2, 0.1, 1.0, 0.3);
        assert_abs_diff_eq!(
            delta_t(2, &p3, 1.0).unwrap(),
            64.0 + 64.0 * 100.0f64.ln(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn schedule_partitions_and_satisfies_the_growth_inequality() {
        let p = params(2, 0.1, 1.0, 0.05);
        let schedule = build_schedule(&p, 4).unwrap();
        assert_eq!(schedule.segments.len(), 12);
        assert_eq!(schedule.segments[0].t0, 0.0);
        for w in schedule.segments.windows(2) {
            assert_eq!(w[0].t1, w[1].t0);
            assert!(w[0].t1 > w[0].t0);
        }
        // t_k >= t_{k-1} + 2n²t_{k-1} + 2n²log(10/eta) with C=1.
        let mut t_prev = 0.0;
        for (k, &t_k) in schedule.times.iter().enumerate() {
            let n = diagonal_index(k as u64 + 1).unwrap() as f64;
            assert!(t_k >= t_prev + 2.0 * n * n * t_prev + 2.0 * n * n * (10.0 / p.eta).ln());
            t_prev = t_k;
        }
    }

    #[test]
    fn single_interval_pattern() {
        let p = ScheduleParams {
            fixed_n: Some(1),
            ..params(2, 0.1, 1.0, 0.05)
        };
        let schedule = build_schedule(&p, 1).unwrap();
        let dt = schedule.delta_ts[0];
        let expected_t1 = dt + dt.max(p.growth_min());
        assert_abs_diff_eq!(schedule.times[0], expected_t1, epsilon = 1e-9);
        assert_eq!(schedule.velocity_at(0.0).unwrap(), VelocityTag::Zero);
        // Left-closed convention: the generator starts exactly at dt/2.
        assert!(matches!(
            schedule.velocity_at(dt / 2.0).unwrap(),
            VelocityTag::Generator { n: 1, .. }
        ));
        assert!(matches!(
            schedule.velocity_at(dt / 2.0 + 1.0).unwrap(),
            VelocityTag::RescaledAbc { n: 1, n0: 2, .. }
        ));
        assert!(schedule.velocity_at(schedule.horizon()).is_err());
    }

    #[test]
    fn schedule_w1_inf_budget() {
        let p = params(2, 0.1, 1.0, 0.05);
        let schedule = build_schedule(&p, 6).unwrap();
        for seg in &schedule.segments {
            assert!(seg.tag.w1_inf_norm() <= 2.0);
        }
    }

    #[test]
    fn eps_n_values() {
        assert_abs_diff_eq!(eps_n(3, 4), 1.0 / 144.0, epsilon = 1e-16);
        assert_abs_diff_eq!(eps_n(1, 5), 1.0 / 25.0, epsilon = 1e-16);
        for n in 2..6 {
            assert!(eps_n(n, 4) < eps_n(n - 1, 4));
        }
    }
}
