//! The `verify` job: every module's invariant suite on seeded random data,
//! plus the control experiment (no generation window, no growth) and a
//! mutation smoke test showing the identity checks have teeth. One printed
//! line per check; the process exits nonzero if any fails.

use crate::commands::{write_json, NamedCheck, RunSummary};
use crate::config::RunConfig;
use anyhow::Result;
use dynamo_core::matrix::{
    contour_projector, gelfand_check, growth_dichotomy_check, monodromy_matrix,
    perturbation_slopes, CheckReport, ContourSpec, SquareMatrix,
};
use dynamo_core::solver::{fit_growth_rate, simulate, SolverConfig};
use dynamo_core::spectral::{
    backward_transform, curl_bloch, divergence_bloch, forward_transform, l2_norm, leray_project,
    read_checkpoint, write_checkpoint, Grid3, SpectralField,
};
use dynamo_core::velocity::{
    build_schedule, Polarization, Schedule, ScheduleParams, Segment, VelocityTag,
};
use dynamo_core::{Complex, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(rng: &mut ChaCha8Rng, grid: Grid3, bloch: bool) -> SpectralField {
    let j = if bloch {
        [
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
        ]
    } else {
        [0.0; 3]
    };
    let mut f = SpectralField::zeros_bloch(grid, j);
    for c in f.coeffs.iter_mut() {
        *c = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    f
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            *m.at_mut(i, j) = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    m
}

/// Upper-triangular matrix with well-separated real diagonal entries, so the
/// spectrum is known by construction.
fn random_triangular(rng: &mut ChaCha8Rng, n: usize) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        *m.at_mut(i, i) = Complex::new(-(i as f64) - rng.gen_range(0.0..0.3), 0.0);
        for j in (i + 1)..n {
            *m.at_mut(i, j) = Complex::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        }
    }
    m
}

fn matrix_deviation(a: &SquareMatrix, b: &SquareMatrix) -> f64 {
    a.sub(b).frobenius_norm()
}

fn spectral_checks(rng: &mut ChaCha8Rng, checks: &mut Vec<NamedCheck>) {
    let grid = Grid3::new(8, 6, 4).expect("static grid");
    let mut parseval: f64 = 0.0;
    let mut div_curl: f64 = 0.0;
    let mut leray: f64 = 0.0;
    let mut round_trip: f64 = 0.0;
    for _ in 0..8 {
        let f = random_field(rng, grid, true);
        let scale = l2_norm(&f).max(1e-300);

        let f0 = SpectralField {
            bloch_j: [0.0; 3],
            ..f.clone()
        };
        let phys = backward_transform(&f0);
        let mean_sq =
            phys.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / grid.len() as f64;
        parseval = parseval.max((l2_norm(&f0).powi(2) - mean_sq).abs() / scale.powi(2));

        let back = forward_transform(&phys);
        round_trip = round_trip.max(
            f0.coeffs
                .iter()
                .zip(&back.coeffs)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / scale,
        );

        let c = curl_bloch(&f);
        div_curl = div_curl.max(divergence_bloch(&c).l2_norm() / scale);

        let p1 = leray_project(&f);
        let p2 = leray_project(&p1);
        leray = leray.max(
            p1.coeffs
                .iter()
                .zip(&p2.coeffs)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / scale,
        );
    }
    checks.push(NamedCheck::new(
        "spectral/parseval",
        CheckReport::new(0.0, parseval, 1e-12),
    ));
    checks.push(NamedCheck::new(
        "spectral/divergence-of-curl",
        CheckReport::new(0.0, div_curl, 1e-11),
    ));
    checks.push(NamedCheck::new(
        "spectral/leray-idempotent",
        CheckReport::new(0.0, leray, 1e-12),
    ));
    checks.push(NamedCheck::new(
        "spectral/round-trip",
        CheckReport::new(0.0, round_trip, 1e-12),
    ));

    // Mutation smoke test: a sign flip in one curl component must light up
    // the divergence identity by a wide margin.
    let f = random_field(rng, grid, false);
    let mut corrupted = curl_bloch(&f);
    let n = grid.len();
    for v in corrupted.coeffs[..n].iter_mut() {
        *v = -*v;
    }
    let residual = divergence_bloch(&corrupted).l2_norm() / l2_norm(&f).max(1e-300);
    checks.push(NamedCheck::new(
        "spectral/mutation-detected",
        CheckReport {
            expected: 1.0,
            measured: residual,
            tolerance: 0.0,
            pass: residual > 1e-3,
        },
    ));
}

fn checkpoint_checks(rng: &mut ChaCha8Rng, dir: &std::path::Path, checks: &mut Vec<NamedCheck>) -> Result<()> {
    let grid = Grid3::new(8, 6, 4).expect("static grid");
    let f = random_field(rng, grid, true);
    let path = dir.join("verify_state.kde1");
    write_checkpoint(&path, &f)?;
    let g = read_checkpoint(&path)?;
    let exact = f.grid == g.grid && f.bloch_j == g.bloch_j && f.coeffs == g.coeffs;
    checks.push(NamedCheck::new(
        "checkpoint/round-trip",
        CheckReport {
            expected: 0.0,
            measured: if exact { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass: exact,
        },
    ));

    let mut bytes = std::fs::read(&path)?;
    bytes[0] ^= 0xff;
    std::fs::write(&path, &bytes)?;
    let rejected = matches!(read_checkpoint(&path), Err(Error::BadCheckpoint(_)));
    checks.push(NamedCheck::new(
        "checkpoint/bad-magic-rejected",
        CheckReport {
            expected: 0.0,
            measured: if rejected { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass: rejected,
        },
    ));
    Ok(())
}

fn projector_checks(rng: &mut ChaCha8Rng, checks: &mut Vec<NamedCheck>) -> Result<()> {
    let a = random_triangular(rng, 6);
    // Circle around the two rightmost eigenvalues (diagonal entries near 0
    // and -1); the rest sit at -2 and beyond. The non-normal test matrix
    // inflates the resolvent, so use a denser quadrature than the default.
    let spec = ContourSpec {
        points: 128,
        ..ContourSpec::new(Complex::new(-0.65, 0.0), 1.1)
    };
    let p = contour_projector(&a, &spec)?;
    checks.push(NamedCheck::new(
        "projector/idempotent",
        CheckReport::new(0.0, matrix_deviation(&p.matmul(&p), &p), 1e-9),
    ));
    checks.push(NamedCheck::new(
        "projector/commutes",
        CheckReport::new(0.0, matrix_deviation(&p.matmul(&a), &a.matmul(&p)), 1e-9),
    ));
    let trace = p.trace();
    checks.push(NamedCheck::new(
        "projector/trace-integer",
        CheckReport::new(2.0, trace.re, 1e-8),
    ));

    // Doubling the quadrature order must improve the projector by at least
    // two orders of magnitude (down to the accuracy floor).
    let reference = contour_projector(
        &a,
        &ContourSpec {
            points: 256,
            ..spec
        },
    )?;
    let coarse = contour_projector(&a, &ContourSpec { points: 16, ..spec })?;
    let fine = contour_projector(&a, &ContourSpec { points: 32, ..spec })?;
    let e16 = matrix_deviation(&coarse, &reference);
    let e32 = matrix_deviation(&fine, &reference);
    let converged = e32 <= e16 / 100.0 || e32 <= 1e-12;
    checks.push(NamedCheck::new(
        "projector/quadrature-convergence",
        CheckReport {
            expected: e16 / 100.0,
            measured: e32,
            tolerance: 0.0,
            pass: converged,
        },
    ));
    Ok(())
}

fn matrix_checks(rng: &mut ChaCha8Rng, checks: &mut Vec<NamedCheck>) -> Result<()> {
    let a = random_triangular(rng, 5);
    let x: Vec<Complex> = (0..5)
        .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let dichotomy = growth_dichotomy_check(&a, &x, 40.0)?;
    checks.push(NamedCheck::new("matrix/growth-dichotomy", dichotomy));

    let t0 = SquareMatrix::zeros(3);
    let t1 = SquareMatrix::from_fn(3, |i, j| {
        if i == j {
            Complex::new(1.0 + i as f64, 0.0)
        } else {
            Complex::ZERO
        }
    });
    let slopes = perturbation_slopes(&t0, &t1, Complex::ZERO, &[0.01])?;
    checks.push(NamedCheck::new(
        "matrix/perturbation-slopes",
        CheckReport {
            expected: 0.0,
            measured: if slopes.pass { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass: slopes.pass,
        },
    ));

    // Zero-velocity monodromy: spectral rate and fitted rate both vanish.
    let grid = Grid3::cubic(4).expect("static grid");
    let schedule = Schedule::constant(VelocityTag::Zero, 1.0);
    let config = SolverConfig::new(0.3);
    let phi = monodromy_matrix(&schedule, &config, grid, None)?;
    checks.push(NamedCheck::new(
        "matrix/gelfand-zero-velocity",
        gelfand_check(&phi, 1.0, 0.0)?,
    ));
    Ok(())
}

fn determinism_check(dir: &std::path::Path, checks: &mut Vec<NamedCheck>) -> Result<()> {
    let grid = Grid3::new(12, 12, 4).expect("static grid");
    let tag = VelocityTag::Abc { delta: 0.2 };
    let schedule = Schedule::constant(tag, 1.0);
    let config = SolverConfig {
        dt: Some(0.05),
        eps: 0.3,
        dealias_limit: Some(4),
        sample_every: 2,
        leray_every: 100,
    };
    let b = SpectralField::constant(grid, [Complex::ONE, Complex::ZERO, Complex::ONE]);
    let mut outputs = Vec::new();
    for run in 0..2 {
        let (_, hist) = simulate(&schedule, &b, &config, 1.0)?;
        let path = dir.join(format!("verify_energy_{run}.csv"));
        hist.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
        outputs.push(std::fs::read(&path)?);
    }
    let identical = outputs[0] == outputs[1];
    checks.push(NamedCheck::new(
        "solver/deterministic-outputs",
        CheckReport {
            expected: 0.0,
            measured: if identical { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass: identical,
        },
    ));
    Ok(())
}

/// Control experiment: the schedule with its generation window replaced by
/// zero velocity. The mean `(0,0,1)` alone is stationary, so the growth
/// phase must show no growth at all.
pub fn control_growth_rate() -> Result<f64> {
    let params = ScheduleParams {
        n0: 2,
        delta: 0.2,
        lambda_hat: 0.5,
        eta: 0.1,
        c_prefactor: 1.0,
        fixed_n: Some(1),
        polarization: Polarization::MinusI,
    };
    let mut schedule = build_schedule(&params, 1)?;
    schedule.segments = schedule
        .segments
        .iter()
        .map(|s| Segment {
            tag: match s.tag {
                VelocityTag::Generator { .. } => VelocityTag::Zero,
                tag => tag,
            },
            ..*s
        })
        .collect();
    let grid = Grid3::new(12, 12, 4)?;
    let b = SpectralField::constant(grid, [Complex::ZERO, Complex::ZERO, Complex::ONE]);
    let config = SolverConfig {
        dt: None,
        eps: 0.25,
        dealias_limit: Some(4),
        sample_every: 8,
        leray_every: 100,
    };
    let growth_start = schedule.segments[2].t0;
    let horizon = (growth_start + 20.0).min(schedule.horizon());
    let (_, hist) = simulate(&schedule, &b, &config, horizon)?;
    fit_growth_rate(&hist, [growth_start, horizon])
        .map_err(anyhow::Error::from)
}

pub fn cmd_verify(config: RunConfig, seed_override: Option<u64>) -> Result<RunSummary> {
    let scratch = tempfile::tempdir()?;
    let out_dir = config.out_dir.clone();
    std::fs::create_dir_all(&out_dir)?;
    let seed = seed_override.unwrap_or(config.seed);
    let mut summary = RunSummary::new("verify", config);
    summary.seed = seed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    spectral_checks(&mut rng, &mut checks);
    checkpoint_checks(&mut rng, scratch.path(), &mut checks)?;
    projector_checks(&mut rng, &mut checks)?;
    matrix_checks(&mut rng, &mut checks)?;
    determinism_check(scratch.path(), &mut checks)?;

    let control_rate = control_growth_rate()?;
    checks.push(NamedCheck::new(
        "solver/control-run-no-growth",
        CheckReport {
            expected: 0.0,
            measured: control_rate,
            tolerance: 1e-10,
            pass: control_rate <= 1e-10,
        },
    ));

    // Smoke test the random-matrix utility so a broken generator cannot make
    // the suites vacuous.
    let m = random_matrix(&mut rng, 4);
    checks.push(NamedCheck::new(
        "verify/random-matrix-nontrivial",
        CheckReport {
            expected: 1.0,
            measured: m.frobenius_norm(),
            tolerance: 0.0,
            pass: m.frobenius_norm() > 0.1,
        },
    ));

    for check in checks {
        println!(
            "{} - {} (expected {:.6e}, measured {:.6e}, tolerance {:.1e})",
            if check.report.pass { "ok  " } else { "FAIL" },
            check.name,
            check.report.expected,
            check.report.measured,
            check.report.tolerance,
        );
        summary.push_check(check);
    }
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}
