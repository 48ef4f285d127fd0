//! Property-based invariants of the spectral calculus: Parseval, the
//! divergence-of-curl identity, projector idempotence, and the transform
//! round trip, on random fields and random Bloch offsets.

use dynamo_core::spectral::{
    backward_transform, curl_bloch, divergence_bloch, forward_transform, l2_norm, leray_project,
    Grid3, PhysicalField, SpectralField,
};
use dynamo_core::Complex;
use proptest::prelude::*;

fn arb_grid() -> impl Strategy<Value = Grid3> {
    (1usize..=3, 1usize..=3, 1usize..=3)
        .prop_map(|(a, b, c)| Grid3::new(2 * a + 2, 2 * b + 2, 2 * c + 2).unwrap())
}

fn arb_field(with_bloch: bool) -> impl Strategy<Value = SpectralField> {
    (arb_grid(), any::<u64>(), -0.5f64..0.5, -0.5f64..0.5, -0.5f64..0.5).prop_map(
        move |(grid, seed, j1, j2, j3)| {
            let j = if with_bloch { [j1, j2, j3] } else { [0.0; 3] };
            let mut f = SpectralField::zeros_bloch(grid, j);
            let mut state = seed | 1;
            let mut next = || {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            for c in f.coeffs.iter_mut() {
                *c = Complex::new(next(), next());
            }
            f
        },
    )
}

fn field_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_holds(f in arb_field(false)) {
        let phys = backward_transform(&f);
        let npts = f.grid.len() as f64;
        let mean_square: f64 = phys.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / npts;
        let spectral_square = l2_norm(&f).powi(2);
        prop_assert!((spectral_square - mean_square).abs() <= 1e-12 * spectral_square.max(1e-300));
    }

    #[test]
    fn divergence_of_curl_vanishes(f in arb_field(true)) {
        let c = curl_bloch(&f);
        let d = divergence_bloch(&c);
        let scale = l2_norm(&f).max(1e-300);
        prop_assert!(d.l2_norm() <= 1e-13 * scale * 64.0);
    }

    #[test]
    fn leray_is_idempotent_and_fixes_curls(f in arb_field(true)) {
        let p1 = leray_project(&f);
        let p2 = leray_project(&p1);
        prop_assert!(field_diff(&p1, &p2) <= 1e-12 * l2_norm(&f).max(1.0));

        let c = curl_bloch(&f);
        let pc = leray_project(&c);
        prop_assert!(field_diff(&c, &pc) <= 1e-12 * l2_norm(&c).max(1e-300) * 64.0);
    }

    #[test]
    fn transform_round_trip(f in arb_field(false)) {
        let phys = backward_transform(&f);
        let back = forward_transform(&phys);
        prop_assert!(field_diff(&f, &back) <= 1e-12 * l2_norm(&f).max(1e-300));
    }

    #[test]
    fn physical_round_trip(grid in arb_grid(), seed in any::<u64>()) {
        let mut state = seed | 1;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut f = PhysicalField::zeros(grid);
        for v in f.values.iter_mut() {
            *v = Complex::new(next(), next());
        }
        let spec = forward_transform(&f);
        let back = backward_transform(&spec);
        let err: f64 = f
            .values
            .iter()
            .zip(&back.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale: f64 = f.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-12 * scale.max(1e-300));
    }
}
