//! Property tests for the structural invariants: state validity, partial
//! trace, Schmidt reconstruction, filtering scale invariance, twirl
//! idempotence and serialization round-trips.

use proptest::prelude::*;

use qdistill::densmat::{
    hermitian_eig, partial_trace, schmidt, singlet_fraction, DensityMatrix, Side,
};
use qdistill::locc::{apply_filter_pair, twirl, FilterNorm, LocalFilter};
use qdistill::states::{random_density, random_pure};
use qdistill::Complex64;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=3, 2usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_states_are_valid((da, db) in dims(), rank in 1usize..=4, seed in 0u64..1000) {
        let rank = rank.min(da * db);
        let s = random_density(da, db, rank, seed).unwrap();
        prop_assert_eq!(s.rank(), rank);
        let sum: f64 = s.spectrum().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(s.spectrum().iter().all(|&x| x > -1e-9 && x < 1.0 + 1e-9));
    }

    #[test]
    fn partial_trace_is_a_state((da, db) in dims(), seed in 0u64..1000) {
        let s = random_density(da, db, da * db, seed).unwrap();
        for keep in [Side::A, Side::B] {
            let r = partial_trace(&s, keep);
            prop_assert!((r.trace().re - 1.0).abs() < 1e-10);
            let eig = hermitian_eig(&r);
            prop_assert!(eig.values.iter().all(|&x| x > -1e-10));
        }
    }

    #[test]
    fn schmidt_reconstructs((da, db) in dims(), seed in 0u64..1000) {
        let v = random_pure(da, db, seed);
        let d = schmidt(&v);
        // Nonincreasing coefficients squaring to 1.
        for w in d.coefficients.windows(2) {
            prop_assert!(w[0] >= w[1] - 1e-12);
        }
        let sq: f64 = d.coefficients.iter().map(|c| c * c).sum();
        prop_assert!((sq - 1.0).abs() < 1e-10);
        prop_assert!(d.rank() <= da.min(db));
        let rebuilt = d.reconstruct();
        for (r, a) in rebuilt.iter().zip(v.amplitudes()) {
            prop_assert!((r - a).norm() < 1e-10);
        }
    }

    #[test]
    fn filtering_fraction_is_scale_invariant(
        seed in 0u64..500,
        ca in -3.0f64..3.0,
        cb in -3.0f64..3.0,
        phase in 0.0f64..6.28,
    ) {
        prop_assume!(ca.abs() > 1e-3 && cb.abs() > 1e-3);
        let s = random_density(2, 2, 4, seed).unwrap();
        // Local 2x2 matrices from seeded pure-state amplitudes.
        let amps_a = random_pure(2, 2, seed + 1);
        let amps_b = random_pure(2, 2, seed + 2);
        let a = qdistill::ComplexMatrix::from_fn(2, 2, |i, j| amps_a.amplitudes()[2 * i + j]);
        let b = qdistill::ComplexMatrix::from_fn(2, 2, |i, j| amps_b.amplitudes()[2 * i + j]);
        let fa = LocalFilter::new(Side::A, a.clone(), FilterNorm::None).unwrap();
        let fb = LocalFilter::new(Side::B, b.clone(), FilterNorm::None).unwrap();
        let base = apply_filter_pair(&s, &fa, &fb).unwrap();

        let za = Complex64::new(ca * phase.cos(), ca * phase.sin());
        let fa2 = LocalFilter::new(Side::A, a.scale(za), FilterNorm::None).unwrap();
        let fb2 = LocalFilter::new(Side::B, b.scale(Complex64::new(cb, 0.0)), FilterNorm::None).unwrap();
        let scaled = apply_filter_pair(&s, &fa2, &fb2).unwrap();

        prop_assert!((base.achieved_f - scaled.achieved_f).abs() < 1e-12);
        prop_assert!((base.success_prob - scaled.success_prob).abs() < 1e-11);
    }

    #[test]
    fn twirl_preserves_fraction_and_is_idempotent(seed in 0u64..1000, d in 2usize..=3) {
        let s = random_density(d, d, d * d, seed).unwrap();
        let t = twirl(&s).unwrap();
        prop_assert!((singlet_fraction(&t, d) - singlet_fraction(&s, d)).abs() < 1e-12);
        let tt = twirl(&t).unwrap();
        prop_assert!(tt.mat().sub(t.mat()).max_abs() < 1e-12);
    }

    #[test]
    fn density_serde_roundtrip((da, db) in dims(), seed in 0u64..500) {
        let s = random_density(da, db, 2.min(da * db), seed).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: DensityMatrix = serde_json::from_str(&json).unwrap();
        prop_assert!(back.mat().sub(s.mat()).max_abs() < 1e-12);
        prop_assert_eq!(back.dim_a(), s.dim_a());
        prop_assert_eq!(back.dim_b(), s.dim_b());
    }

    #[test]
    fn singlet_fraction_linear_in_mixing(seed in 0u64..500, lambda in 0.0f64..1.0) {
        let s1 = random_density(3, 3, 4, seed).unwrap();
        let s2 = random_density(3, 3, 9, seed + 7).unwrap();
        let mix = DensityMatrix::new(
            s1.mat().scale_real(lambda).add(&s2.mat().scale_real(1.0 - lambda)),
            3,
            3,
        )
        .unwrap();
        for m in 1..=3usize {
            let lhs = singlet_fraction(&mix, m);
            let rhs = lambda * singlet_fraction(&s1, m) + (1.0 - lambda) * singlet_fraction(&s2, m);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
