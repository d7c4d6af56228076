use proptest::prelude::*;
use woven_core::certificates::remark_mu_bound;
use woven_core::duality::{canonical_dual, excess_and_kernel, is_dual};
use woven_core::generators::{gaussian_matrix, harmonic_frame, parsevalize, random_unitary, rng_from_seed};
use woven_core::io::{frame_to_string, parse_frame};
use woven_core::linalg::{self, c, CMatrix, Complex64};
use woven_core::weaving::{weakly_woven, woven_oracle, DEFAULT_ENUMERATION_CAP};
use woven_core::{Frame, DEFAULT_TOL};

fn complex_entry() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| c(re, im))
}

prop_compose! {
    fn family(max_dim: usize, max_len: usize)(dim in 1..=max_dim, extra in 0..=max_len)
        (entries in prop::collection::vec(complex_entry(), dim * (dim + extra)), dim in Just(dim), len in Just(dim + extra))
        -> Frame {
        Frame::from_synthesis(CMatrix::from_vec(dim, len, entries), DEFAULT_TOL).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounds_are_unitarily_invariant(phi in family(4, 4), seed in any::<u64>()) {
        let u = random_unitary(phi.dim(), &mut rng_from_seed(seed));
        let b = phi.optimal_bounds();
        let r = phi.apply_operator(&u).unwrap().optimal_bounds();
        let scale = b.upper.max(1.0);
        prop_assert!((b.lower - r.lower).abs() <= 1e-10 * scale);
        prop_assert!((b.upper - r.upper).abs() <= 1e-10 * scale);
    }

    #[test]
    fn rayleigh_quotients_lie_between_bounds(phi in family(4, 5), seed in any::<u64>()) {
        let b = phi.optimal_bounds();
        let f = gaussian_matrix(phi.dim(), 1, &mut rng_from_seed(seed)).column(0).into_owned();
        let q = phi.analyze(&f).norm_squared() / f.norm_squared();
        let slack = 1e-10 * b.upper.max(1.0);
        prop_assert!(b.lower - slack <= q && q <= b.upper + slack);
    }

    #[test]
    fn analysis_is_adjoint_of_synthesis(phi in family(4, 5), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let x = gaussian_matrix(phi.len(), 1, &mut rng).column(0).into_owned();
        let f = gaussian_matrix(phi.dim(), 1, &mut rng).column(0).into_owned();
        let lhs = f.dotc(&phi.synthesize(&x));
        let rhs = phi.analyze(&f).dotc(&x);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn frame_operator_is_positive(phi in family(4, 5)) {
        let s = phi.frame_operator();
        prop_assert!((&s - s.adjoint()).norm() <= 1e-12 * (1.0 + s.norm()));
        let ev = linalg::hermitian_eigenvalues(&s);
        prop_assert!(ev[0] >= -1e-10 * (1.0 + ev[ev.len() - 1]));
    }

    #[test]
    fn excess_plus_rank_is_length(phi in family(4, 5)) {
        let ex = excess_and_kernel(&phi);
        prop_assert_eq!(ex.excess + linalg::rank(phi.synthesis(), phi.tol()), phi.len());
        let residual = phi.synthesis() * &ex.kernel_basis;
        prop_assert!(residual.norm() <= 1e-9 * (1.0 + phi.synthesis().norm()));
    }

    #[test]
    fn frame_files_round_trip(phi in family(4, 4), tol in 0.0f64..1e-3) {
        let phi = phi.with_tol(tol);
        let back = parse_frame(&frame_to_string(&phi)).unwrap();
        prop_assert_eq!(back.synthesis(), phi.synthesis());
        prop_assert_eq!(back.tol().to_bits(), phi.tol().to_bits());
    }

    #[test]
    fn canonical_dual_is_dual(phi in family(3, 4)) {
        prop_assume!(phi.is_frame());
        let b = phi.optimal_bounds();
        prop_assume!(b.lower / b.upper > 1e-4);
        prop_assert!(is_dual(&phi, &canonical_dual(&phi).unwrap(), 1e-8).unwrap());
    }

    #[test]
    fn parsevalize_is_idempotent(phi in family(3, 4)) {
        prop_assume!(phi.is_frame());
        let b = phi.optimal_bounds();
        prop_assume!(b.lower / b.upper > 1e-4);
        let p = parsevalize(&phi).unwrap();
        let pp = parsevalize(&p).unwrap();
        prop_assert!((p.synthesis() - pp.synthesis()).norm() <= 1e-9);
        prop_assert!(p.classify().nearly_parseval_eps <= 1e-9);
    }

    #[test]
    fn single_frame_oracle_is_its_bounds(phi in family(3, 3)) {
        let r = woven_oracle(std::slice::from_ref(&phi), DEFAULT_TOL).unwrap();
        let b = phi.optimal_bounds();
        prop_assert!((r.universal_lower - b.lower).abs() <= 1e-9 * b.upper.max(1.0));
        prop_assert!((r.universal_upper - b.upper).abs() <= 1e-9 * b.upper.max(1.0));
    }

    #[test]
    fn weaving_upper_bound_at_most_sum(a in family(3, 3), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let b = Frame::from_synthesis(gaussian_matrix(a.dim(), a.len(), &mut rng), DEFAULT_TOL).unwrap();
        let r = woven_oracle(&[a.clone(), b.clone()], DEFAULT_TOL).unwrap();
        prop_assert!(r.universal_upper <= a.optimal_bounds().upper + b.optimal_bounds().upper + 1e-9);
        let spanning = weakly_woven(&[a, b], DEFAULT_TOL, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert_eq!(spanning.all_span, r.is_woven);
    }

    #[test]
    fn older_perturbation_bound_is_stricter(a in 0.01f64..5.0, extra in 0.0f64..5.0, b_psi in 0.01f64..10.0) {
        let mu = remark_mu_bound(a, a + extra, b_psi);
        prop_assert!(mu < a.sqrt());
    }

    #[test]
    fn harmonic_frames_are_equal_norm_parseval(dim in 1usize..5, extra in 0usize..5) {
        let h = harmonic_frame(dim, dim + extra).unwrap();
        let class = h.classify();
        prop_assert!(class.nearly_equal_norm_eps <= 1e-12);
        prop_assert!(class.is_parseval);
    }
}
