use muskat_bubble::geometry::{area, BubbleState, PhysicalParams};
use muskat_bubble::linear::{
    build_repaired_diagonalizer, diagonalization_residual, inverse_residual, semigroup_apply, BidiagonalSystem,
};
use muskat_bubble::quadrature::{
    i1_reduced, i2_reduced, nonlinear_term_bound_check, oracle_i1, oracle_i2, oracle_quadrature, ModelKernel,
    OracleIndex, OracleKernel,
};
use muskat_bubble::vorticity::{dense_solve_oracle, solve_vorticity, DEFAULT_TOL};
use muskat_bubble::{NormSpec, SpectralFunction};
use num_complex::Complex64;
use proptest::prelude::*;

fn modes(n: usize, max_amp: f64) -> impl Strategy<Value = SpectralFunction> {
    prop::collection::vec((-max_amp..max_amp, -max_amp..max_amp), n).prop_map(move |v| {
        let mut f = SpectralFunction::zeros(n);
        for (k, (re, im)) in v.into_iter().enumerate() {
            let decay = ((k + 1) * (k + 1)) as f64;
            f.set_coeff(k + 1, Complex64::new(re / decay, im / decay));
        }
        f
    })
}

fn nonzero(max: i64) -> impl Strategy<Value = i64> {
    (1..=max, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn diagonalizer_structure(n in 2usize..40, coupling in -5.0f64..5.0) {
        let sys = BidiagonalSystem::with_coupling(n, coupling).unwrap();
        let pair = build_repaired_diagonalizer(&sys);
        for i in 0..n {
            prop_assert_eq!(pair.s[(i, i)], Complex64::new(1.0, 0.0));
            prop_assert_eq!(pair.s_inv[(i, i)], Complex64::new(1.0, 0.0));
            for j in 0..i {
                prop_assert_eq!(pair.s[(i, j)], Complex64::new(0.0, 0.0));
                prop_assert_eq!(pair.s_inv[(i, j)], Complex64::new(0.0, 0.0));
            }
        }
        prop_assert!(inverse_residual(&pair) < 1e-12);
        prop_assert!(diagonalization_residual(&sys, &pair).full < 1e-9);
    }

    #[test]
    fn semigroup_never_amplifies(f in modes(24, 1.0), dt in 0.0f64..0.5) {
        let g = semigroup_apply(&f, dt);
        for k in 1..=24 {
            prop_assert!(g.coeff(k).norm() <= f.coeff(k).norm());
        }
    }

    #[test]
    fn oracle_bounds(k in -200i64..=200, a in -200i64..=200) {
        prop_assert!(i1_reduced(k, a).abs() <= 4.0 + 1e-12);
        prop_assert!(i2_reduced(k, a).abs() <= 10.0 / 3.0 + 1e-12);
    }

    #[test]
    fn oracle_closed_forms(k in -50i64..=50, ks in prop::collection::vec(nonzero(50), 1..=3)) {
        let idx = OracleIndex::new(k, ks).unwrap();
        prop_assert!((oracle_quadrature(&idx, OracleKernel::Sin).unwrap() - oracle_i1(&idx)).abs() < 1e-10);
        prop_assert!((oracle_quadrature(&idx, OracleKernel::Cot).unwrap() - oracle_i2(&idx)).abs() < 1e-10);
    }

    #[test]
    fn constraint_fixes_area(f in modes(32, 0.1)) {
        let s = BubbleState::from_projection(&f, [0.0; 2], 0.0).unwrap();
        prop_assert!((area(&s.f) - std::f64::consts::PI).abs() < 1e-14);
        prop_assert!(s.validate().is_ok());
    }

    #[test]
    fn model_integral_bound(f in modes(8, 0.5), g in modes(8, 0.5), l in 0usize..=2, nu in 0.0f64..0.2) {
        let spec = NormSpec::new(0.0, nu, 1.0).unwrap();
        for kernel in [ModelKernel::I, ModelKernel::J] {
            let (lhs, rhs) = nonlinear_term_bound_check(&[f.clone(), g.clone()], l, kernel, spec, 64).unwrap();
            prop_assert!(lhs <= kernel.constant() * rhs * (1.0 + 1e-10) + 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn neumann_matches_dense(f in modes(12, 1.0), size in 1e-4f64..0.05, a_mu in -1.0f64..=1.0, a_rs in -4.0f64..=4.0) {
        prop_assume!(f.norm_s(1.0) > 0.0);
        let f = BubbleState::from_projection(&f.scale(size / f.norm_s(1.0)), [0.0; 2], 0.0).unwrap().f;
        let p = PhysicalParams::new(a_mu, a_rs).unwrap();
        let s = solve_vorticity(&f, &p, DEFAULT_TOL).unwrap();
        let d = dense_solve_oracle(&f, &p).unwrap();
        prop_assert_eq!(s.omega.mean(), 0.0);
        prop_assert!(s.omega.sub(&d).wiener_norm(NormSpec::sobolev(0.0), false) < 1e-8);
        prop_assert!(s.residual < 1e-9);
    }
}
