//! Randomized invariants over the public API: estimator bookkeeping,
//! group algebra, window calculus, special-function identities.

use proptest::prelude::*;

use paircorr_core::bessel::bessel_j;
use paircorr_core::spectrum::SpectrumSlice;
use paircorr_core::theta::reduce_to_fundamental;
use paircorr_core::{
    estimate_type, r2_windowed, theta::GroupPoint, unit_ball_volume, TestPsi, TorusSpec, WeightH,
    Window,
};

fn synthetic_slice(values: &[f64]) -> SpectrumSlice {
    let spec = TorusSpec::new(2, vec![0.3, 0.4]).unwrap();
    SpectrumSlice::from_rescaled(spec, values.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn window_counts_are_additive(
        values in proptest::collection::vec(0.01f64..40.0, 40..160),
        a in -3.0f64..0.0,
        b in 0.0f64..1.5,
        c in 1.5f64..4.0,
    ) {
        let slice = synthetic_slice(&values);
        let x = 10.0;
        // open split point: closed windows would double-count ties at b
        let left = r2_windowed(&slice, x, Window::new(a, b).unwrap()).unwrap();
        let right = r2_windowed(&slice, x, Window::new(b, c).unwrap()).unwrap();
        let whole = r2_windowed(&slice, x, Window::new(a, c).unwrap()).unwrap();
        let boundary = r2_windowed(&slice, x, Window::new(b, b).unwrap()).unwrap();
        let sum = left.pair_count.unwrap() + right.pair_count.unwrap()
            - boundary.pair_count.unwrap();
        prop_assert_eq!(whole.pair_count.unwrap(), sum);
    }

    #[test]
    fn window_reflection_symmetry(
        values in proptest::collection::vec(0.01f64..40.0, 40..160),
        a in -2.0f64..2.0,
        len in 0.0f64..2.0,
    ) {
        let slice = synthetic_slice(&values);
        let x = 10.0;
        let fwd = r2_windowed(&slice, x, Window::new(a, a + len).unwrap()).unwrap();
        let rev = r2_windowed(&slice, x, Window::new(-a - len, -a).unwrap()).unwrap();
        prop_assert_eq!(fwd.pair_count, rev.pair_count);
        prop_assert_eq!(fwd.value, rev.value);
    }

    #[test]
    fn window_counts_monotone_in_inclusion(
        values in proptest::collection::vec(0.01f64..40.0, 40..160),
        a in -2.0f64..0.0,
        b in 0.0f64..2.0,
        pad in 0.0f64..1.0,
    ) {
        let slice = synthetic_slice(&values);
        let inner = r2_windowed(&slice, 10.0, Window::new(a, b).unwrap()).unwrap();
        let outer = r2_windowed(&slice, 10.0, Window::new(a - pad, b + pad).unwrap()).unwrap();
        prop_assert!(outer.pair_count.unwrap() >= inner.pair_count.unwrap());
    }

    #[test]
    fn group_law_associative_with_identity(
        u1 in -3.0f64..3.0, v1 in 0.2f64..4.0, p1 in 0.0f64..6.28,
        x1 in -1.0f64..1.0, y1 in -1.0f64..1.0,
        u2 in -3.0f64..3.0, v2 in 0.2f64..4.0, p2 in 0.0f64..6.28,
        x2 in -1.0f64..1.0, y2 in -1.0f64..1.0,
        u3 in -3.0f64..3.0, v3 in 0.2f64..4.0, p3 in 0.0f64..6.28,
    ) {
        let g1 = GroupPoint::new(u1, v1, p1, vec![x1, y1], vec![y1, x1]).unwrap();
        let g2 = GroupPoint::new(u2, v2, p2, vec![x2, y2], vec![y2, x2]).unwrap();
        let g3 = GroupPoint::new(u3, v3, p3, vec![x1, x2], vec![y1, y2]).unwrap();
        let left = g1.group_mul(&g2).unwrap().group_mul(&g3).unwrap();
        let right = g1.group_mul(&g2.group_mul(&g3).unwrap()).unwrap();
        prop_assert!((left.u - right.u).abs() < 1e-8);
        prop_assert!((left.v - right.v).abs() < 1e-8 * left.v.max(1.0));
        prop_assert!(((left.phi - right.phi + std::f64::consts::PI)
            .rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI).abs() < 1e-8);
        for (a, b) in left.x.iter().zip(&right.x) {
            prop_assert!((a - b).abs() < 1e-8);
        }

        let id = GroupPoint::identity(2);
        let gi = g1.group_mul(&id).unwrap();
        prop_assert!((gi.u - g1.u).abs() < 1e-12);
        prop_assert!((gi.v - g1.v).abs() < 1e-12);
    }

    #[test]
    fn reduction_lands_in_fundamental_domain(
        u in -8.0f64..8.0, v in 0.05f64..4.0, p in 0.0f64..6.28,
        x in -2.0f64..2.0, y in -2.0f64..2.0,
    ) {
        let g = GroupPoint::new(u, v, p, vec![x, y], vec![y, x]).unwrap();
        let word = reduce_to_fundamental(&g).unwrap();
        let red = &word.reduced;
        prop_assert!((-0.5..0.5).contains(&red.u));
        prop_assert!(red.u * red.u + red.v * red.v >= 1.0 - 1e-9);
        prop_assert!((0.0..std::f64::consts::PI).contains(&red.phi));
        for c in red.x.iter().chain(&red.y) {
            prop_assert!((-0.5..0.5 + 1e-12).contains(c));
        }
        // replaying the word from the reduced point recovers the input
        let back = word.replay();
        prop_assert!((back.u - g.u).abs() < 1e-7);
        prop_assert!((back.v - g.v).abs() < 1e-7 * g.v.max(1.0));
    }

    #[test]
    fn psi_product_commutes(
        s1 in 0.5f64..3.0, s2 in 0.5f64..3.0,
        c1 in 0.1f64..2.0, c2 in 0.1f64..2.0,
        r in 0.0f64..5.0,
    ) {
        let p1 = TestPsi::new(vec![paircorr_core::PsiTerm { coeff: c1, decay: s1, power: 0 }]).unwrap();
        let p2 = TestPsi::new(vec![paircorr_core::PsiTerm { coeff: c2, decay: s2, power: 1 }]).unwrap();
        let a = p1.product(&p2);
        let b = p2.product(&p1);
        prop_assert!((a.eval(r) - b.eval(r)).abs() < 1e-12 * (1.0 + a.eval(r).abs()));
        prop_assert!((a.integral_with_power(0) - b.integral_with_power(0)).abs() < 1e-12);
    }

    #[test]
    fn weight_hat_at_zero_is_total_mass(
        amp in 0.2f64..3.0,
        halfwidth in 0.2f64..3.0,
    ) {
        for h in [
            WeightH::triangle(amp, halfwidth).unwrap(),
            WeightH::raised_cosine(amp, halfwidth).unwrap(),
        ] {
            prop_assert!((h.hat(0.0) - h.integral()).abs() < 1e-10);
            prop_assert!((h.hat_integral() - 2.0 * h.eval(0.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn scan_permutation_invariance(
        a1 in 0.05f64..0.95,
        a2 in 0.05f64..0.95,
    ) {
        let s1 = TorusSpec::new(2, vec![a1, a2]).unwrap();
        let s2 = TorusSpec::new(2, vec![a2, a1]).unwrap();
        let r1 = estimate_type(&s1, 500).unwrap();
        let r2 = estimate_type(&s2, 500).unwrap();
        prop_assert_eq!(r1.kappa_hat, r2.kappa_hat);
        prop_assert_eq!(r1.worst_q, r2.worst_q);
        prop_assert!(r1.kappa_hat >= 1.0);
    }

    #[test]
    fn bessel_three_term_recurrence(
        x in 0.3f64..30.0,
        nu in 1u32..6,
    ) {
        // J_{nu-1} + J_{nu+1} = (2 nu / x) J_nu, integer orders
        let lo = bessel_j(2 * (nu - 1), x);
        let mid = bessel_j(2 * nu, x);
        let hi = bessel_j(2 * (nu + 1), x);
        prop_assert!((lo + hi - 2.0 * nu as f64 / x * mid).abs() < 1e-9);
    }
}

#[test]
fn ball_volume_recursion() {
    // B_k = B_{k-2} * 2 pi / k
    for k in 4u32..=12 {
        let bk = unit_ball_volume(k).unwrap();
        let prev = unit_ball_volume(k - 2).unwrap();
        assert!((bk - prev * 2.0 * std::f64::consts::PI / k as f64).abs() < 1e-12 * bk.abs());
    }
}
