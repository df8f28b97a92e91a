use bessel_core::profile::{smooth_family, TestProfile};
use bessel_core::rellich::{
    extremal_exponent, gamma_range, geometric_radii, okazawa_constant, rellich_check,
    rellich_classical_constant, rellich_constant, rellich_hypothesis_check_fn, RellichError,
};
use bessel_core::weight::WeightFn;
use proptest::prelude::*;

fn wf(text: &str) -> WeightFn {
    WeightFn::parse(text).unwrap()
}

#[test]
fn classical_and_okazawa_constants() {
    for n in 5..=12 {
        assert_eq!(
            rellich_constant(n, 2.0, 0.0).unwrap(),
            rellich_classical_constant(n).unwrap()
        );
    }
    for n in [5u32, 7, 9] {
        for p in [1.5, 2.0, 3.0] {
            if p < n as f64 / 2.0 {
                assert_eq!(
                    rellich_constant(n, p, 0.0).unwrap(),
                    okazawa_constant(n, p).unwrap()
                );
            } else {
                assert!(okazawa_constant(n, p).is_err());
            }
        }
    }
    assert!(matches!(
        rellich_constant(5, 2.0, -0.5),
        Err(RellichError::OutOfRange { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn extremal_pair_is_an_equality_case(
        n in 5u32..=12,
        p in prop_oneof![Just(1.5), Just(2.0), Just(2.5), Just(3.0), Just(4.0)],
        t in 0.05f64..0.95,
    ) {
        let (lo, hi) = gamma_range(n, p);
        let gamma = lo + t * (hi - lo);
        let c = rellich_constant(n, p, gamma).unwrap();
        let alpha = extremal_exponent(n, p, gamma);
        let w = move |r: f64| r.powf(gamma * p);
        let v = move |r: f64| r.powf(alpha);
        let h = move |r: f64| c * r.powf((gamma - 2.0) * p);
        let rep = rellich_hypothesis_check_fn(&w, &v, &h, p, n, &geometric_radii(0.5, 5.0, 20), 1e-5)
            .unwrap();
        prop_assert!(rep.max_rel_slack <= 1e-5, "n = {}, p = {}, γ = {}: {:e}", n, p, gamma, rep.max_rel_slack);
        prop_assert!(rep.violations.is_empty());
    }
}

#[test]
fn classical_rellich_holds_on_smooth_profiles() {
    for n in [5u32, 6, 8] {
        let c = rellich_classical_constant(n).unwrap();
        let h = wf(&format!("{c} * pow(r, -4)"));
        for f in smooth_family(1.0) {
            let rep = rellich_check(&wf("1"), &h, 2.0, n, &f, 1e-10, 0.0).unwrap();
            assert!(rep.ratio.unwrap() >= 1.0 - 1e-5, "n = {n}, {f:?}: {rep:?}");
        }
    }
}

#[test]
fn rellich_ratio_is_dilation_invariant() {
    let h = wf("1.5625 * pow(r, -4)");
    let f = TestProfile::Gaussian {
        sigma: 0.3,
        radius: 1.0,
    };
    let base = rellich_check(&wf("1"), &h, 2.0, 5, &f, 1e-12, 0.0)
        .unwrap()
        .ratio
        .unwrap();
    for lambda in [0.2, 4.0] {
        let r = rellich_check(&wf("1"), &h, 2.0, 5, &f.dilated(lambda), 1e-12, 0.0)
            .unwrap()
            .ratio
            .unwrap();
        assert!((r / base - 1.0).abs() <= 1e-8);
    }
}
