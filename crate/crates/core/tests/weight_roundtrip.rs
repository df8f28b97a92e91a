use bessel_core::weight::{decay_exponent, parse_weight, WeightExpr, WeightFn};
use proptest::prelude::*;

fn literal() -> impl Strategy<Value = f64> {
    prop_oneof![
        (0u32..20).prop_map(f64::from),
        0.0f64..100.0,
        1e-9f64..1e-5,
        Just(1e20),
    ]
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![(-6i32..=6).prop_map(f64::from), -4.0f64..4.0]
}

fn expr() -> impl Strategy<Value = WeightExpr> {
    let leaf = prop_oneof![literal().prop_map(WeightExpr::Const), Just(WeightExpr::Var)];
    leaf.prop_recursive(6, 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| WeightExpr::Neg(Box::new(e))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| WeightExpr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| WeightExpr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| WeightExpr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| WeightExpr::Div(Box::new(a), Box::new(b))),
            (inner.clone(), exponent()).prop_map(|(a, k)| WeightExpr::Pow(Box::new(a), k)),
            inner.clone().prop_map(|e| WeightExpr::Log(Box::new(e))),
            inner.prop_map(|e| WeightExpr::Exp(Box::new(e))),
        ]
    })
}

fn depth(e: &WeightExpr) -> usize {
    use WeightExpr::*;
    match e {
        Const(_) | Var => 0,
        Neg(a) | Pow(a, _) | Log(a) | Exp(a) => 1 + depth(a),
        Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => 1 + depth(a).max(depth(b)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_round_trip(e in expr()) {
        prop_assert!(depth(&e) <= 6);
        let text = e.to_string();
        let back = parse_weight(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(&back, &e, "printed as {}", text);
    }

    #[test]
    fn reparsed_evaluation_agrees(e in expr(), rs in proptest::collection::vec(1e-3f64..1e3, 50)) {
        let back = parse_weight(&e.to_string()).unwrap();
        for r in rs {
            match (e.eval(r), back.eval(r)) {
                (Ok(a), Ok(b)) => prop_assert!(a == b || (a - b).abs() <= 1e-15 * a.abs()),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "r = {}: {:?} vs {:?}", r, a, b),
            }
        }
    }
}

#[test]
fn decay_of_pure_powers() {
    for a in -6..=2 {
        let w = WeightFn::parse(&format!("pow(r, {a})")).unwrap();
        let got = decay_exponent(&w).unwrap();
        assert!((got - a as f64).abs() <= 1e-6, "{a}: {got}");
    }
}
