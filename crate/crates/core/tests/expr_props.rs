use fuzzy_noether::expr::{parse, BinaryOp, Env, Expr, UnaryOp, Var};
use proptest::prelude::*;

const VARS: [Var; 7] = [Var::X, Var::Ql, Var::Qu, Var::Vl, Var::Vu, Var::Wl, Var::Wu];

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3.0..3.0f64).prop_map(Expr::Const),
        (0..7usize).prop_map(|i| Expr::Var(VARS[i])),
    ]
}

/// Smooth trees without domain restrictions, built raw (no folding).
fn smooth() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let un = prop_oneof![
            Just(UnaryOp::Neg),
            Just(UnaryOp::Sin),
            Just(UnaryOp::Cos),
            Just(UnaryOp::Exp)
        ];
        let bin = prop_oneof![
            Just(BinaryOp::Add),
            Just(BinaryOp::Sub),
            Just(BinaryOp::Mul)
        ];
        prop_oneof![
            (un, inner.clone()).prop_map(|(op, e)| Expr::Unary(op, Box::new(e))),
            (bin, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::Binary(
                op,
                Box::new(a),
                Box::new(b)
            )),
            (inner, 2..4i32).prop_map(|(e, k)| Expr::Binary(
                BinaryOp::Pow,
                Box::new(e),
                Box::new(Expr::Const(k as f64))
            )),
        ]
    })
}

/// Any tree, including operations that can leave their domain.
fn any_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let un = prop_oneof![
            Just(UnaryOp::Neg),
            Just(UnaryOp::Ln),
            Just(UnaryOp::Exp),
            Just(UnaryOp::Sin),
            Just(UnaryOp::Cos),
            Just(UnaryOp::Sqrt)
        ];
        let bin = prop_oneof![
            Just(BinaryOp::Add),
            Just(BinaryOp::Sub),
            Just(BinaryOp::Mul),
            Just(BinaryOp::Div)
        ];
        prop_oneof![
            (un, inner.clone()).prop_map(|(op, e)| Expr::Unary(op, Box::new(e))),
            (bin, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::Binary(
                op,
                Box::new(a),
                Box::new(b)
            )),
            (inner, -2.0..3.0f64).prop_map(|(e, k)| Expr::Binary(
                BinaryOp::Pow,
                Box::new(e),
                Box::new(Expr::Const(k))
            )),
        ]
    })
}

fn env() -> impl Strategy<Value = [f64; 7]> {
    prop::array::uniform7(-1.0..1.0f64)
}

fn same(
    a: Result<f64, impl std::fmt::Debug>,
    b: Result<f64, impl std::fmt::Debug>,
    rel: f64,
) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => (x - y).abs() <= rel * x.abs().max(1.0),
        (Ok(x), Ok(y)) => x.is_nan() && y.is_nan() || x == y,
        (Err(_), Err(_)) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn display_parse_round_trip(e in any_expr(), vals in env()) {
        let text = e.to_string();
        let back = parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        let env = Env::full(vals);
        prop_assert!(same(e.eval(&env), back.eval(&env), 1e-12), "{text}");
        // printing is stable after one trip
        prop_assert_eq!(parse(&back.to_string()).unwrap().to_string(), back.to_string());
    }

    #[test]
    fn folding_preserves_value(e in any_expr(), vals in env()) {
        let env = Env::full(vals);
        prop_assert!(same(e.eval(&env), e.fold().eval(&env), 1e-14), "{e}");
    }

    #[test]
    fn symbolic_partials_match_central_differences(e in smooth(), vals in env(), slot in 0..7usize) {
        let var = VARS[slot];
        let d = e.derivative(var);
        let at = |t: f64| {
            let mut v = vals;
            v[slot] = t;
            e.eval(&Env::full(v)).ok().filter(|f| f.is_finite() && f.abs() < 1e6)
        };
        let x0 = vals[slot];
        let sym = d.eval(&Env::full(vals)).ok().filter(|f| f.is_finite());
        // Richardson-extrapolated central difference, O(h^4)
        let h = 1e-3;
        let samples = [x0 + h, x0 - h, x0 + h / 2.0, x0 - h / 2.0].map(at);
        prop_assume!(sym.is_some() && samples.iter().all(Option::is_some));
        let (sym, [p1, m1, p2, m2]) = (sym.unwrap(), samples.map(Option::unwrap));
        let fd = (4.0 * (p2 - m2) / h - (p1 - m1) / (2.0 * h)) / 3.0;
        prop_assert!((fd - sym).abs() <= 1e-6 * sym.abs().max(1.0), "{e}: d/d{var} fd {fd} vs {d} = {sym}");
    }
}

#[test]
fn derivative_of_constant_exponent_power() {
    let e = parse("(x + ql)^3").unwrap();
    let d = e.derivative(Var::X);
    let env = Env::new().with(Var::X, 0.5).with(Var::Ql, 1.5);
    assert!((d.eval(&env).unwrap() - 12.0).abs() < 1e-14);
    assert!(e.derivative(Var::Vu).is_zero());
}
