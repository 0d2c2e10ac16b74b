use std::collections::BTreeMap;

use caremetrics_core::dsl::{evaluate, parse, tokenize, BinOp, Expr, MeasureContext};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

const NAMES: [&str; 4] = ["admissions", "beds", "cash", "missing_one"];

fn literal() -> impl Strategy<Value = Expr> {
    (
        0i64..100_000,
        prop_oneof![Just(1i64), Just(10), Just(100), Just(1000)],
    )
        .prop_map(|(n, d)| Expr::Literal(BigRational::new(BigInt::from(n), BigInt::from(d))))
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        literal(),
        (0..NAMES.len()).prop_map(|i| Expr::measure(NAMES[i]))
    ];
    leaf.prop_recursive(6, 64, 2, |inner| {
        prop_oneof![
            4 => (0..4usize, inner.clone(), inner.clone()).prop_map(|(op, l, r)| {
                Expr::binary([BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][op], l, r)
            }),
            1 => inner.prop_map(Expr::paren),
        ]
    })
}

fn oracle(e: &Expr, env: &BTreeMap<&str, BigRational>) -> Option<BigRational> {
    match e {
        Expr::Literal(v) => Some(v.clone()),
        Expr::Measure(n) => env.get(n.as_str()).cloned(),
        Expr::Paren(i) => oracle(i, env),
        Expr::Binary { op, left, right } => {
            let (l, r) = (oracle(left, env)?, oracle(right, env)?);
            match op {
                BinOp::Add => Some(l + r),
                BinOp::Sub => Some(l - r),
                BinOp::Mul => Some(l * r),
                BinOp::Div => (!r.is_zero()).then(|| l / r),
            }
        }
    }
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(e in expr()) {
        let text = e.to_string();
        prop_assert_eq!(parse(&text).unwrap(), e);
    }

    #[test]
    fn evaluation_matches_recursive_oracle(e in expr(), values in prop::array::uniform3(-20i64..20)) {
        let mut ctx = MeasureContext::new();
        let mut env = BTreeMap::new();
        for (name, v) in NAMES.iter().zip(values) {
            let v = BigRational::from_integer(BigInt::from(v));
            ctx.insert(*name, v.clone());
            env.insert(*name, v);
        }
        prop_assert_eq!(evaluate(&e, &ctx).as_number().cloned(), oracle(&e, &env));
    }

    #[test]
    fn arbitrary_text_never_panics(text in "[a-z0-9_ .+*/()-]{0,40}") {
        let _ = tokenize(&text);
        if let Ok(e) = parse(&text) {
            prop_assert_eq!(parse(&e.to_string()).unwrap(), e);
        }
    }
}
