use casimir_lab::fieldexpr::{eval_on_grid, parse, print, BinOp, Expr, Func, Var};
use casimir_lab::forms3::Grid;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-5.0..5.0f64).prop_map(Expr::Num),
        (0u32..1000).prop_map(|v| Expr::Num(v as f64 / 8.0)),
        Just(Expr::Var(Var::X)),
        Just(Expr::Var(Var::Y)),
        Just(Expr::Var(Var::Z)),
        Just(Expr::Pi),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(8, 128, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Exp)], inner.clone())
                .prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
            (
                prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)],
                inner.clone(),
                inner
            )
                .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
        ]
    })
}

fn same_bits(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_roundtrip_is_bit_exact(e in tree()) {
        let text = print(&e);
        let back = parse(&text).unwrap();
        prop_assert_eq!(print(&back), text);
        let g = Grid::new(4).unwrap();
        for idx in 0..g.len() {
            let [x, y, z] = g.point(idx);
            prop_assert!(same_bits(e.eval(x, y, z), back.eval(x, y, z)));
        }
    }

    #[test]
    fn parser_never_panics(src in "[-+*/^() .0-9a-z,]{0,24}") {
        let _ = parse(&src);
    }
}

#[test]
fn grid_evaluation_matches_pointwise_eval() {
    let g = Grid::new(8).unwrap();
    let e = parse("1+0.2*cos(2*pi*x)*exp(-y^2)").unwrap();
    let f = eval_on_grid(&e, g).unwrap();
    for idx in 0..g.len() {
        let [x, y, z] = g.point(idx);
        assert_eq!(f.values()[idx], e.eval(x, y, z));
        let direct = 1.0 + 0.2 * (2.0 * std::f64::consts::PI * x).cos() * (-(y * y)).exp();
        assert!((f.values()[idx] - direct).abs() < 1e-15);
    }
}
