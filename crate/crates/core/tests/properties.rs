mod common;

use proptest::prelude::*;

use rado_core::symcore::{parse_expr, FloorOutcome, ShiftProver, Simplifier};
use rado_core::symset::ColoringSpec;
use rado_core::{Assumptions, Bindings, Expr, Int, Symbol};

use common::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-4i64..=6).prop_map(Expr::constant),
        Just(Expr::sym("a")),
        Just(Expr::sym("b")),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x + y),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x - y),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x * y),
            (inner.clone(), 1u32..=3).prop_map(|(x, k)| x.pow(k)),
            (inner.clone(), 1i64..=4).prop_map(|(x, d)| Expr::floor_div(x, Expr::constant(d))),
            inner.clone().prop_map(|x| Expr::floor_div(x, Expr::sym("a"))),
        ]
    })
}

fn asm() -> Assumptions {
    Assumptions::new().at_least("a", 2).at_least("b", 1)
}

fn env(a: i64, b: i64) -> Bindings<Int> {
    [(Symbol::new("a"), a as Int), (Symbol::new("b"), b as Int)].into_iter().collect()
}

fn shipped() -> Vec<ColoringSpec<Int>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../specs");
    ["prop1.json", "thm3.json", "thm4.json"]
        .iter()
        .map(|f| ColoringSpec::from_json(&std::fs::read_to_string(format!("{dir}/{f}")).unwrap()).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn simplify_preserves_value(e in expr(), a in 2i64..12, b in 1i64..8) {
        let asm = asm();
        let simp = Simplifier::new(&asm, &ShiftProver);
        let s = simp.simplify(&e);
        let env = env(a, b);
        prop_assert_eq!(s.eval(&env).ok(), e.eval(&env).ok(), "{} -> {}", e, s);
    }

    #[test]
    fn simplify_is_idempotent(e in expr()) {
        let asm = asm();
        let simp = Simplifier::new(&asm, &ShiftProver);
        let once = simp.simplify(&e);
        prop_assert_eq!(simp.simplify(&once), once.clone(), "{}", e);
    }

    #[test]
    fn display_parses_back(e in expr(), a in 2i64..12, b in 1i64..8) {
        let back: Expr = parse_expr(&e.to_string()).unwrap();
        let env = env(a, b);
        prop_assert_eq!(back.eval(&env).ok(), e.eval(&env).ok(), "{}", e);
    }

    #[test]
    fn floor_rules_hold_on_the_grid(n in expr(), d in prop_oneof![Just(Expr::sym("a")), Just(Expr::sym("a") + Expr::constant(1)), (1i64..=5).prop_map(Expr::constant)]) {
        let asm = asm();
        let simp = Simplifier::new(&asm, &ShiftProver);
        if let FloorOutcome::Simplified(p) = simp.floor_simplify(&n, &d) {
            for a in 2..10 {
                for b in 1..6 {
                    let env = env(a, b);
                    let want = Expr::floor_div(n.clone(), d.clone()).eval(&env).ok();
                    prop_assert_eq!(p.eval_integer(&env).ok(), want, "floor({}, {}) -> {}", n, d, p.to_expr());
                }
            }
        }
    }

    #[test]
    fn enumeration_agrees_with_scan(eq in equation(), n in 1i64..=30) {
        enumeration_matches_scan(&eq, n)?;
    }

    #[test]
    fn clause_count(eq in three_term(), n in 1usize..=20, k in 2usize..=3, sym in any::<bool>()) {
        clause_count_law(&eq, n, k, sym)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sat_agrees_with_backtracking(eq in three_term(), n in 1usize..=12, k in 2usize..=3) {
        let Some(s) = sat_solver(true) else { return Ok(()) };
        sat_matches_backtracking(&s, &eq, n, k)?;
    }

    #[test]
    fn symmetry_breaking_keeps_satisfiability(eq in three_term(), n in 1usize..=10, k in 2usize..=3) {
        let (Some(with), Some(without)) = (sat_solver(true), sat_solver(false)) else { return Ok(()) };
        symmetry_preserves_sat(&with, &without, &eq, n, k)?;
    }

    #[test]
    fn smt_models_replay(lo in 1i64..6, d in 1i64..7, r in 0i64..5) {
        let Some(s) = smt_solver() else { return Ok(()) };
        smt_model_replays(&s, lo, d, r)?;
    }
}

#[test]
fn shipped_specs_round_trip() {
    for spec in shipped() {
        let json = spec.to_json();
        let back = ColoringSpec::<Int>::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json, "{}", spec.name);
        assert_eq!(back, spec, "{}", spec.name);
    }
}
