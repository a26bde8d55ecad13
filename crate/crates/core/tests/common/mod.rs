//! Property checks shared by the proptest suite and the acceptance run.
#![allow(dead_code)]

use std::time::Duration;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use rado_core::diophantine::{count_solutions, solutions, LinearEquation};
use rado_core::oracle::{brute_rado, monochromatic_solutions};
use rado_core::process::command_available;
use rado_core::sat::{encode, expected_clause_count};
use rado_core::search::{SatSolver, SolveOutcome, DEFAULT_SAT_COMMAND};
use rado_core::smt::{Constraint, Problem, SmtSolver, Verdict, DEFAULT_SMT_COMMAND};
use rado_core::symcore::parse_expr;
use rado_core::{Assumptions, Symbol};

pub fn sat_solver(symmetry: bool) -> Option<SatSolver> {
    command_available(DEFAULT_SAT_COMMAND).then(|| SatSolver {
        symmetry,
        ..SatSolver::new(DEFAULT_SAT_COMMAND, Duration::from_secs(60))
    })
}

pub fn smt_solver() -> Option<SmtSolver> {
    command_available(DEFAULT_SMT_COMMAND).then(|| SmtSolver::with_template(DEFAULT_SMT_COMMAND, Duration::from_secs(60)))
}

/// Equations with two or three left-hand terms and small coefficients.
pub fn equation() -> impl Strategy<Value = LinearEquation> {
    (prop::collection::vec(1i64..=6, 2..=3), 1i64..=6, -3i64..=5)
        .prop_map(|(lhs, rhs, c)| LinearEquation::new(lhs, rhs, c).unwrap())
}

pub fn three_term() -> impl Strategy<Value = LinearEquation> {
    (1i64..=4, 1i64..=4, 1i64..=4, 0i64..=2).prop_map(|(a, b, c, k)| LinearEquation::new(vec![a, b], c, k).unwrap())
}

fn is_sat(o: &SolveOutcome) -> Result<bool, TestCaseError> {
    match o {
        SolveOutcome::Sat(_) => Ok(true),
        SolveOutcome::Unsat => Ok(false),
        other => Err(TestCaseError::fail(format!("solver gave {other:?}"))),
    }
}

/// The Euclid-based enumeration finds exactly the tuples a full scan finds.
pub fn enumeration_matches_scan(eq: &LinearEquation, n: i64) -> Result<(), TestCaseError> {
    let all_one_color = vec![0usize; n as usize];
    let scan = monochromatic_solutions(&all_one_color, eq);
    let fast = solutions(eq, n);
    prop_assert_eq!(&fast, &scan, "{} on [1, {}]", eq, n);
    prop_assert_eq!(count_solutions(eq, n), scan.len());
    Ok(())
}

/// SAT verdicts agree with the backtracking oracle.
pub fn sat_matches_backtracking(s: &SatSolver, eq: &LinearEquation, n: usize, k: usize) -> Result<(), TestCaseError> {
    let colorable = match brute_rado(eq, k, n) {
        Ok(r) => n < r,
        Err(_) => true,
    };
    let (o, _) = s.solve_at(eq, k, n).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(is_sat(&o)?, colorable, "{} k={} n={}", eq, k, n);
    if let SolveOutcome::Sat(colors) = o {
        prop_assert!(colors.iter().all(|&c| c < k));
        prop_assert!(monochromatic_solutions(&colors, eq).is_empty());
    }
    Ok(())
}

/// Symmetry clauses never change satisfiability.
pub fn symmetry_preserves_sat(
    with: &SatSolver,
    without: &SatSolver,
    eq: &LinearEquation,
    n: usize,
    k: usize,
) -> Result<(), TestCaseError> {
    let a = is_sat(&with.solve_at(eq, k, n).map_err(|e| TestCaseError::fail(e.to_string()))?.0)?;
    let b = is_sat(&without.solve_at(eq, k, n).map_err(|e| TestCaseError::fail(e.to_string()))?.0)?;
    prop_assert_eq!(a, b, "{} k={} n={}", eq, k, n);
    Ok(())
}

/// Clause count: ALO + AMO + one clause per solution and color + symmetry.
pub fn clause_count_law(eq: &LinearEquation, n: usize, k: usize, sym: bool) -> Result<(), TestCaseError> {
    let inst = encode(eq, n, k, sym).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(inst.clauses.len(), expected_clause_count(eq, n, k, sym));
    let sols = monochromatic_solutions(&vec![0usize; n], eq).len();
    let sym_part = inst.clauses.len() - n - n * k * (k - 1) / 2 - k * sols;
    let ok = if sym { (1..=n).contains(&sym_part) } else { sym_part == 0 };
    prop_assert!(ok, "{} symmetry clauses for n = {}", sym_part, n);
    Ok(())
}

/// Satisfiable systems come back with models that satisfy every constraint.
pub fn smt_model_replays(s: &SmtSolver, lo: i64, d: i64, r: i64) -> Result<(), TestCaseError> {
    let e = |t: &str| parse_expr::<i128>(t).unwrap();
    let p = Problem::new(Assumptions::new().at_least("a", lo))
        .var("x")
        .constraint(Constraint::between(e("1"), e("x"), e("a^2 + 10")))
        .constraint(Constraint::Divides(e(&d.to_string()), e(&format!("x + {r}"))))
        .constraint(Constraint::NotDivides(e("a"), e("x")));
    let v = s.check(&p, "replay").map_err(|e| TestCaseError::fail(e.to_string()))?;
    match v.verdict {
        Verdict::Sat(m) => {
            let (a, x) = (m[&Symbol::new("a")], m[&Symbol::new("x")]);
            prop_assert!(a >= lo as i128 && (1..=a * a + 10).contains(&x) && (x + r as i128) % d as i128 == 0 && x % a != 0);
        }
        other => prop_assert!(false, "expected a model, got {:?}", other),
    }
    Ok(())
}
