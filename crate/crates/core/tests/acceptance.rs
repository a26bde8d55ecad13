//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_integer::Integer;
use proptest::test_runner::{Config, TestRunner};

use rado_core::diophantine::LinearEquation;
use rado_core::oracle::brute_rado;
use rado_core::process::command_available;
use rado_core::prover::{check_concrete, Prover, ProverConfig, Status, VerificationReport};
use rado_core::sat::r1_value;
use rado_core::search::{compute_rado, Strategy};
use rado_core::smt::{SmtSolver, DEFAULT_SMT_COMMAND};
use rado_core::symcore::{expand, parse_expr, ProofOutcome, ShiftProver, Simplifier};
use rado_core::symset::{size_of, ColoringSpec, FormatSet, IntervalSet, SymbolicSet};
use rado_core::{Assumptions, Bindings, Expr, Int, Symbol};

use common::*;

/// Colors of 1..=108 for a = 4, b = 3 (0 = D, 1 = R, 2 = B).
const COLORING_4_3: &str = "112112111112002001002002001002002001002002002002002002002002000000000000000000000000000000000000111111111111";

type Outcome = Result<String, String>;

fn e(s: &str) -> Expr {
    parse_expr(s).unwrap()
}

fn load(name: &str) -> ColoringSpec<Int> {
    let path = format!("{}/../../specs/{name}", env!("CARGO_MANIFEST_DIR"));
    ColoringSpec::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn env(pairs: &[(&str, i64)]) -> Bindings<Int> {
    pairs.iter().map(|(k, v)| (Symbol::new(k), *v as Int)).collect()
}

fn same_poly(got: &str, want: &str) -> bool {
    parse_expr::<Int>(got).is_ok_and(|g| expand(&g) == expand(&e(want)))
}

fn verify(spec: &ColoringSpec<Int>) -> Result<VerificationReport, String> {
    if !command_available(DEFAULT_SMT_COMMAND) {
        return Err(format!("`{DEFAULT_SMT_COMMAND}` is not available"));
    }
    let solver = SmtSolver::with_template(DEFAULT_SMT_COMMAND, Duration::from_secs(60));
    Ok(Prover::new(spec, ProverConfig::new(solver)).verify())
}

fn summarize(r: &VerificationReport) -> String {
    let failed: Vec<&str> = r.partition.iter().filter(|c| c.status != Status::Passed).map(|c| c.name.as_str()).collect();
    let open: Vec<String> = r.cases.iter().filter(|c| !c.attempt.is_unsat()).map(|c| format!("{}:{}", c.case.sets.join("/"), c.attempt.verdict)).collect();
    format!(
        "{} of {} cases unsat, partition failures {:?}, open cases {:?}, {:.0}s",
        r.summary.unsat, r.summary.cases, failed, open, r.seconds
    )
}

fn small_rado_numbers() -> Outcome {
    let s = sat_solver(true).ok_or("SAT solver not available")?;
    let start = Instant::now();
    let mut got = Vec::new();
    for (a, b, c, want) in [(1, 1, 1, 14), (2, 1, 1, 43), (3, 2, 2, 61), (1, 1, 3, 54), (2, 2, 3, 54)] {
        let eq = LinearEquation::three(a, b, c);
        let r = compute_rado(&eq, 3, Strategy::Geometric, 500, &s).map_err(|e| e.to_string())?.value();
        if r != Some(want) {
            return Err(format!("{eq}: got {r:?}, want {want}"));
        }
        got.push(format!("{eq}={want}"));
    }
    Ok(format!("{} in {:.0}s", got.join(" "), start.elapsed().as_secs_f64()))
}

fn check_report(r: &VerificationReport, bound: &str, counts: &[(&str, usize)]) -> Outcome {
    let mut per_class: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &r.cases {
        *per_class.entry(c.case.class.as_str()).or_default() += 1;
    }
    let want: BTreeMap<&str, usize> = counts.iter().cloned().collect();
    if per_class != want {
        return Err(format!("case counts {per_class:?}, want {want:?}"));
    }
    if !same_poly(&r.bound, bound) {
        return Err(format!("bound {} differs from {bound}", r.bound));
    }
    if !r.verified || r.summary.inconclusive > 0 {
        return Err(summarize(r));
    }
    Ok(format!("bound {}; {}", r.bound, summarize(r)))
}

fn concrete_cross_check() -> Outcome {
    let start = Instant::now();
    let thm3 = load("thm3.json");
    let (check, colors) = check_concrete(&thm3, &env(&[("a", 4), ("b", 3)])).map_err(|e| e.to_string())?;
    let want: Vec<usize> = COLORING_4_3.bytes().map(|c| (c - b'0') as usize).collect();
    if !check.clean || colors != want {
        return Err(format!("a=4, b=3: clean={} match={}", check.clean, colors == want));
    }
    let thm4 = load("thm4.json");
    for a in [7i64, 9] {
        let (check, _) = check_concrete(&thm4, &env(&[("a", a)])).map_err(|e| e.to_string())?;
        let n = (a.pow(3) * (a + 1) - 1) as usize;
        if !check.clean || check.n != n {
            return Err(format!("a={a}: n={} clean={} {:?}", check.n, check.clean, check.monochromatic));
        }
    }
    Ok(format!("[1,108] matches and is clean; a=7, 9 clean; {:.0}s", start.elapsed().as_secs_f64()))
}

fn size_identities(reports: &[(ColoringSpec<Int>, Option<VerificationReport>)]) -> Outcome {
    let asm = Assumptions::new().at_least("a", 1).at_least("b", 1);
    let simp = Simplifier::new(&asm, &ShiftProver);
    let b1 = SymbolicSet::interval("B1", IntervalSet::new(e("1"), e("b^2*a")).div(e("b")).ndiv(e("b^2")));
    let s = size_of(&b1, &simp, &[]).map_err(|e| e.to_string())?;
    if simp.prove_eq(&s, &e("a*(b - 1)")) != ProofOutcome::Proven {
        return Err(format!("interval size {s}"));
    }
    let tri = SymbolicSet::format(
        "T",
        FormatSet::new(e("a^2*i + j")).index("i", e("0"), e("a")).index("j", e("1"), e("i")).declared_injective(),
    );
    let t = size_of(&tri, &simp, &[]).map_err(|e| e.to_string())?;
    for a in 1..40 {
        if t.eval(&env(&[("a", a)])).ok() != Some((a * (a + 1) / 2) as Int) {
            return Err(format!("format size {t} at a={a}"));
        }
    }
    let mut points = 0;
    for (spec, report) in reports {
        let report = report.as_ref().ok_or(format!("{} was not verified", spec.name))?;
        for point in spec.asm.grid(4) {
            for set in spec.sets() {
                let size = report.sizes.get(&set.name).and_then(|s| parse_expr::<Int>(s).ok());
                let size = size.ok_or(format!("{}: no size for {}", spec.name, set.name))?;
                let want = set.instantiate(&point).map_err(|e| e.to_string())?.len() as Int;
                if size.eval(&point).ok() != Some(want) {
                    return Err(format!("{} at {point:?}: |{}| = {want}, size {size}", spec.name, set.name));
                }
                points += 1;
            }
        }
    }
    Ok(format!("a(b-1), a(a+1)/2; {points} set/grid checks"))
}

fn r1_formulas() -> Outcome {
    let mut checked = 0;
    for a in 1..=20i64 {
        for b in 1..=20i64 {
            if a.gcd(&b) != 1 {
                continue;
            }
            let mut shapes = vec![LinearEquation::three(a, b, b), LinearEquation::three(a, a, 1)];
            if b > 1 {
                shapes.push(LinearEquation::three(a, a, b));
            }
            for eq in shapes {
                let brute = brute_rado(&eq, 1, 200).map_err(|e| format!("{eq}: {e}"))?;
                let formula = r1_value(&eq).map_err(|e| e.to_string())?;
                if brute != formula {
                    return Err(format!("{eq}: formula {formula}, brute force {brute}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} equations"))
}

fn property_suites() -> Outcome {
    let (with, without) = match (sat_solver(true), sat_solver(false)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err("SAT solver not available".into()),
    };
    let smt = smt_solver().ok_or("SMT solver not available")?;
    let run = |name: &str, cases: u32, f: &mut dyn FnMut(&mut TestRunner) -> Result<(), String>| {
        let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
        f(&mut runner).map_err(|e| format!("{name}: {e}"))
    };
    run("enumeration", 200, &mut |r| {
        r.run(&(equation(), 1i64..=30), |(eq, n)| enumeration_matches_scan(&eq, n)).map_err(|e| e.to_string())
    })?;
    run("sat vs backtracking", 40, &mut |r| {
        r.run(&(three_term(), 1usize..=12, 2usize..=3), |(eq, n, k)| sat_matches_backtracking(&with, &eq, n, k))
            .map_err(|e| e.to_string())
    })?;
    run("symmetry", 40, &mut |r| {
        r.run(&(three_term(), 1usize..=10, 2usize..=3), |(eq, n, k)| symmetry_preserves_sat(&with, &without, &eq, n, k))
            .map_err(|e| e.to_string())
    })?;
    run("model replay", 20, &mut |r| {
        r.run(&(1i64..6, 1i64..7, 0i64..5), |(lo, d, rr)| smt_model_replays(&smt, lo, d, rr)).map_err(|e| e.to_string())
    })?;
    run("clause count", 200, &mut |r| {
        r.run(&(three_term(), 1usize..=20, 2usize..=3, proptest::bool::ANY), |(eq, n, k, s)| clause_count_law(&eq, n, k, s))
            .map_err(|e| e.to_string())
    })?;
    Ok("enumeration 200, sat/backtracking 40, symmetry 40, replay 20, clause count 200".into())
}

fn main() {
    let mut lines: Vec<(u32, &str, Outcome)> = Vec::new();
    lines.push((1, "small Rado numbers", small_rado_numbers()));
    let mut reports = Vec::new();
    for (id, file, bound, counts) in [
        (2, "prop1.json", "a^3 + 5*a^2 + 7*a + 1", [("first", 64), ("second", 8), ("third", 1)]),
        (3, "thm3.json", "a^3 + a^2 + (2*b + 1)*a + 1", [("D", 8), ("R", 27), ("B", 8)]),
        (4, "thm4.json", "a^3*(a + 1)", [("S", 1), ("R", 64), ("B", 64)]),
    ] {
        let spec = load(file);
        let report = verify(&spec);
        let outcome = report.as_ref().map_err(Clone::clone).and_then(|r| check_report(r, bound, &counts));
        lines.push((id, file, outcome));
        reports.push((spec, report.ok()));
    }
    lines.push((5, "concrete cross-check", concrete_cross_check()));
    lines.push((6, "size identities", size_identities(&reports)));
    lines.push((7, "R1 closed forms", r1_formulas()));
    lines.push((8, "property suites", property_suites()));
    lines.sort_by_key(|l| l.0);
    let mut failed = 0;
    for (id, what, outcome) in &lines {
        match outcome {
            Ok(d) => println!("criterion {id} PASS {what}: {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {id} FAIL {what}: {d}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
