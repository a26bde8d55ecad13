//! CNF for "some k-coloring of [1, n] has no monochromatic solution".
//!
//! Variable `v(i, j)` says integer `j` gets color `i`; its DIMACS id is
//! `j*k - (k-1) + i`, so the colors of `j` occupy a contiguous block.

use std::fmt::Write;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diophantine::{count_solutions, solutions, LinearEquation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("need n >= 1 and k >= 2 (got n = {n}, k = {k})")]
    BadSize { n: usize, k: usize },
    #[error("no solution up to {0}; the equation may not be 1-regular")]
    Unbounded(usize),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("malformed DIMACS: {0}")]
    Dimacs(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfInstance {
    pub n: usize,
    pub k: usize,
    pub num_vars: usize,
    pub clauses: Vec<Vec<i64>>,
}

impl CnfInstance {
    pub fn var(&self, color: usize, j: usize) -> i64 {
        var_index(self.k, color, j)
    }
}

pub fn var_index(k: usize, color: usize, j: usize) -> i64 {
    (j * k - (k - 1) + color) as i64
}

/// Search cap for [`r1_value`]'s brute-force fallback.
pub const R1_CAP: usize = 10_000;

/// Least `n` such that `[1, n]` holds a solution of `eq`.
pub fn r1_value(eq: &LinearEquation) -> Result<usize, SatError> {
    if let ([a, b], c, 0) = (eq.lhs.as_slice(), eq.rhs, eq.constant) {
        let (a, b) = (*a, *b);
        if a.gcd(&b) == 1 && b == c {
            return Ok((a + 1).max(b) as usize);
        }
        if a == b && a.gcd(&c) == 1 {
            return Ok(if c == 1 { 2 * a } else { a.max((c + 1) / 2) } as usize);
        }
    }
    (1..=R1_CAP).find(|&n| count_solutions(eq, n as i64) > 0).ok_or(SatError::Unbounded(R1_CAP))
}

/// Build the instance. With `sym_break`, color 0 is forced on 1 and, for
/// `k >= 3`, color 2 may not follow an all-color-0 prefix `1..j-1` for
/// `j = 2..=min(R1, n)`.
pub fn encode(eq: &LinearEquation, n: usize, k: usize, sym_break: bool) -> Result<CnfInstance, SatError> {
    if n < 1 || k < 2 {
        return Err(SatError::BadSize { n, k });
    }
    let v = |i: usize, j: usize| var_index(k, i, j);
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    for j in 1..=n {
        clauses.push((0..k).map(|i| v(i, j)).collect());
    }
    for j in 1..=n {
        for i1 in 0..k {
            for i2 in i1 + 1..k {
                clauses.push(vec![-v(i1, j), -v(i2, j)]);
            }
        }
    }
    for s in solutions(eq, n as i64) {
        let mut distinct: Vec<usize> = Vec::with_capacity(s.len());
        for x in s {
            let x = x as usize;
            if !distinct.contains(&x) {
                distinct.push(x);
            }
        }
        for i in 0..k {
            clauses.push(distinct.iter().map(|&x| -v(i, x)).collect());
        }
    }
    if sym_break {
        clauses.push(vec![v(0, 1)]);
        if k >= 3 {
            let top = r1_value(eq).unwrap_or(n).min(n);
            for j in 2..=top {
                let mut c: Vec<i64> = (1..j).map(|t| -v(0, t)).collect();
                c.push(-v(2, j));
                clauses.push(c);
            }
        }
    }
    Ok(CnfInstance { n, k, num_vars: n * k, clauses })
}

/// Number of clauses [`encode`] produces.
pub fn expected_clause_count(eq: &LinearEquation, n: usize, k: usize, sym_break: bool) -> usize {
    let base = n + n * k * (k - 1) / 2 + k * count_solutions(eq, n as i64);
    let sym = match (sym_break, k >= 3) {
        (false, _) => 0,
        (true, false) => 1,
        (true, true) => r1_value(eq).unwrap_or(n).min(n),
    };
    base + sym
}

pub fn emit_dimacs(inst: &CnfInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", inst.num_vars, inst.clauses.len());
    for c in &inst.clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}

/// Parse DIMACS text into `(num_vars, clauses)`.
pub fn parse_dimacs(text: &str) -> Result<(usize, Vec<Vec<i64>>), SatError> {
    let bad = |m: &str| SatError::Dimacs(m.to_string());
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut cur = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            let nums: Vec<usize> = rest.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| bad("header"))?;
            let [v, c] = nums[..] else { return Err(bad("header")) };
            header = Some((v, c));
            continue;
        }
        for tok in line.split_whitespace() {
            let l: i64 = tok.parse().map_err(|_| bad(tok))?;
            if l == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else {
                cur.push(l);
            }
        }
    }
    let (v, c) = header.ok_or_else(|| bad("missing header"))?;
    if !cur.is_empty() || clauses.len() != c {
        return Err(bad("clause count does not match header"));
    }
    if clauses.iter().flatten().any(|l| l.unsigned_abs() as usize > v) {
        return Err(bad("literal out of range"));
    }
    Ok((v, clauses))
}

/// Colors of `1..=n` (index `t - 1`) from the true literals of a model.
pub fn decode_certificate(inst: &CnfInstance, model: &[i64]) -> Result<Vec<usize>, SatError> {
    let mut truth = vec![None; inst.num_vars + 1];
    for &l in model {
        let v = l.unsigned_abs() as usize;
        if v == 0 || v > inst.num_vars {
            continue;
        }
        truth[v] = Some(l > 0);
    }
    let mut colors = Vec::with_capacity(inst.n);
    for j in 1..=inst.n {
        let mut set = Vec::new();
        for i in 0..inst.k {
            match truth[inst.var(i, j) as usize] {
                Some(true) => set.push(i),
                Some(false) => {}
                None => return Err(SatError::InvalidModel(format!("variable for ({i}, {j}) unassigned"))),
            }
        }
        match set[..] {
            [c] => colors.push(c),
            _ => return Err(SatError::InvalidModel(format!("integer {j} has colors {set:?}"))),
        }
    }
    Ok(colors)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    Sat(Vec<i64>),
    Unsat,
    Unknown,
}

/// Read a competition-format answer: an `s` status line plus `v` lines.
pub fn parse_solver_output(stdout: &str) -> Result<SatOutcome, SatError> {
    let mut status = None;
    let mut model = Vec::new();
    for line in stdout.lines().map(str::trim) {
        if let Some(s) = line.strip_prefix("s ") {
            status = Some(s.trim().to_string());
        } else if let Some(v) = line.strip_prefix("v ") {
            for tok in v.split_whitespace() {
                let l: i64 = tok.parse().map_err(|_| SatError::Dimacs(format!("model token `{tok}`")))?;
                if l != 0 {
                    model.push(l);
                }
            }
        } else if status.is_none() {
            let bare = match line {
                "sat" => "SATISFIABLE",
                "unsat" => "UNSATISFIABLE",
                "unknown" => "UNKNOWN",
                _ => continue,
            };
            status = Some(bare.to_string());
        }
    }
    match status.as_deref() {
        Some("SATISFIABLE") => Ok(SatOutcome::Sat(model)),
        Some("UNSATISFIABLE") => Ok(SatOutcome::Unsat),
        Some("UNKNOWN") | Some("INDETERMINATE") => Ok(SatOutcome::Unknown),
        _ => Err(SatError::Dimacs(format!("no status line in solver output: {}", stdout.trim()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schur_counts() {
        let eq = LinearEquation::three(1, 1, 1);
        let inst = encode(&eq, 4, 3, false).unwrap();
        assert_eq!(inst.clauses.len(), 4 + 12 + 18);
        assert!(emit_dimacs(&inst).starts_with("p cnf 12 34\n"));
        // (1, 1, 2) in color 0 collapses to two literals.
        assert!(inst.clauses.contains(&vec![-inst.var(0, 1), -inst.var(0, 2)]));
        assert_eq!(expected_clause_count(&eq, 4, 3, true), inst.clauses.len() + 2);
        assert_eq!(encode(&eq, 4, 3, true).unwrap().clauses.len(), 36);
    }

    #[test]
    fn layout() {
        assert_eq!(var_index(3, 0, 1), 1);
        assert_eq!(var_index(3, 2, 1), 3);
        assert_eq!(var_index(3, 0, 2), 4);
        assert!(encode(&LinearEquation::three(1, 1, 1), 1, 1, false).is_err());
    }

    #[test]
    fn no_solutions_at_one() {
        let inst = encode(&LinearEquation::three(1, 1, 1), 1, 2, false).unwrap();
        assert_eq!(inst.clauses, vec![vec![1, 2], vec![-1, -2]]);
    }

    #[test]
    fn dimacs_round_trip() {
        let inst = encode(&LinearEquation::three(4, 3, 3), 20, 3, true).unwrap();
        let (v, c) = parse_dimacs(&emit_dimacs(&inst)).unwrap();
        assert_eq!((v, c), (inst.num_vars, inst.clauses));
    }

    #[test]
    fn r1_closed_forms() {
        assert_eq!(r1_value(&LinearEquation::three(4, 3, 3)), Ok(5));
        assert_eq!(r1_value(&LinearEquation::three(3, 3, 1)), Ok(6));
        assert_eq!(r1_value(&LinearEquation::three(7, 7, 8)), Ok(7));
        // Fallback search: (1, 1, 1) and (2, 1, 1).
        assert_eq!(r1_value(&LinearEquation::three(1, 2, 3)), Ok(1));
        assert_eq!(r1_value(&LinearEquation::three(2, 3, 7)), Ok(2));
    }

    #[test]
    fn decoding() {
        let inst = encode(&LinearEquation::three(1, 1, 1), 2, 2, false).unwrap();
        assert_eq!(decode_certificate(&inst, &[1, -2, -3, 4]), Ok(vec![0, 1]));
        assert!(matches!(decode_certificate(&inst, &[1, 2, -3, 4]), Err(SatError::InvalidModel(_))));
        assert!(matches!(decode_certificate(&inst, &[1, -2]), Err(SatError::InvalidModel(_))));
    }

    #[test]
    fn solver_output() {
        assert_eq!(parse_solver_output("c hi\ns SATISFIABLE\nv 1 -2\nv 3 0\n"), Ok(SatOutcome::Sat(vec![1, -2, 3])));
        assert_eq!(parse_solver_output("s UNSATISFIABLE\n"), Ok(SatOutcome::Unsat));
        assert!(parse_solver_output("garbage").is_err());
    }
}
