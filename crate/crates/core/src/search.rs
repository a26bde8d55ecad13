//! Exact Rado numbers by repeated external SAT calls.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diophantine::LinearEquation;
use crate::oracle::monochromatic_solutions;
use crate::process::{ProcessError, SolverCommand};
use crate::sat::{decode_certificate, emit_dimacs, encode, parse_solver_output, SatError, SatOutcome};

pub const DEFAULT_SAT_COMMAND: &str = "z3 -dimacs {file}";
pub const DEFAULT_N_MAX: usize = 5000;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error(transparent)]
    Launch(#[from] ProcessError),
    #[error("solver coloring of [1, {n}] has monochromatic solution {witness:?}")]
    BadCertificate { n: usize, witness: Vec<i64> },
    #[error("probes contradict monotonicity: sat at {sat}, unsat at {unsat}")]
    NonMonotone { sat: usize, unsat: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Regularity {
    Regular { reason: String },
    NotRegular { reason: String },
}

impl Regularity {
    pub fn is_regular(&self) -> bool {
        matches!(self, Regularity::Regular { .. })
    }
}

/// Rado's criterion, applied to `sum a_i x_i - a_m x_m = -c`.
pub fn regularity_check(eq: &LinearEquation) -> Regularity {
    let mut signed: Vec<i64> = eq.lhs.clone();
    signed.push(-eq.rhs);
    let zero_subset = (1u64..(1 << signed.len())).find_map(|mask| {
        let pick: Vec<i64> = (0..signed.len()).filter(|i| mask >> i & 1 == 1).map(|i| signed[i]).collect();
        (pick.iter().sum::<i64>() == 0).then_some(pick)
    });
    let c = -eq.constant;
    let s: i64 = signed.iter().sum();
    if c == 0 {
        return match zero_subset {
            Some(p) => Regularity::Regular { reason: format!("coefficients {p:?} sum to zero") },
            None => Regularity::NotRegular { reason: "no nonempty subset of coefficients sums to zero".into() },
        };
    }
    if s != 0 && c % s == 0 && c / s > 0 {
        return Regularity::Regular { reason: format!("c/s = {} is a positive integer", c / s) };
    }
    if s != 0 && c % s == 0 && c / s < 0 {
        return match zero_subset {
            Some(p) => Regularity::Regular {
                reason: format!("c/s = {} is a negative integer and {p:?} sums to zero", c / s),
            },
            None => Regularity::NotRegular {
                reason: "c/s is a negative integer but the homogeneous part is not regular".into(),
            },
        };
    }
    Regularity::NotRegular { reason: "c/s is not a nonzero integer".into() }
}

/// Known infinite 3-color cases, surfaced as hints only.
pub fn known_infinite(eq: &LinearEquation, k: usize) -> Option<&'static str> {
    match (k, eq.lhs.as_slice(), eq.rhs, eq.constant) {
        (3, [1, 1], a, 0) if a >= 4 => Some("R_3(E(3,0;1,1,a)) is infinite for a >= 4"),
        (3, [a, b], 1, 0) if a == b && *a >= 2 => Some("R_3(E(3,0;a,a,1)) is infinite for a >= 2"),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// An avoiding coloring; `colors[t - 1]` is the color of `t`.
    Sat(Vec<usize>),
    Unsat,
    Timeout,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct SatSolver {
    pub command: SolverCommand,
    pub symmetry: bool,
}

impl SatSolver {
    pub fn new(template: &str, timeout: Duration) -> Self {
        SatSolver { command: SolverCommand::new(template, timeout), symmetry: true }
    }

    /// Is there a `k`-coloring of `[1, n]` avoiding monochromatic solutions?
    pub fn solve_at(&self, eq: &LinearEquation, k: usize, n: usize) -> Result<(SolveOutcome, Duration), SearchError> {
        let inst = encode(eq, n, k, self.symmetry)?;
        let out = self.command.run(&emit_dimacs(&inst), &format!("rado_k{k}_n{n}"), "cnf")?;
        if out.timed_out {
            return Ok((SolveOutcome::Timeout, out.elapsed));
        }
        let outcome = match parse_solver_output(&out.stdout)? {
            SatOutcome::Unsat => SolveOutcome::Unsat,
            SatOutcome::Unknown => SolveOutcome::Unknown,
            SatOutcome::Sat(model) => {
                let colors = decode_certificate(&inst, &model)?;
                if let Some(w) = monochromatic_solutions(&colors, eq).into_iter().next() {
                    return Err(SearchError::BadCertificate { n, witness: w });
                }
                SolveOutcome::Sat(colors)
            }
        };
        Ok((outcome, out.elapsed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Linear,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub n: usize,
    pub verdict: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RadoOutcome {
    Value { r: usize },
    ExceedsCap { n_max: usize, hint: String },
    /// A probe timed out; the value lies in `(last_sat, first_unsat]`.
    Inconclusive { at: usize, last_sat: usize, first_unsat: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadoRecord {
    pub equation: String,
    pub k: usize,
    pub outcome: RadoOutcome,
    pub probes: Vec<Probe>,
    /// Avoiding coloring of `[1, R - 1]`, when found.
    pub certificate: Option<Vec<usize>>,
}

impl RadoRecord {
    pub fn value(&self) -> Option<usize> {
        match self.outcome {
            RadoOutcome::Value { r } => Some(r),
            _ => None,
        }
    }
}

/// Smallest `n` whose instance is unsatisfiable, searching up to `n_max`.
pub fn compute_rado(
    eq: &LinearEquation,
    k: usize,
    strategy: Strategy,
    n_max: usize,
    solver: &SatSolver,
) -> Result<RadoRecord, SearchError> {
    let mut probes = Vec::new();
    let mut last_sat = 0usize;
    let mut certificate: Option<Vec<usize>> = None;
    let mut first_unsat: Option<usize> = None;
    let probe = |n: usize, probes: &mut Vec<Probe>| -> Result<SolveOutcome, SearchError> {
        let (o, t) = solver.solve_at(eq, k, n)?;
        let verdict = match &o {
            SolveOutcome::Sat(_) => "sat",
            SolveOutcome::Unsat => "unsat",
            SolveOutcome::Timeout => "timeout",
            SolveOutcome::Unknown => "unknown",
        };
        probes.push(Probe { n, verdict: verdict.into(), seconds: t.as_secs_f64() });
        Ok(o)
    };
    let record = |outcome, probes, certificate| RadoRecord {
        equation: eq.to_string(),
        k,
        outcome,
        probes,
        certificate,
    };
    let inconclusive =
        |at, last_sat, first_unsat| RadoOutcome::Inconclusive { at, last_sat, first_unsat };

    // Phase 1: walk upwards (by one, or by doubling) until the first unsat.
    let mut n = 1usize;
    while n <= n_max {
        match probe(n, &mut probes)? {
            SolveOutcome::Sat(c) => {
                last_sat = n;
                certificate = Some(c);
            }
            SolveOutcome::Unsat => {
                first_unsat = Some(n);
                break;
            }
            _ => return Ok(record(inconclusive(n, last_sat, None), probes, certificate)),
        }
        n = match strategy {
            Strategy::Linear => n + 1,
            Strategy::Geometric => (2 * n).min(n_max.max(n + 1)),
        };
    }
    let Some(mut hi) = first_unsat else {
        let hint = match known_infinite(eq, k) {
            Some(h) => h.to_string(),
            None => format!("{:?}", regularity_check(eq)),
        };
        return Ok(record(RadoOutcome::ExceedsCap { n_max, hint }, probes, certificate));
    };
    // Phase 2: bisect (last_sat, hi].
    while hi - last_sat > 1 {
        let mid = last_sat + (hi - last_sat) / 2;
        match probe(mid, &mut probes)? {
            SolveOutcome::Sat(c) => {
                last_sat = mid;
                certificate = Some(c);
            }
            SolveOutcome::Unsat => hi = mid,
            _ => return Ok(record(inconclusive(mid, last_sat, Some(hi)), probes, certificate)),
        }
    }
    for p in &probes {
        let sat = p.verdict == "sat";
        if (sat && p.n >= hi) || (p.verdict == "unsat" && p.n < hi) {
            let (s, u) = if sat { (p.n, hi) } else { (last_sat, p.n) };
            return Err(SearchError::NonMonotone { sat: s, unsat: u });
        }
    }
    if certificate.as_ref().is_some_and(|c| c.len() != hi - 1) {
        certificate = None;
    }
    Ok(record(RadoOutcome::Value { r: hi }, probes, certificate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regularity() {
        assert!(regularity_check(&LinearEquation::three(1, 1, 1)).is_regular());
        assert!(regularity_check(&LinearEquation::three(5, 3, 3)).is_regular());
        assert!(!regularity_check(&LinearEquation::three(2, 2, 1)).is_regular());
        // x + y + 1 = z: signed sum s = 1, c = -1, c/s = -1 and {1, -1} sums to zero.
        assert!(regularity_check(&LinearEquation::new(vec![1, 1], 1, 1).unwrap()).is_regular());
        // 2x + 2y + 1 = z: c/s = -1/3.
        assert!(!regularity_check(&LinearEquation::new(vec![2, 2], 1, 1).unwrap()).is_regular());
    }

    #[test]
    fn known_infinite_hints() {
        assert!(known_infinite(&LinearEquation::three(1, 1, 5), 3).is_some());
        assert!(known_infinite(&LinearEquation::three(3, 3, 1), 3).is_some());
        assert!(known_infinite(&LinearEquation::three(1, 1, 1), 3).is_none());
    }
}
