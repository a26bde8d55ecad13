use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use super::constraint::{CmpOp, Constraint};
use super::encode::{encode, EncodeError, Problem, Script};
use crate::process::{ProcessError, SolverCommand};
use crate::scalar::Scalar;
use crate::symcore::{AssumptionSet, Bindings, NonnegProver, ProofOutcome, ShiftProver, SymExpr, Symbol};

pub const DEFAULT_SMT_COMMAND: &str = "z3 -smt2 -in";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<T: Scalar> {
    Sat(Bindings<T>),
    Unsat,
    Unknown(String),
    Timeout,
}

impl<T: Scalar> Verdict<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Unknown(_) => "unknown",
            Verdict::Timeout => "timeout",
        }
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, Verdict::Unsat)
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Unknown(_) | Verdict::Timeout)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverVerdict<T: Scalar> {
    pub verdict: Verdict<T>,
    pub wall_time: Duration,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Launch(#[from] ProcessError),
    #[error("unparseable solver output: {0}")]
    Protocol(String),
    #[error("solver model does not satisfy the constraints: {0}")]
    ReplayMismatch(String),
}

/// Result of a validity query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "witness", rename_all = "lowercase")]
pub enum Validity {
    Proven,
    Refuted(Vec<(String, String)>),
    Unknown(String),
}

/// External SMT solver speaking SMT-LIB2.
#[derive(Debug, Clone)]
pub struct SmtSolver {
    pub command: SolverCommand,
}

impl SmtSolver {
    pub fn new(command: SolverCommand) -> Self {
        SmtSolver { command }
    }

    pub fn with_template(template: &str, timeout: Duration) -> Self {
        Self::new(SolverCommand::new(template, timeout))
    }

    pub fn with_timeout(&self, timeout: Duration) -> Self {
        let mut c = self.command.clone();
        c.timeout = timeout;
        SmtSolver { command: c }
    }

    pub fn check_script<T: Scalar>(&self, script: &Script, name: &str) -> Result<SolverVerdict<T>, SolverError> {
        let out = self.command.run(&script.text, name, "smt2")?;
        if out.timed_out {
            return Ok(SolverVerdict { verdict: Verdict::Timeout, wall_time: out.elapsed });
        }
        let verdict = parse_output(&out.stdout, &script.model_symbols)
            .map_err(|e| SolverError::Protocol(format!("{e}; stderr: {}", out.stderr.trim())))?;
        Ok(SolverVerdict { verdict, wall_time: out.elapsed })
    }

    /// Encode, solve, and replay any model against the original constraints.
    pub fn check<T: Scalar>(&self, p: &Problem<T>, name: &str) -> Result<SolverVerdict<T>, SolverError> {
        let script = encode(p)?;
        let v = self.check_script(&script, name)?;
        if let Verdict::Sat(model) = &v.verdict {
            replay(p, model)?;
        }
        Ok(v)
    }

    /// `phi` holds for every parameter value allowed by `asm`.
    pub fn prove_valid<T: Scalar>(
        &self,
        phi: &Constraint<T>,
        asm: &AssumptionSet<T>,
        name: &str,
    ) -> Result<(Validity, ProofOutcome<T>), SolverError> {
        let mut p = Problem::new(asm.clone()).constraint(Constraint::not(phi.clone()));
        p.params.extend(phi.symbols());
        let v = self.check(&p, name)?;
        Ok(match v.verdict {
            Verdict::Unsat => (Validity::Proven, ProofOutcome::Proven),
            Verdict::Sat(m) => {
                let w = m.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
                (Validity::Refuted(w), ProofOutcome::Refuted(m))
            }
            Verdict::Unknown(r) => (Validity::Unknown(r.clone()), ProofOutcome::Unknown(r)),
            Verdict::Timeout => (Validity::Unknown("timeout".into()), ProofOutcome::Unknown("timeout".into())),
        })
    }
}

pub fn replay<T: Scalar>(p: &Problem<T>, model: &Bindings<T>) -> Result<(), SolverError> {
    let asm_ok = p.asm.satisfied_by(model).map_err(|e| SolverError::ReplayMismatch(e.to_string()))?;
    if !asm_ok {
        return Err(SolverError::ReplayMismatch("assumptions violated".into()));
    }
    for c in &p.constraints {
        match c.eval(model) {
            Ok(true) => {}
            Ok(false) => return Err(SolverError::ReplayMismatch(format!("`{c}` is false"))),
            Err(e) => return Err(SolverError::ReplayMismatch(format!("`{c}`: {e}"))),
        }
    }
    Ok(())
}

/// Parse `sat`/`unsat`/`unknown` and an optional `get-value` response.
pub fn parse_output<T: Scalar>(stdout: &str, symbols: &[Symbol]) -> Result<Verdict<T>, String> {
    let mut lines = stdout.lines().map(str::trim).filter(|l| !l.is_empty());
    let status = lines.next().ok_or_else(|| "empty output".to_string())?;
    match status {
        "unsat" => Ok(Verdict::Unsat),
        "unknown" => Ok(Verdict::Unknown("solver returned unknown".into())),
        "timeout" => Ok(Verdict::Timeout),
        "sat" => {
            let rest: String = lines.collect::<Vec<_>>().join(" ");
            let model = parse_values(&rest)?;
            for s in symbols {
                if !model.contains_key(s) {
                    return Err(format!("model lacks `{s}`"));
                }
            }
            Ok(Verdict::Sat(model))
        }
        other => Err(format!("unexpected status line `{other}`")),
    }
}

#[derive(Debug, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_sexp(tokens: &[String], pos: &mut usize) -> Result<Sexp, String> {
    let t = tokens.get(*pos).ok_or("unexpected end of s-expression")?;
    *pos += 1;
    match t.as_str() {
        "(" => {
            let mut items = Vec::new();
            while tokens.get(*pos).map(String::as_str) != Some(")") {
                if *pos >= tokens.len() {
                    return Err("unbalanced parentheses".into());
                }
                items.push(parse_sexp(tokens, pos)?);
            }
            *pos += 1;
            Ok(Sexp::List(items))
        }
        ")" => Err("unexpected `)`".into()),
        a => Ok(Sexp::Atom(a.to_string())),
    }
}

fn sexp_int<T: Scalar>(s: &Sexp) -> Result<T, String> {
    match s {
        Sexp::Atom(a) => a.parse::<T>().map_err(|_| format!("bad integer `{a}`")),
        Sexp::List(xs) => match xs.as_slice() {
            [Sexp::Atom(m), v] if m == "-" => Ok(-sexp_int::<T>(v)?),
            _ => Err("unsupported value term".into()),
        },
    }
}

fn parse_values<T: Scalar>(text: &str) -> Result<Bindings<T>, String> {
    let mut model = Bindings::new();
    if text.trim().is_empty() {
        return Ok(model);
    }
    let tokens = tokenize(text);
    let mut pos = 0;
    let top = parse_sexp(&tokens, &mut pos)?;
    let Sexp::List(pairs) = top else {
        return Err("get-value response is not a list".into());
    };
    for p in pairs {
        match p {
            Sexp::List(kv) if kv.len() == 2 => {
                let Sexp::Atom(name) = &kv[0] else {
                    return Err("non-symbol key in model".into());
                };
                model.insert(Symbol::new(name), sexp_int(&kv[1])?);
            }
            _ => return Err("malformed model entry".into()),
        }
    }
    Ok(model)
}

/// Nonnegativity prover backed by the SMT solver, after a cheap shift attempt.
pub struct SmtProver {
    pub solver: SmtSolver,
}

impl<T: Scalar> NonnegProver<T> for SmtProver {
    fn prove_nonneg(&self, goals: &[SymExpr<T>], asm: &AssumptionSet<T>) -> ProofOutcome<T> {
        match ShiftProver.prove_nonneg(goals, asm) {
            ProofOutcome::Unknown(_) => {}
            decided => return decided,
        }
        let phi = Constraint::and(goals.iter().map(|g| Constraint::cmp(g.clone(), CmpOp::Ge, SymExpr::zero())).collect());
        match self.solver.prove_valid(&phi, asm, "guard") {
            Ok((_, outcome)) => outcome,
            Err(e) => ProofOutcome::Unknown(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_models() {
        let syms = vec![Symbol::new("a"), Symbol::new("x")];
        let v: Verdict<i64> = parse_output("sat\n((a 7)\n (x (- 12)))\n", &syms).unwrap();
        let m: Bindings<i64> = [(Symbol::new("a"), 7), (Symbol::new("x"), -12)].into_iter().collect();
        assert_eq!(v, Verdict::Sat(m));
        let v: Verdict<i64> = parse_output("unsat\n(error \"line 9: model is not available\")", &syms).unwrap();
        assert_eq!(v, Verdict::Unsat);
        assert!(parse_output::<i64>("sat\n((a 7))", &syms).is_err());
        assert!(parse_output::<i64>("segfault", &syms).is_err());
    }
}
