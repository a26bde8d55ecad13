use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use thiserror::Error;

use super::constraint::{CmpOp, Constraint};
use crate::scalar::Scalar;
use crate::symcore::{AssumptionSet, Node, SymExpr, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("symbol `{0}` is neither a parameter nor a declared variable")]
    UndeclaredSymbol(Symbol),
    #[error("cannot encode `{0}`")]
    Unsupported(String),
}

/// A satisfiability question: do values of the parameters (constrained by
/// `asm`) and of `vars` exist that satisfy every constraint?
#[derive(Debug, Clone, PartialEq)]
pub struct Problem<T: Scalar> {
    pub asm: AssumptionSet<T>,
    /// Parameters not mentioned by any assumption.
    pub params: BTreeSet<Symbol>,
    pub vars: BTreeSet<Symbol>,
    pub constraints: Vec<Constraint<T>>,
}

impl<T: Scalar> Problem<T> {
    pub fn new(asm: AssumptionSet<T>) -> Self {
        Problem { asm, params: BTreeSet::new(), vars: BTreeSet::new(), constraints: Vec::new() }
    }

    pub fn var(mut self, v: &str) -> Self {
        self.vars.insert(Symbol::new(v));
        self
    }

    pub fn param(mut self, p: &str) -> Self {
        self.params.insert(Symbol::new(p));
        self
    }

    pub fn constraint(mut self, c: Constraint<T>) -> Self {
        self.constraints.push(c);
        self
    }

    /// Parameters: declared ones plus everything the assumptions mention.
    pub fn parameters(&self) -> BTreeSet<Symbol> {
        let mut out = self.asm.symbols();
        out.extend(self.params.iter().cloned());
        out
    }

    /// Symbols reported in a model, in declaration order.
    pub fn model_symbols(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self.parameters().into_iter().collect();
        out.extend(self.vars.iter().filter(|v| !out.contains(v)).cloned().collect::<Vec<_>>());
        out
    }

    pub fn check_declared(&self) -> Result<(), EncodeError> {
        let known = self.parameters();
        for c in &self.constraints {
            for s in c.symbols() {
                if !known.contains(&s) && !self.vars.contains(&s) {
                    return Err(EncodeError::UndeclaredSymbol(s));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    pub text: String,
    pub model_symbols: Vec<Symbol>,
}

/// Emit an SMT-LIB2 script in `QF_NIA`. Output is a pure function of the input.
pub fn encode<T: Scalar>(p: &Problem<T>) -> Result<Script, EncodeError> {
    p.check_declared()?;
    let mut enc = Encoder::default();
    let symbols = p.model_symbols();
    for s in &symbols {
        enc.declare(s.as_str());
    }
    enc.assumptions(&p.asm)?;
    for c in &p.constraints {
        let f = enc.formula(&c.nnf())?;
        enc.assert(f);
    }
    let mut text = String::new();
    text.push_str("(set-logic QF_NIA)\n(set-option :produce-models true)\n");
    for d in &enc.decls {
        let _ = writeln!(text, "(declare-const {d} Int)");
    }
    for a in &enc.asserts {
        let _ = writeln!(text, "(assert {a})");
    }
    text.push_str("(check-sat)\n");
    if !symbols.is_empty() {
        let names: Vec<&str> = symbols.iter().map(Symbol::as_str).collect();
        let _ = writeln!(text, "(get-value ({}))", names.join(" "));
    }
    Ok(Script { text, model_symbols: symbols })
}

#[derive(Default)]
struct Encoder {
    decls: Vec<String>,
    declared: BTreeSet<String>,
    asserts: Vec<String>,
    fresh: usize,
    floors: BTreeMap<(String, String), String>,
}

impl Encoder {
    fn declare(&mut self, name: &str) {
        if self.declared.insert(name.to_string()) {
            self.decls.push(name.to_string());
        }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        let name = format!("__{prefix}{}", self.fresh);
        self.fresh += 1;
        self.declare(&name);
        name
    }

    fn assert(&mut self, f: String) {
        self.asserts.push(f);
    }

    fn assumptions<T: Scalar>(&mut self, asm: &AssumptionSet<T>) -> Result<(), EncodeError> {
        for (s, lb) in asm.lower_bounds() {
            let lb = int(lb);
            self.assert(format!("(>= {s} {lb})"));
        }
        for (s, par) in asm.parities() {
            let t = format!("__t_{s}");
            self.declare(&t);
            self.assert(format!("(= {s} (+ (* 2 {t}) {}))", par.residue()));
            if let Some(lb) = asm.lower(s) {
                let tl = (lb.clone() - T::of(par.residue())).div_ceil(&T::of(2));
                self.assert(format!("(>= {t} {})", int(&tl)));
            }
        }
        for (a, b) in asm.coprime_pairs() {
            let (u, v) = (format!("__bu_{a}_{b}"), format!("__bv_{a}_{b}"));
            self.declare(&u);
            self.declare(&v);
            self.assert(format!("(= (+ (* {a} {u}) (* {b} {v})) 1)"));
        }
        for f in asm.facts() {
            let t = self.term(f)?;
            self.assert(format!("(>= {t} 0)"));
        }
        Ok(())
    }

    fn term<T: Scalar>(&mut self, e: &SymExpr<T>) -> Result<String, EncodeError> {
        Ok(match e.node() {
            Node::Const(c) => int(c),
            Node::Sym(s) => s.to_string(),
            Node::Add(xs) => format!("(+ {})", self.terms(xs)?),
            Node::Mul(xs) => format!("(* {})", self.terms(xs)?),
            Node::Pow(b, k) => match k {
                0 => "1".into(),
                1 => self.term(b)?,
                _ => {
                    let b = self.term(b)?;
                    format!("(* {})", vec![b; *k as usize].join(" "))
                }
            },
            Node::Floor(n, d) => {
                let (n, d) = (self.term(n)?, self.term(d)?);
                if let Some(f) = self.floors.get(&(n.clone(), d.clone())) {
                    return Ok(f.clone());
                }
                let f = self.fresh("f");
                let qf = format!("(* {d} {f})");
                self.assert(format!(
                    "(or (= {d} 0) (and (> {d} 0) (<= {qf} {n}) (< {n} (+ {qf} {d}))) (and (< {d} 0) (>= {qf} {n}) (> {n} (+ {qf} {d}))))"
                ));
                self.floors.insert((n, d), f.clone());
                f
            }
            Node::Lcm(xs) => {
                let vals: Option<Vec<&T>> = xs.iter().map(|x| x.as_const()).collect();
                match vals {
                    Some(vs) => int(&vs.into_iter().fold(T::one(), |acc, v| acc.lcm(v))),
                    None => return Err(EncodeError::Unsupported(e.to_string())),
                }
            }
        })
    }

    fn terms<T: Scalar>(&mut self, xs: &[SymExpr<T>]) -> Result<String, EncodeError> {
        let parts = xs.iter().map(|x| self.term(x)).collect::<Result<Vec<_>, _>>()?;
        Ok(parts.join(" "))
    }

    fn formula<T: Scalar>(&mut self, c: &Constraint<T>) -> Result<String, EncodeError> {
        Ok(match c {
            Constraint::True => "true".into(),
            Constraint::False => "false".into(),
            Constraint::Cmp(l, op, r) => {
                let (l, r) = (self.term(l)?, self.term(r)?);
                match op {
                    CmpOp::Ne => format!("(not (= {l} {r}))"),
                    _ => format!("({} {l} {r})", op.smt()),
                }
            }
            Constraint::Divides(d, e) => {
                let (d, e) = (self.term(d)?, self.term(e)?);
                let q = self.fresh("q");
                format!("(= {e} (* {d} {q}))")
            }
            Constraint::NotDivides(d, e) => {
                let (d, e) = (self.term(d)?, self.term(e)?);
                let q = self.fresh("q");
                let r = self.fresh("r");
                format!("(and (= {e} (+ (* {d} {q}) {r})) (>= {r} 1) (<= {r} (- {d} 1)))")
            }
            Constraint::And(xs) if xs.is_empty() => "true".into(),
            Constraint::Or(xs) if xs.is_empty() => "false".into(),
            Constraint::And(xs) => format!("(and {})", self.formulas(xs)?),
            Constraint::Or(xs) => format!("(or {})", self.formulas(xs)?),
            Constraint::Not(x) => format!("(not {})", self.formula(x)?),
        })
    }

    fn formulas<T: Scalar>(&mut self, xs: &[Constraint<T>]) -> Result<String, EncodeError> {
        let parts = xs.iter().map(|x| self.formula(x)).collect::<Result<Vec<_>, _>>()?;
        Ok(parts.join(" "))
    }
}

fn int<T: Scalar>(v: &T) -> String {
    if v.is_negative() {
        format!("(- {})", v.abs())
    } else {
        v.to_string()
    }
}
