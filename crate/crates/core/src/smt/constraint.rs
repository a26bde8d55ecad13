use std::collections::BTreeSet;
use std::fmt;

use crate::scalar::Scalar;
use crate::symcore::{Bindings, EvalError, SymExpr, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    pub fn holds<T: Ord>(self, l: &T, r: &T) -> bool {
        match self {
            CmpOp::Le => l <= r,
            CmpOp::Lt => l < r,
            CmpOp::Ge => l >= r,
            CmpOp::Gt => l > r,
            CmpOp::Eq => l == r,
            CmpOp::Ne => l != r,
        }
    }

    pub fn smt(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Eq => "=",
            CmpOp::Ne => "distinct",
        }
    }
}

/// Quantifier-free formula over integer expressions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constraint<T: Scalar> {
    True,
    False,
    Cmp(SymExpr<T>, CmpOp, SymExpr<T>),
    /// `d | e`
    Divides(SymExpr<T>, SymExpr<T>),
    /// `d ∤ e`, meaningful for `d >= 1`.
    NotDivides(SymExpr<T>, SymExpr<T>),
    And(Vec<Constraint<T>>),
    Or(Vec<Constraint<T>>),
    Not(Box<Constraint<T>>),
}

impl<T: Scalar> Constraint<T> {
    pub fn cmp(l: SymExpr<T>, op: CmpOp, r: SymExpr<T>) -> Self {
        Constraint::Cmp(l, op, r)
    }

    pub fn le(l: SymExpr<T>, r: SymExpr<T>) -> Self {
        Self::cmp(l, CmpOp::Le, r)
    }

    pub fn lt(l: SymExpr<T>, r: SymExpr<T>) -> Self {
        Self::cmp(l, CmpOp::Lt, r)
    }

    pub fn ge(l: SymExpr<T>, r: SymExpr<T>) -> Self {
        Self::cmp(l, CmpOp::Ge, r)
    }

    pub fn eq(l: SymExpr<T>, r: SymExpr<T>) -> Self {
        Self::cmp(l, CmpOp::Eq, r)
    }

    pub fn ne(l: SymExpr<T>, r: SymExpr<T>) -> Self {
        Self::cmp(l, CmpOp::Ne, r)
    }

    pub fn between(lo: SymExpr<T>, v: SymExpr<T>, hi: SymExpr<T>) -> Self {
        Constraint::And(vec![Self::le(lo, v.clone()), Self::le(v, hi)])
    }

    pub fn and(parts: Vec<Constraint<T>>) -> Self {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Constraint::True => {}
                Constraint::And(xs) => flat.extend(xs),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Constraint::True,
            1 => flat.pop().unwrap(),
            _ => Constraint::And(flat),
        }
    }

    pub fn or(parts: Vec<Constraint<T>>) -> Self {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Constraint::False => {}
                Constraint::Or(xs) => flat.extend(xs),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Constraint::False,
            1 => flat.pop().unwrap(),
            _ => Constraint::Or(flat),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Constraint<T>) -> Self {
        Constraint::Not(Box::new(c))
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Constraint::True | Constraint::False => {}
            Constraint::Cmp(l, _, r) | Constraint::Divides(l, r) | Constraint::NotDivides(l, r) => {
                out.extend(l.symbols());
                out.extend(r.symbols());
            }
            Constraint::And(xs) | Constraint::Or(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Constraint::Not(x) => x.collect_symbols(out),
        }
    }

    /// Concrete truth value. `d ∤ e` with `d = 0` holds iff `e != 0`.
    pub fn eval(&self, env: &Bindings<T>) -> Result<bool, EvalError> {
        Ok(match self {
            Constraint::True => true,
            Constraint::False => false,
            Constraint::Cmp(l, op, r) => op.holds(&l.eval(env)?, &r.eval(env)?),
            Constraint::Divides(d, e) => divides(&d.eval(env)?, &e.eval(env)?),
            Constraint::NotDivides(d, e) => !divides(&d.eval(env)?, &e.eval(env)?),
            Constraint::And(xs) => {
                for x in xs {
                    if !x.eval(env)? {
                        return Ok(false);
                    }
                }
                true
            }
            Constraint::Or(xs) => {
                for x in xs {
                    if x.eval(env)? {
                        return Ok(true);
                    }
                }
                false
            }
            Constraint::Not(x) => !x.eval(env)?,
        })
    }

    /// Push negations down to the atoms.
    pub fn nnf(&self) -> Constraint<T> {
        self.nnf_signed(true)
    }

    fn nnf_signed(&self, positive: bool) -> Constraint<T> {
        match (self, positive) {
            (Constraint::True, true) | (Constraint::False, false) => Constraint::True,
            (Constraint::True, false) | (Constraint::False, true) => Constraint::False,
            (Constraint::Cmp(l, op, r), p) => {
                let op = if p { *op } else { op.negate() };
                Constraint::Cmp(l.clone(), op, r.clone())
            }
            (Constraint::Divides(d, e), true) | (Constraint::NotDivides(d, e), false) => {
                Constraint::Divides(d.clone(), e.clone())
            }
            (Constraint::Divides(d, e), false) | (Constraint::NotDivides(d, e), true) => {
                Constraint::NotDivides(d.clone(), e.clone())
            }
            (Constraint::And(xs), true) | (Constraint::Or(xs), false) => {
                Constraint::and(xs.iter().map(|x| x.nnf_signed(positive)).collect())
            }
            (Constraint::Or(xs), true) | (Constraint::And(xs), false) => {
                Constraint::or(xs.iter().map(|x| x.nnf_signed(positive)).collect())
            }
            (Constraint::Not(x), p) => x.nnf_signed(!p),
        }
    }

    pub fn map_exprs(&self, f: &impl Fn(&SymExpr<T>) -> SymExpr<T>) -> Constraint<T> {
        match self {
            Constraint::True | Constraint::False => self.clone(),
            Constraint::Cmp(l, op, r) => Constraint::Cmp(f(l), *op, f(r)),
            Constraint::Divides(d, e) => Constraint::Divides(f(d), f(e)),
            Constraint::NotDivides(d, e) => Constraint::NotDivides(f(d), f(e)),
            Constraint::And(xs) => Constraint::And(xs.iter().map(|x| x.map_exprs(f)).collect()),
            Constraint::Or(xs) => Constraint::Or(xs.iter().map(|x| x.map_exprs(f)).collect()),
            Constraint::Not(x) => Constraint::not(x.map_exprs(f)),
        }
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Constraint<T>> {
        match self {
            Constraint::And(xs) => xs.iter().flat_map(|x| x.conjuncts()).collect(),
            Constraint::True => Vec::new(),
            other => vec![other],
        }
    }
}

fn divides<T: Scalar>(d: &T, e: &T) -> bool {
    if d.is_zero() {
        e.is_zero()
    } else {
        e.mod_floor(d).is_zero()
    }
}

impl<T: Scalar> fmt::Display for Constraint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[Constraint<T>], sep: &str| -> fmt::Result {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "({x})")?;
            }
            Ok(())
        };
        match self {
            Constraint::True => f.write_str("true"),
            Constraint::False => f.write_str("false"),
            Constraint::Cmp(l, op, r) => {
                let op = match op {
                    CmpOp::Ne => "!=",
                    CmpOp::Eq => "=",
                    other => other.smt(),
                };
                write!(f, "{l} {op} {r}")
            }
            Constraint::Divides(d, e) => write!(f, "{d} | {e}"),
            Constraint::NotDivides(d, e) => write!(f, "not {d} | {e}"),
            Constraint::And(xs) => join(f, xs, " and "),
            Constraint::Or(xs) => join(f, xs, " or "),
            Constraint::Not(x) => write!(f, "not ({x})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse_expr;

    fn e(s: &str) -> SymExpr<i64> {
        parse_expr(s).unwrap()
    }

    #[test]
    fn nnf_pushes_negation() {
        let c = Constraint::not(Constraint::and(vec![
            Constraint::le(e("1"), e("x")),
            Constraint::Divides(e("a"), e("x")),
        ]));
        let n = c.nnf();
        assert_eq!(
            n,
            Constraint::Or(vec![
                Constraint::Cmp(e("1"), CmpOp::Gt, e("x")),
                Constraint::NotDivides(e("a"), e("x")),
            ])
        );
        let env: Bindings<i64> = [(Symbol::new("a"), 3), (Symbol::new("x"), 6)].into_iter().collect();
        assert_eq!(c.eval(&env), n.eval(&env));
    }

    #[test]
    fn divisibility_semantics() {
        let env: Bindings<i64> = [(Symbol::new("x"), -6)].into_iter().collect();
        assert!(Constraint::Divides(e("3"), e("x")).eval(&env).unwrap());
        assert!(Constraint::NotDivides(e("4"), e("x")).eval(&env).unwrap());
        assert!(!Constraint::Divides(e("0"), e("x")).eval(&env).unwrap());
    }
}
