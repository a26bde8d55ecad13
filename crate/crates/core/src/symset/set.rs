use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::symcore::{Bindings, EvalError, SymExpr, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("size of `{set}` still contains floor or lcm terms: {expr}")]
    UnsimplifiableSize { set: String, expr: String },
    #[error("injectivity of `{0}` is neither proven nor declared")]
    InjectivityUnknown(String),
    #[error("cannot decide whether `{element}` lies in `{set}`")]
    ExclusionUndecided { set: String, element: String },
    #[error("unsupported set shape in `{set}`: {why}")]
    Unsupported { set: String, why: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntervalSet<T: Scalar> {
    pub lower: SymExpr<T>,
    pub upper: SymExpr<T>,
    pub div: Vec<SymExpr<T>>,
    pub ndiv: Vec<SymExpr<T>>,
}

impl<T: Scalar> IntervalSet<T> {
    pub fn new(lower: SymExpr<T>, upper: SymExpr<T>) -> Self {
        IntervalSet { lower, upper, div: Vec::new(), ndiv: Vec::new() }
    }

    pub fn div(mut self, d: SymExpr<T>) -> Self {
        self.div.push(d);
        self
    }

    pub fn ndiv(mut self, d: SymExpr<T>) -> Self {
        self.ndiv.push(d);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexVar<T: Scalar> {
    pub name: Symbol,
    pub lower: SymExpr<T>,
    pub upper: SymExpr<T>,
}

/// `modulus | combo`, where `combo` is an integer combination of index variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResidueFilter<T: Scalar> {
    pub modulus: SymExpr<T>,
    pub combo: SymExpr<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Injectivity {
    Proven,
    Declared,
    #[default]
    Unknown,
}

/// An excluded element, optionally with index values showing it is a member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Exclusion<T: Scalar> {
    pub value: SymExpr<T>,
    pub witness: Option<BTreeMap<Symbol, SymExpr<T>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormatSet<T: Scalar> {
    /// Outermost first; bounds may mention earlier indices.
    pub indices: Vec<IndexVar<T>>,
    pub expr: SymExpr<T>,
    pub div: Vec<SymExpr<T>>,
    pub ndiv: Vec<SymExpr<T>>,
    pub residue: Option<ResidueFilter<T>>,
    pub exclude: Vec<Exclusion<T>>,
    pub injectivity: Injectivity,
}

impl<T: Scalar> FormatSet<T> {
    pub fn new(expr: SymExpr<T>) -> Self {
        FormatSet {
            indices: Vec::new(),
            expr,
            div: Vec::new(),
            ndiv: Vec::new(),
            residue: None,
            exclude: Vec::new(),
            injectivity: Injectivity::Unknown,
        }
    }

    pub fn index(mut self, name: &str, lower: SymExpr<T>, upper: SymExpr<T>) -> Self {
        self.indices.push(IndexVar { name: Symbol::new(name), lower, upper });
        self
    }

    pub fn declared_injective(mut self) -> Self {
        self.injectivity = Injectivity::Declared;
        self
    }

    pub fn index_names(&self) -> BTreeSet<Symbol> {
        self.indices.iter().map(|v| v.name.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetShape<T: Scalar> {
    Interval(IntervalSet<T>),
    Format(FormatSet<T>),
}

/// A named member of a color class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicSet<T: Scalar> {
    pub name: String,
    pub shape: SetShape<T>,
}

impl<T: Scalar> SymbolicSet<T> {
    pub fn interval(name: &str, s: IntervalSet<T>) -> Self {
        SymbolicSet { name: name.to_string(), shape: SetShape::Interval(s) }
    }

    pub fn format(name: &str, s: FormatSet<T>) -> Self {
        SymbolicSet { name: name.to_string(), shape: SetShape::Format(s) }
    }

    /// Parameters the set mentions (index variables excluded).
    pub fn parameters(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        match &self.shape {
            SetShape::Interval(s) => {
                for e in [&s.lower, &s.upper].into_iter().chain(&s.div).chain(&s.ndiv) {
                    out.extend(e.symbols());
                }
            }
            SetShape::Format(f) => {
                let idx = f.index_names();
                let mut exprs: Vec<&SymExpr<T>> = vec![&f.expr];
                for v in &f.indices {
                    exprs.push(&v.lower);
                    exprs.push(&v.upper);
                }
                exprs.extend(&f.div);
                exprs.extend(&f.ndiv);
                if let Some(r) = &f.residue {
                    exprs.push(&r.modulus);
                    exprs.push(&r.combo);
                }
                for x in &f.exclude {
                    exprs.push(&x.value);
                }
                for e in exprs {
                    out.extend(e.symbols().into_iter().filter(|s| !idx.contains(s)));
                }
            }
        }
        out
    }

    /// Exact extension at a full parameter assignment, sorted and deduplicated.
    pub fn instantiate(&self, env: &Bindings<T>) -> Result<Vec<T>, SetError> {
        let mut out: BTreeSet<T> = BTreeSet::new();
        match &self.shape {
            SetShape::Interval(s) => {
                let (lo, hi) = (s.lower.eval(env)?, s.upper.eval(env)?);
                let div = eval_all(&s.div, env)?;
                let ndiv = eval_all(&s.ndiv, env)?;
                let mut v = lo;
                while v <= hi {
                    if passes(&v, &div, &ndiv) {
                        out.insert(v.clone());
                    }
                    v = v + T::one();
                }
            }
            SetShape::Format(f) => {
                let div = eval_all(&f.div, env)?;
                let ndiv = eval_all(&f.ndiv, env)?;
                let excluded: BTreeSet<T> =
                    f.exclude.iter().map(|x| x.value.eval(env)).collect::<Result<_, _>>()?;
                let mut scope = env.clone();
                enumerate(&f.indices, &mut scope, &mut |sc| {
                    if let Some(r) = &f.residue {
                        let m = r.modulus.eval(sc)?;
                        let c = r.combo.eval(sc)?;
                        if m.is_zero() || !c.mod_floor(&m).is_zero() {
                            return Ok(());
                        }
                    }
                    let v = f.expr.eval(sc)?;
                    if passes(&v, &div, &ndiv) && !excluded.contains(&v) {
                        out.insert(v);
                    }
                    Ok(())
                })?;
            }
        }
        Ok(out.into_iter().collect())
    }
}

fn eval_all<T: Scalar>(xs: &[SymExpr<T>], env: &Bindings<T>) -> Result<Vec<T>, EvalError> {
    xs.iter().map(|x| x.eval(env)).collect()
}

fn passes<T: Scalar>(v: &T, div: &[T], ndiv: &[T]) -> bool {
    let divides = |d: &T| if d.is_zero() { v.is_zero() } else { v.mod_floor(d).is_zero() };
    div.iter().all(divides) && !ndiv.iter().any(divides)
}

/// Visit every index tuple in range, binding indices into `scope`.
pub(crate) fn enumerate<T: Scalar>(
    indices: &[IndexVar<T>],
    scope: &mut Bindings<T>,
    f: &mut dyn FnMut(&Bindings<T>) -> Result<(), EvalError>,
) -> Result<(), EvalError> {
    let Some((first, rest)) = indices.split_first() else {
        return f(scope);
    };
    let (lo, hi) = (first.lower.eval(scope)?, first.upper.eval(scope)?);
    let mut v = lo;
    while v <= hi {
        scope.insert(first.name.clone(), v.clone());
        enumerate(rest, scope, f)?;
        v = v + T::one();
    }
    scope.remove(&first.name);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColorClass<T: Scalar> {
    pub name: String,
    pub members: Vec<SymbolicSet<T>>,
}

impl<T: Scalar> fmt::Display for SymbolicSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            SetShape::Interval(s) => {
                write!(f, "{} = [{}, {}]", self.name, s.lower, s.upper)?;
                for d in &s.div {
                    write!(f, " & ({d} | v)")?;
                }
                for d in &s.ndiv {
                    write!(f, " & ({d} !| v)")?;
                }
                Ok(())
            }
            SetShape::Format(s) => {
                write!(f, "{} = {{ {} :", self.name, s.expr)?;
                for (k, v) in s.indices.iter().enumerate() {
                    let sep = if k == 0 { " " } else { ", " };
                    write!(f, "{sep}{} <= {} <= {}", v.lower, v.name, v.upper)?;
                }
                f.write_str(" }")
            }
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

    fn env(pairs: &[(&str, i64)]) -> Bindings<i64> {
        pairs.iter().map(|(k, v)| (Symbol::new(k), *v)).collect()
    }

    #[test]
    fn interval_with_filters() {
        let s = SymbolicSet::interval("S", IntervalSet::new(e("1"), e("100")).div(e("4")).ndiv(e("6")));
        assert_eq!(s.instantiate(&Bindings::new()).unwrap().len(), 17);
    }

    #[test]
    fn empty_interval() {
        let s = SymbolicSet::interval("S", IntervalSet::new(e("a + 1"), e("a")));
        assert!(s.instantiate(&env(&[("a", 3)])).unwrap().is_empty());
    }

    #[test]
    fn blue_blocks_at_small_parameters() {
        let b1 = SymbolicSet::interval("B1", IntervalSet::new(e("1"), e("b^2*a")).div(e("b")).ndiv(e("b^2")));
        let got = b1.instantiate(&env(&[("a", 4), ("b", 3)])).unwrap();
        assert_eq!(got, vec![3, 6, 12, 15, 21, 24, 30, 33]);
    }

    #[test]
    fn format_enumeration_with_dependent_bounds() {
        let s = SymbolicSet::format(
            "T",
            FormatSet::new(e("a*i + j")).index("i", e("0"), e("m - 1")).index("j", e("1"), e("a")),
        );
        assert_eq!(s.instantiate(&env(&[("a", 3), ("m", 4)])).unwrap().len(), 12);
        let t = SymbolicSet::format(
            "U",
            FormatSet::new(e("i*a^3 + j*a^2")).index("i", e("0"), e("a - 1")).index("j", e("i + 1"), e("a - 1")),
        );
        assert_eq!(t.instantiate(&env(&[("a", 7)])).unwrap().len(), 21);
    }
}
