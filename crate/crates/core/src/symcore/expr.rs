use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;


use thiserror::Error;

use crate::scalar::{checked_pow, Scalar};

/// Name of a parameter, index variable, or solver witness.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// Concrete values for some symbols.
pub type Bindings<T> = BTreeMap<Symbol, T>;

/// Supplier of symbol names not used anywhere else in a problem.
#[derive(Debug, Clone, Default)]
pub struct Fresh {
    taken: BTreeSet<Symbol>,
}

impl Fresh {
    pub fn new(taken: impl IntoIterator<Item = Symbol>) -> Self {
        Fresh { taken: taken.into_iter().collect() }
    }

    pub fn reserve(&mut self, s: &Symbol) {
        self.taken.insert(s.clone());
    }

    /// `base` itself if free, else `base_2`, `base_3`, ...
    pub fn fresh(&mut self, base: &str) -> Symbol {
        let mut cand = Symbol::new(base);
        let mut k = 2;
        while self.taken.contains(&cand) {
            cand = Symbol::new(&format!("{base}_{k}"));
            k += 1;
        }
        self.taken.insert(cand.clone());
        cand
    }
}


#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("symbol `{0}` is not bound")]
    Unbound(Symbol),
    #[error("division by zero")]
    DivisionUndefined,
    #[error("integer overflow during evaluation")]
    Overflow,
    #[error("lcm argument is not an integer")]
    NotInteger,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node<T: Scalar> {
    Const(T),
    Sym(Symbol),
    Add(Vec<SymExpr<T>>),
    Mul(Vec<SymExpr<T>>),
    Pow(SymExpr<T>, u32),
    /// Floor of `num / den`, rounding toward negative infinity.
    Floor(SymExpr<T>, SymExpr<T>),
    Lcm(Vec<SymExpr<T>>),
}

/// Immutable integer-valued expression tree. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymExpr<T: Scalar>(Arc<Node<T>>);

impl<T: Scalar> SymExpr<T> {
    pub fn node(&self) -> &Node<T> {
        &self.0
    }

    fn from_node(node: Node<T>) -> Self {
        SymExpr(Arc::new(node))
    }

    pub fn int(v: T) -> Self {
        Self::from_node(Node::Const(v))
    }

    pub fn constant(v: i64) -> Self {
        Self::int(T::of(v))
    }

    pub fn zero() -> Self {
        Self::int(T::zero())
    }

    pub fn one() -> Self {
        Self::int(T::one())
    }

    pub fn sym(name: &str) -> Self {
        Self::from_node(Node::Sym(Symbol::new(name)))
    }

    pub fn symbol(s: Symbol) -> Self {
        Self::from_node(Node::Sym(s))
    }

    pub fn add_all(terms: Vec<SymExpr<T>>) -> Self {
        let mut flat = Vec::with_capacity(terms.len());
        for t in terms {
            match t.node() {
                Node::Add(inner) => flat.extend(inner.iter().cloned()),
                Node::Const(c) if c.is_zero() => {}
                _ => flat.push(t),
            }
        }
        match flat.len() {
            0 => Self::zero(),
            1 => flat.pop().unwrap(),
            _ => Self::from_node(Node::Add(flat)),
        }
    }

    pub fn mul_all(factors: Vec<SymExpr<T>>) -> Self {
        let mut flat = Vec::with_capacity(factors.len());
        for f in factors {
            match f.node() {
                Node::Mul(inner) => flat.extend(inner.iter().cloned()),
                Node::Const(c) if c.is_one() => {}
                _ => flat.push(f),
            }
        }
        match flat.len() {
            0 => Self::one(),
            1 => flat.pop().unwrap(),
            _ => Self::from_node(Node::Mul(flat)),
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        match exp {
            0 => Self::one(),
            1 => self.clone(),
            _ => Self::from_node(Node::Pow(self.clone(), exp)),
        }
    }

    pub fn floor_div(num: SymExpr<T>, den: SymExpr<T>) -> Self {
        Self::from_node(Node::Floor(num, den))
    }

    pub fn lcm(args: Vec<SymExpr<T>>) -> Self {
        Self::from_node(Node::Lcm(args))
    }

    pub fn as_const(&self) -> Option<&T> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Add(xs) | Node::Mul(xs) | Node::Lcm(xs) => {
                for x in xs {
                    x.collect_symbols(out);
                }
            }
            Node::Pow(b, _) => b.collect_symbols(out),
            Node::Floor(n, d) => {
                n.collect_symbols(out);
                d.collect_symbols(out);
            }
        }
    }

    pub fn contains_floor_or_lcm(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => false,
            Node::Floor(..) | Node::Lcm(_) => true,
            Node::Add(xs) | Node::Mul(xs) => xs.iter().any(|x| x.contains_floor_or_lcm()),
            Node::Pow(b, _) => b.contains_floor_or_lcm(),
        }
    }

    /// Evaluate at a full assignment. Floor rounds toward negative infinity.
    pub fn eval(&self, env: &Bindings<T>) -> Result<T, EvalError> {
        match self.node() {
            Node::Const(c) => Ok(c.clone()),
            Node::Sym(s) => env.get(s).cloned().ok_or_else(|| EvalError::Unbound(s.clone())),
            Node::Add(xs) => xs.iter().try_fold(T::zero(), |acc, x| {
                acc.checked_add(&x.eval(env)?).ok_or(EvalError::Overflow)
            }),
            Node::Mul(xs) => xs.iter().try_fold(T::one(), |acc, x| {
                acc.checked_mul(&x.eval(env)?).ok_or(EvalError::Overflow)
            }),
            Node::Pow(b, e) => checked_pow(&b.eval(env)?, *e).ok_or(EvalError::Overflow),
            Node::Floor(n, d) => {
                let d = d.eval(env)?;
                if d.is_zero() {
                    return Err(EvalError::DivisionUndefined);
                }
                Ok(n.eval(env)?.div_floor(&d))
            }
            Node::Lcm(xs) => xs
                .iter()
                .try_fold(T::one(), |acc, x| Ok(acc.lcm(&x.eval(env)?))),
        }
    }

    /// Replace bound symbols by constants and fold constant subtrees.
    pub fn substitute(&self, env: &Bindings<T>) -> Result<SymExpr<T>, EvalError> {
        let out = match self.node() {
            Node::Const(_) => return Ok(self.clone()),
            Node::Sym(s) => match env.get(s) {
                Some(v) => return Ok(Self::int(v.clone())),
                None => return Ok(self.clone()),
            },
            Node::Add(xs) => {
                Self::add_all(xs.iter().map(|x| x.substitute(env)).collect::<Result<_, _>>()?)
            }
            Node::Mul(xs) => {
                Self::mul_all(xs.iter().map(|x| x.substitute(env)).collect::<Result<_, _>>()?)
            }
            Node::Pow(b, e) => b.substitute(env)?.pow(*e),
            Node::Floor(n, d) => {
                let d = d.substitute(env)?;
                if d.as_const().is_some_and(|c| c.is_zero()) {
                    return Err(EvalError::DivisionUndefined);
                }
                Self::floor_div(n.substitute(env)?, d)
            }
            Node::Lcm(xs) => {
                Self::lcm(xs.iter().map(|x| x.substitute(env)).collect::<Result<_, _>>()?)
            }
        };
        if out.symbols().is_empty() {
            Ok(Self::int(out.eval(&Bindings::new())?))
        } else {
            Ok(out)
        }
    }

    /// Replace symbols by expressions.
    pub fn replace(&self, map: &BTreeMap<Symbol, SymExpr<T>>) -> SymExpr<T> {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Sym(s) => map.get(s).cloned().unwrap_or_else(|| self.clone()),
            Node::Add(xs) => Self::add_all(xs.iter().map(|x| x.replace(map)).collect()),
            Node::Mul(xs) => Self::mul_all(xs.iter().map(|x| x.replace(map)).collect()),
            Node::Pow(b, e) => b.replace(map).pow(*e),
            Node::Floor(n, d) => Self::floor_div(n.replace(map), d.replace(map)),
            Node::Lcm(xs) => Self::lcm(xs.iter().map(|x| x.replace(map)).collect()),
        }
    }

    pub fn rename(&self, from: &Symbol, to: &Symbol) -> SymExpr<T> {
        let mut map = BTreeMap::new();
        map.insert(from.clone(), Self::symbol(to.clone()));
        self.replace(&map)
    }

    fn is_negative_term(&self) -> bool {
        match self.node() {
            Node::Const(c) => c.is_negative(),
            Node::Mul(xs) => xs.first().and_then(|x| x.as_const()).is_some_and(|c| c.is_negative()),
            _ => false,
        }
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Add(_) => 1,
            Node::Mul(_) => 2,
            Node::Const(c) if c.is_negative() => 2,
            Node::Pow(..) => 3,
            _ => 4,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }

    fn fmt_mul(xs: &[SymExpr<T>], f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut rest = xs;
        if let Some(c) = xs.first().and_then(|x| x.as_const()) {
            if xs.len() > 1 && c == &-T::one() {
                f.write_str("-")?;
                rest = &xs[1..];
            }
        }
        for (i, x) in rest.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            x.fmt_child(f, 3)?;
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Display for SymExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{c}"),
            Node::Sym(s) => write!(f, "{s}"),
            Node::Add(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i == 0 {
                        x.fmt_child(f, 2)?;
                    } else if x.is_negative_term() {
                        f.write_str(" - ")?;
                        (-x.clone()).fmt_child(f, 2)?;
                    } else {
                        f.write_str(" + ")?;
                        x.fmt_child(f, 2)?;
                    }
                }
                Ok(())
            }
            Node::Mul(xs) => Self::fmt_mul(xs, f),
            Node::Pow(b, e) => {
                b.fmt_child(f, 4)?;
                write!(f, "^{e}")
            }
            Node::Floor(n, d) => write!(f, "floor({n}, {d})"),
            Node::Lcm(xs) => {
                f.write_str("lcm(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl<T: Scalar> fmt::Debug for SymExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymExpr({self})")
    }
}

impl<T: Scalar> From<i64> for SymExpr<T> {
    fn from(v: i64) -> Self {
        SymExpr::constant(v)
    }
}

impl<T: Scalar> Neg for SymExpr<T> {
    type Output = SymExpr<T>;
    fn neg(self) -> SymExpr<T> {
        match self.node() {
            Node::Const(c) => SymExpr::int(-c.clone()),
            Node::Mul(xs) if xs.first().and_then(|x| x.as_const()).is_some() => {
                let mut ys = xs.clone();
                let c = ys[0].as_const().unwrap().clone();
                ys[0] = SymExpr::int(-c);
                SymExpr::mul_all(ys)
            }
            _ => SymExpr::mul_all(vec![SymExpr::int(-T::one()), self]),
        }
    }
}

impl<T: Scalar> Add for SymExpr<T> {
    type Output = SymExpr<T>;
    fn add(self, rhs: SymExpr<T>) -> SymExpr<T> {
        SymExpr::add_all(vec![self, rhs])
    }
}

impl<T: Scalar> Sub for SymExpr<T> {
    type Output = SymExpr<T>;
    fn sub(self, rhs: SymExpr<T>) -> SymExpr<T> {
        SymExpr::add_all(vec![self, -rhs])
    }
}

impl<T: Scalar> Mul for SymExpr<T> {
    type Output = SymExpr<T>;
    fn mul(self, rhs: SymExpr<T>) -> SymExpr<T> {
        SymExpr::mul_all(vec![self, rhs])
    }
}

macro_rules! ref_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl<T: Scalar> $tr<&SymExpr<T>> for &SymExpr<T> {
            type Output = SymExpr<T>;
            fn $m(self, rhs: &SymExpr<T>) -> SymExpr<T> {
                $tr::$m(self.clone(), rhs.clone())
            }
        }
        impl<T: Scalar> $tr<i64> for SymExpr<T> {
            type Output = SymExpr<T>;
            fn $m(self, rhs: i64) -> SymExpr<T> {
                $tr::$m(self, SymExpr::constant(rhs))
            }
        }
    )*};
}

ref_ops!(Add add, Sub sub, Mul mul);
