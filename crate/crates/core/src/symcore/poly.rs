//! Expanded polynomial normal form over integer-valued atoms.
//!
//! An atom is a symbol or an opaque floor/lcm node whose arguments are
//! themselves in normal form. Coefficients are exact rationals so that
//! quotients such as `a(a+1)/2` stay representable; whether a polynomial is
//! integer-valued is a separate question answered by [`Poly::is_integer_valued`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, One, Signed, Zero};

use super::expr::{Bindings, EvalError, SymExpr, Symbol};
use crate::scalar::Scalar;

pub type Coeff<T> = Ratio<T>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Atom<T: Scalar> {
    Sym(Symbol),
    Floor(Poly<T>, Poly<T>),
    Lcm(Vec<Poly<T>>),
}

impl<T: Scalar> Atom<T> {
    pub fn to_expr(&self) -> SymExpr<T> {
        match self {
            Atom::Sym(s) => SymExpr::symbol(s.clone()),
            Atom::Floor(n, d) => SymExpr::floor_div(n.to_expr(), d.to_expr()),
            Atom::Lcm(xs) => SymExpr::lcm(xs.iter().map(Poly::to_expr).collect()),
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self {
            Atom::Sym(s) => Some(s),
            _ => None,
        }
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Atom::Sym(s) => {
                out.insert(s.clone());
            }
            Atom::Floor(n, d) => {
                n.collect_symbols(out);
                d.collect_symbols(out);
            }
            Atom::Lcm(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
        }
    }

    pub fn eval(&self, env: &Bindings<T>) -> Result<Ratio<T>, EvalError> {
        match self {
            Atom::Sym(s) => env
                .get(s)
                .map(|v| Ratio::from_integer(v.clone()))
                .ok_or_else(|| EvalError::Unbound(s.clone())),
            Atom::Floor(n, d) => {
                let d = d.eval(env)?;
                if d.is_zero() {
                    return Err(EvalError::DivisionUndefined);
                }
                Ok((n.eval(env)? / d).floor())
            }
            Atom::Lcm(xs) => {
                let mut acc = T::one();
                for x in xs {
                    let v = x.eval(env)?;
                    if !v.is_integer() {
                        return Err(EvalError::NotInteger);
                    }
                    acc = acc.lcm(&v.to_integer());
                }
                Ok(Ratio::from_integer(acc))
            }
        }
    }
}

/// Product of atom powers, ordered by total degree and then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial<T: Scalar> {
    degree: u32,
    factors: Vec<(Atom<T>, u32)>,
}

impl<T: Scalar> Monomial<T> {
    pub fn one() -> Self {
        Monomial { degree: 0, factors: Vec::new() }
    }

    pub fn atom(a: Atom<T>, exp: u32) -> Self {
        if exp == 0 {
            return Self::one();
        }
        Monomial { degree: exp, factors: vec![(a, exp)] }
    }

    fn from_map(map: BTreeMap<Atom<T>, u32>) -> Self {
        let factors: Vec<_> = map.into_iter().filter(|(_, e)| *e > 0).collect();
        let degree = factors.iter().map(|(_, e)| e).sum();
        Monomial { degree, factors }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn factors(&self) -> &[(Atom<T>, u32)] {
        &self.factors
    }

    pub fn exponent_of(&self, a: &Atom<T>) -> u32 {
        self.factors.iter().find(|(b, _)| b == a).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut map: BTreeMap<Atom<T>, u32> = self.factors.iter().cloned().collect();
        for (a, e) in &other.factors {
            *map.entry(a.clone()).or_insert(0) += e;
        }
        Self::from_map(map)
    }

    pub fn divides(&self, other: &Self) -> bool {
        self.factors.iter().all(|(a, e)| other.exponent_of(a) >= *e)
    }

    /// `other / self`, assuming `self.divides(other)`.
    pub fn quotient_of(&self, other: &Self) -> Self {
        let mut map: BTreeMap<Atom<T>, u32> = other.factors.iter().cloned().collect();
        for (a, e) in &self.factors {
            if let Some(x) = map.get_mut(a) {
                *x -= e;
            }
        }
        Self::from_map(map)
    }

    /// Remove `atom` entirely, returning its exponent.
    fn split_off(&self, atom: &Atom<T>) -> (u32, Self) {
        let e = self.exponent_of(atom);
        let map = self.factors.iter().filter(|(b, _)| b != atom).cloned().collect();
        (e, Self::from_map(map))
    }

    pub fn to_expr(&self) -> SymExpr<T> {
        SymExpr::mul_all(self.factors.iter().map(|(a, e)| a.to_expr().pow(*e)).collect())
    }

    fn eval(&self, env: &Bindings<T>) -> Result<Ratio<T>, EvalError> {
        let mut acc = Ratio::one();
        for (a, e) in &self.factors {
            let v = a.eval(env)?;
            for _ in 0..*e {
                acc = acc.checked_mul(&v).ok_or(EvalError::Overflow)?;
            }
        }
        Ok(acc)
    }
}

/// Sum of rational multiples of monomials; zero coefficients never stored.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Poly<T: Scalar> {
    terms: BTreeMap<Monomial<T>, Ratio<T>>,
}

impl<T: Scalar> Default for Poly<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Scalar> Poly<T> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(Ratio::one())
    }

    pub fn constant(c: Ratio<T>) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn int(c: T) -> Self {
        Self::constant(Ratio::from_integer(c))
    }

    pub fn of(c: i64) -> Self {
        Self::int(T::of(c))
    }

    pub fn term(m: Monomial<T>, c: Ratio<T>) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn atom(a: Atom<T>) -> Self {
        Self::term(Monomial::atom(a, 1), Ratio::one())
    }

    pub fn symbol(s: &Symbol) -> Self {
        Self::atom(Atom::Sym(s.clone()))
    }

    pub fn sym(name: &str) -> Self {
        Self::symbol(&Symbol::new(name))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial<T>, &Ratio<T>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Ratio<T>> {
        match self.terms.len() {
            0 => Some(Ratio::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<T> {
        self.as_constant().filter(|c| c.is_integer()).map(|c| c.to_integer())
    }

    pub fn constant_term(&self) -> Ratio<T> {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Ratio::zero)
    }

    /// The single term, if there is exactly one.
    pub fn as_term(&self) -> Option<(&Monomial<T>, &Ratio<T>)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Highest term in the canonical order.
    pub fn leading_term(&self) -> Option<(&Monomial<T>, &Ratio<T>)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Monomial<T>, c: Ratio<T>) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &Ratio<T>) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, k)| (m.clone(), k.clone() * c.clone())).collect() }
    }

    pub fn mul_term(&self, m: &Monomial<T>, c: &Ratio<T>) -> Self {
        let mut out = Self::zero();
        for (n, k) in &self.terms {
            out.add_term(n.mul(m), k.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Top-level atoms.
    pub fn atoms(&self) -> BTreeSet<Atom<T>> {
        self.terms.keys().flat_map(|m| m.factors.iter().map(|(a, _)| a.clone())).collect()
    }

    /// Every symbol, including those nested inside floor and lcm atoms.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        for m in self.terms.keys() {
            for (a, _) in &m.factors {
                a.collect_symbols(out);
            }
        }
    }

    pub fn is_pure(&self) -> bool {
        self.atoms().iter().all(|a| matches!(a, Atom::Sym(_)))
    }

    pub fn degree_in(&self, a: &Atom<T>) -> u32 {
        self.terms.keys().map(|m| m.exponent_of(a)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Coefficients with respect to powers of `a`.
    pub fn coeffs_in(&self, a: &Atom<T>) -> BTreeMap<u32, Poly<T>> {
        let mut out: BTreeMap<u32, Poly<T>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(a);
            out.entry(e).or_default().add_term(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Replace a top-level atom by a polynomial.
    pub fn subst_atom(&self, a: &Atom<T>, by: &Poly<T>) -> Poly<T> {
        let mut out = Self::zero();
        let mut powers: Vec<Poly<T>> = vec![Self::one()];
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(a);
            while powers.len() <= e as usize {
                let next = powers.last().unwrap() * by;
                powers.push(next);
            }
            for (n, k) in &powers[e as usize].terms {
                out.add_term(n.mul(&rest), k.clone() * c.clone());
            }
        }
        out
    }

    pub fn subst_symbol(&self, s: &Symbol, by: &Poly<T>) -> Poly<T> {
        self.subst_atom(&Atom::Sym(s.clone()), by)
    }

    pub fn eval(&self, env: &Bindings<T>) -> Result<Ratio<T>, EvalError> {
        let mut acc = Ratio::zero();
        for (m, c) in &self.terms {
            let t = m.eval(env)?.checked_mul(c).ok_or(EvalError::Overflow)?;
            acc = acc.checked_add(&t).ok_or(EvalError::Overflow)?;
        }
        Ok(acc)
    }

    pub fn eval_integer(&self, env: &Bindings<T>) -> Result<T, EvalError> {
        let v = self.eval(env)?;
        if v.is_integer() {
            Ok(v.to_integer())
        } else {
            Err(EvalError::NotInteger)
        }
    }

    /// Evaluate with every top-level atom mapped to an integer.
    pub fn eval_atoms(&self, values: &BTreeMap<Atom<T>, T>) -> Option<Ratio<T>> {
        let mut acc: Ratio<T> = Ratio::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (a, e) in &m.factors {
                let v = Ratio::from_integer(values.get(a)?.clone());
                for _ in 0..*e {
                    t = t.checked_mul(&v)?;
                }
            }
            acc = acc.checked_add(&t)?;
        }
        Some(acc)
    }

    /// True iff the value is an integer whenever every atom takes an integer value.
    ///
    /// A polynomial of degree at most `d_i` in each variable is integer-valued
    /// on the whole lattice iff it is on the box `[0, d_1] x ... x [0, d_k]`.
    pub fn is_integer_valued(&self) -> bool {
        if self.terms.values().all(|c| c.is_integer()) {
            return true;
        }
        let atoms: Vec<Atom<T>> = self.atoms().into_iter().collect();
        let degrees: Vec<u32> = atoms.iter().map(|a| self.degree_in(a)).collect();
        let mut point = vec![0u32; atoms.len()];
        loop {
            let values: BTreeMap<Atom<T>, T> = atoms
                .iter()
                .zip(&point)
                .map(|(a, v)| (a.clone(), T::of(*v as i64)))
                .collect();
            match self.eval_atoms(&values) {
                Some(v) if v.is_integer() => {}
                _ => return false,
            }
            let mut i = 0;
            loop {
                if i == point.len() {
                    return true;
                }
                if point[i] < degrees[i] {
                    point[i] += 1;
                    break;
                }
                point[i] = 0;
                i += 1;
            }
        }
    }

    /// Least common multiple of coefficient denominators.
    pub fn denominator(&self) -> T {
        self.terms.values().fold(T::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Gcd of the numerators once denominators are cleared; sign follows the leading term.
    pub fn integer_content(&self) -> T {
        let d = Ratio::from_integer(self.denominator());
        let g = self
            .terms
            .values()
            .fold(T::zero(), |acc, c| acc.gcd(&(c.clone() * d.clone()).to_integer()));
        if g.is_zero() {
            T::one()
        } else {
            g
        }
    }

    /// Split into the part divisible by `m` (divided by `c*m`) and the rest.
    pub fn div_by_term(&self, m: &Monomial<T>, c: &Ratio<T>) -> (Poly<T>, Poly<T>) {
        let mut q = Self::zero();
        let mut r = Self::zero();
        let inv = c.recip();
        for (n, k) in &self.terms {
            if m.divides(n) {
                q.add_term(m.quotient_of(n), k.clone() * inv.clone());
            } else {
                r.add_term(n.clone(), k.clone());
            }
        }
        (q, r)
    }

    /// Exact quotient `self / d` when `d` divides `self` term-wise over the rationals.
    pub fn div_exact(&self, d: &Poly<T>) -> Option<Poly<T>> {
        if let Some((m, c)) = d.as_term() {
            let (q, r) = self.div_by_term(m, c);
            return r.is_zero().then_some(q);
        }
        let (q, r) = self.divrem(d)?;
        r.is_zero().then_some(q)
    }

    /// Univariate division with remainder in the single atom shared by both.
    pub fn divrem(&self, d: &Poly<T>) -> Option<(Poly<T>, Poly<T>)> {
        let atoms: BTreeSet<Atom<T>> = self.atoms().union(&d.atoms()).cloned().collect();
        if atoms.len() != 1 || d.is_zero() {
            return None;
        }
        let x = atoms.into_iter().next().unwrap();
        let dd = d.degree_in(&x);
        let lc = d.coeffs_in(&x).get(&dd)?.as_constant()?;
        let mut r = self.clone();
        let mut q = Self::zero();
        while !r.is_zero() && r.degree_in(&x) >= dd {
            let rd = r.degree_in(&x);
            let rc = r.coeffs_in(&x).get(&rd)?.as_constant()?;
            let t = Monomial::atom(x.clone(), rd - dd);
            let k = rc / lc.clone();
            q.add_term(t.clone(), k.clone());
            r = &r - &d.mul_term(&t, &k);
        }
        Some((q, r))
    }

    /// `self = (s - r) * q + self(s = r)`.
    pub fn divide_linear(&self, s: &Symbol, r: &Ratio<T>) -> (Poly<T>, Poly<T>) {
        let a = Atom::Sym(s.clone());
        let coeffs = self.coeffs_in(&a);
        let top = coeffs.keys().next_back().copied().unwrap_or(0);
        let x = Poly::symbol(s);
        let mut q = Self::zero();
        let mut carry = Self::zero();
        for e in (1..=top).rev() {
            carry = &carry.scale(r) + coeffs.get(&e).unwrap_or(&Self::zero());
            q = &q + &(&carry * &x.pow(e - 1));
        }
        let rem = self.subst_atom(&a, &Self::constant(r.clone()));
        (q, rem)
    }

    pub fn to_expr(&self) -> SymExpr<T> {
        let den = self.denominator();
        if !den.is_one() {
            let scaled = self.scale(&Ratio::from_integer(den.clone()));
            return SymExpr::floor_div(scaled.to_expr(), SymExpr::int(den));
        }
        let terms: Vec<SymExpr<T>> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| {
                let c = c.to_integer();
                if m.is_one() {
                    SymExpr::int(c)
                } else if c.is_one() {
                    m.to_expr()
                } else {
                    SymExpr::mul_all(vec![SymExpr::int(c), m.to_expr()])
                }
            })
            .collect();
        SymExpr::add_all(terms)
    }

    /// Sign of the leading coefficient.
    pub fn leading_sign(&self) -> i32 {
        match self.leading_term() {
            Some((_, c)) if c.is_positive() => 1,
            Some(_) => -1,
            None => 0,
        }
    }
}

impl<T: Scalar> fmt::Display for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl<T: Scalar> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<T: Scalar> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<T: Scalar> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (n, k) in &rhs.terms {
                out.add_term(m.mul(n), c.clone() * k.clone());
            }
        }
        out
    }
}

impl<T: Scalar> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        self.scale(&-Ratio::one())
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl<T: Scalar> $tr for Poly<T> {
            type Output = Poly<T>;
            fn $m(self, rhs: Poly<T>) -> Poly<T> {
                $tr::$m(&self, &rhs)
            }
        }
    )*};
}

owned_ops!(Add add, Sub sub, Mul mul);

impl<T: Scalar> Neg for Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        -&self
    }
}

impl<T: Scalar> std::ops::AddAssign for Poly<T> {
    fn add_assign(&mut self, rhs: Poly<T>) {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Poly<i64>;

    fn a() -> P {
        P::sym("a")
    }

    #[test]
    fn expansion_collects_like_terms() {
        let p = &(&P::of(2) * &a()) * &(&a() + &P::of(1));
        let q = &a() * &(&(&a().pow(2) + &(&P::of(3) * &a())) + &P::of(1));
        let r = &(&p + &q) + &(&P::of(4) * &a());
        assert_eq!(r.to_expr().to_string(), "a^3 + 5*a^2 + 7*a");
    }

    #[test]
    fn integer_valued_detects_binomials() {
        let half = Ratio::new(1, 2);
        let tri = (&a() * &(&a() + &P::of(1))).scale(&half);
        assert!(tri.is_integer_valued());
        assert!(!a().scale(&half).is_integer_valued());
    }

    #[test]
    fn linear_division_reconstructs() {
        let p = &(&a().pow(3) + &a().pow(2)) + &P::of(7);
        let s = Symbol::new("a");
        let (q, r) = p.divide_linear(&s, &Ratio::from_integer(2));
        let back = &(&(&a() - &P::of(2)) * &q) + &r;
        assert_eq!(back, p);
        assert_eq!(r.as_integer(), Some(19));
    }

    #[test]
    fn univariate_divrem() {
        let n = &a().pow(2) + &P::of(1);
        let (q, r) = n.divrem(&a().pow(3)).unwrap();
        assert!(q.is_zero());
        assert_eq!(r, n);
        let (q, r) = a().pow(2).divrem(&a()).unwrap();
        assert_eq!(q, a());
        assert!(r.is_zero());
    }

    #[test]
    fn rational_poly_renders_as_floor() {
        let tri = (&a() * &(&a() + &P::of(1))).scale(&Ratio::new(1, 2));
        assert_eq!(tri.to_string(), "floor(a^2 + a, 2)");
    }
}
