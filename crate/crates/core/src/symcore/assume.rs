use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::expr::{Bindings, EvalError, SymExpr, Symbol};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn residue(self) -> i64 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// Facts about the parameters. Every symbol is implicitly an integer.
///
/// `facts` holds extra side conditions of the form `e >= 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AssumptionSet<T: Scalar> {
    lower: BTreeMap<Symbol, T>,
    parity: BTreeMap<Symbol, Parity>,
    coprime: BTreeSet<(Symbol, Symbol)>,
    facts: Vec<SymExpr<T>>,
}

impl<T: Scalar> Default for AssumptionSet<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> AssumptionSet<T> {
    pub fn new() -> Self {
        AssumptionSet {
            lower: BTreeMap::new(),
            parity: BTreeMap::new(),
            coprime: BTreeSet::new(),
            facts: Vec::new(),
        }
    }

    pub fn at_least(mut self, s: &str, v: i64) -> Self {
        self.set_lower(Symbol::new(s), T::of(v));
        self
    }

    pub fn odd(mut self, s: &str) -> Self {
        self.parity.insert(Symbol::new(s), Parity::Odd);
        self
    }

    pub fn even(mut self, s: &str) -> Self {
        self.parity.insert(Symbol::new(s), Parity::Even);
        self
    }

    pub fn coprime(mut self, a: &str, b: &str) -> Self {
        self.add_coprime(Symbol::new(a), Symbol::new(b));
        self
    }

    pub fn fact(mut self, e: SymExpr<T>) -> Self {
        self.facts.push(e);
        self
    }

    pub fn set_lower(&mut self, s: Symbol, v: T) {
        let slot = self.lower.entry(s).or_insert_with(|| v.clone());
        if v > *slot {
            *slot = v;
        }
    }

    pub fn set_parity(&mut self, s: Symbol, p: Parity) {
        self.parity.insert(s, p);
    }

    pub fn add_coprime(&mut self, a: Symbol, b: Symbol) {
        let pair = if a <= b { (a, b) } else { (b, a) };
        self.coprime.insert(pair);
    }

    pub fn add_fact(&mut self, e: SymExpr<T>) {
        self.facts.push(e);
    }

    pub fn lower(&self, s: &Symbol) -> Option<&T> {
        self.lower.get(s)
    }

    pub fn lower_bounds(&self) -> &BTreeMap<Symbol, T> {
        &self.lower
    }

    pub fn parity(&self, s: &Symbol) -> Option<Parity> {
        self.parity.get(s).copied()
    }

    pub fn parities(&self) -> &BTreeMap<Symbol, Parity> {
        &self.parity
    }

    pub fn coprime_pairs(&self) -> &BTreeSet<(Symbol, Symbol)> {
        &self.coprime
    }

    pub fn are_coprime(&self, a: &Symbol, b: &Symbol) -> bool {
        let pair = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        self.coprime.contains(&pair)
    }

    pub fn facts(&self) -> &[SymExpr<T>] {
        &self.facts
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out: BTreeSet<Symbol> = self.lower.keys().cloned().collect();
        out.extend(self.parity.keys().cloned());
        for (a, b) in &self.coprime {
            out.insert(a.clone());
            out.insert(b.clone());
        }
        for f in &self.facts {
            out.extend(f.symbols());
        }
        out
    }

    /// Check a concrete assignment. Symbols the assignment omits are an error.
    pub fn satisfied_by(&self, env: &Bindings<T>) -> Result<bool, EvalError> {
        for (s, lb) in &self.lower {
            let v = env.get(s).ok_or_else(|| EvalError::Unbound(s.clone()))?;
            if v < lb {
                return Ok(false);
            }
        }
        for (s, p) in &self.parity {
            let v = env.get(s).ok_or_else(|| EvalError::Unbound(s.clone()))?;
            let r = v.mod_floor(&T::of(2));
            if r != T::of(p.residue()) {
                return Ok(false);
            }
        }
        for (a, b) in &self.coprime {
            let x = env.get(a).ok_or_else(|| EvalError::Unbound(a.clone()))?;
            let y = env.get(b).ok_or_else(|| EvalError::Unbound(b.clone()))?;
            if !x.gcd(y).is_one() {
                return Ok(false);
            }
        }
        for f in &self.facts {
            if f.eval(env)? < T::zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Satisfying assignments over a box of `width` values above each lower
    /// bound (or around zero for unbounded symbols), in lexicographic order.
    pub fn grid(&self, width: i64) -> Vec<Bindings<T>> {
        let syms: Vec<Symbol> = self.symbols().into_iter().collect();
        let ranges: Vec<Vec<T>> = syms
            .iter()
            .map(|s| {
                let (lo, hi) = match self.lower.get(s) {
                    Some(lb) => (lb.clone(), lb.clone() + T::of(width)),
                    None => (T::of(-width), T::of(width)),
                };
                let mut out = Vec::new();
                let mut v = lo;
                while v <= hi {
                    out.push(v.clone());
                    v = v + T::one();
                }
                out
            })
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; syms.len()];
        loop {
            let env: Bindings<T> =
                syms.iter().enumerate().map(|(k, s)| (s.clone(), ranges[k][idx[k]].clone())).collect();
            if self.satisfied_by(&env).unwrap_or(false) {
                out.push(env);
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return out;
                }
                idx[k] += 1;
                if idx[k] < ranges[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Some assignment satisfying every assumption, searched in a bounded box.
    pub fn witness(&self) -> Option<Bindings<T>> {
        [4, 8, 16].into_iter().find_map(|w| self.grid(w).into_iter().next())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse::parse_expr;

    #[test]
    fn rejects_violations() {
        let asm = AssumptionSet::<i64>::new().at_least("a", 7).odd("a");
        let env = |v: i64| -> Bindings<i64> { [(Symbol::new("a"), v)].into_iter().collect() };
        assert_eq!(asm.satisfied_by(&env(7)), Ok(true));
        assert_eq!(asm.satisfied_by(&env(8)), Ok(false));
        assert_eq!(asm.satisfied_by(&env(5)), Ok(false));
        assert_eq!(asm.witness(), Some(env(7)));
    }

    #[test]
    fn polynomial_side_facts() {
        let asm = AssumptionSet::<i64>::new()
            .at_least("b", 3)
            .at_least("a", 4)
            .coprime("a", "b")
            .fact(parse_expr("a - b - 1").unwrap())
            .fact(parse_expr("a^2 + a + b - b^2 - b*a - 1").unwrap());
        let w = asm.witness().unwrap();
        assert_eq!(w[&Symbol::new("a")], 4);
        assert_eq!(w[&Symbol::new("b")], 3);
    }

    #[test]
    fn unsatisfiable_set_has_no_witness() {
        let asm = AssumptionSet::<i64>::new().at_least("a", 1).fact(parse_expr("-a").unwrap());
        assert_eq!(asm.witness(), None);
    }
}
