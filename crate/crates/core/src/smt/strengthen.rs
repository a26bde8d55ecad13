//! Rewrites that make nonlinear case problems easier for the solver.
//!
//! Every step either replaces a constraint by an equisatisfiable one over
//! fresh witnesses or adds a consequence of the constraints already present,
//! so an unsatisfiable output means an unsatisfiable input.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::constraint::{CmpOp, Constraint};
use super::encode::Problem;
use crate::scalar::Scalar;
use crate::symcore::{Atom, FloorOutcome, Fresh, Monomial, Poly, ProofOutcome, Simplifier, SymExpr, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rung {
    /// The problem as built.
    Direct,
    /// Divisibility witnesses and definitions substituted into the equations.
    Substituted,
    /// Substitution plus residue expansion and witness bounds.
    Residue,
}

impl Rung {
    pub const ALL: [Rung; 3] = [Rung::Direct, Rung::Substituted, Rung::Residue];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Rounds of substitution followed by residue expansion.
    pub rounds: usize,
    /// Cap on equations added by residue expansion.
    pub max_equations: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { rounds: 4, max_equations: 40 }
    }
}

/// Rewrite `p` for the given rung. Variables in `prefer` are eliminated first
/// when several could be.
pub fn strengthen<T: Scalar>(
    p: &Problem<T>,
    rung: Rung,
    prefer: &[Symbol],
    simp: &Simplifier<'_, T>,
    limits: Limits,
) -> Problem<T> {
    if rung == Rung::Direct {
        return p.clone();
    }
    let mut sys = System::flatten(p, simp);
    if rung == Rung::Residue {
        sys.derive_ranges(false);
        sys.pin_ranged();
        sys.derive_ranges(true);
        sys.emit_ranges();
    }
    sys.substitute(prefer);
    if rung == Rung::Residue {
        let mut budget = limits.max_equations;
        for _ in 0..limits.rounds {
            if !sys.expand_round(&mut budget) {
                break;
            }
            sys.derive_ranges(true);
            sys.emit_ranges();
            sys.substitute(prefer);
        }
    }
    sys.into_problem(p)
}

#[derive(Debug, Clone)]
struct Equation<T: Scalar> {
    poly: Poly<T>,
    /// Defines an eliminated variable; kept in the output but not rewritten.
    definition: bool,
    expanded: bool,
}

#[derive(Debug, Clone)]
struct Range<T: Scalar> {
    lo: Option<Poly<T>>,
    hi: Option<Poly<T>>,
}

impl<T: Scalar> Default for Range<T> {
    fn default() -> Self {
        Range { lo: None, hi: None }
    }
}

struct System<'s, 'a, T: Scalar> {
    simp: &'s Simplifier<'a, T>,
    eqs: Vec<Equation<T>>,
    /// `g >= 0`
    ineqs: Vec<Poly<T>>,
    rest: Vec<Constraint<T>>,
    /// Variables in creation order.
    vars: Vec<Symbol>,
    var_set: BTreeSet<Symbol>,
    eliminated: BTreeSet<Symbol>,
    fresh: Fresh,
    ranges: BTreeMap<Symbol, Range<T>>,
    /// Bounded variables that substitution keeps, so their bounds stay usable.
    pinned: BTreeSet<Symbol>,
    signs: RefCell<BTreeMap<Poly<T>, Option<i32>>>,
}

fn normalize<T: Scalar>(p: Poly<T>) -> Poly<T> {
    let d = p.denominator();
    if d.is_one() {
        p
    } else {
        p.scale(&Ratio::from_integer(d))
    }
}

fn normalize_eq<T: Scalar>(p: Poly<T>) -> Poly<T> {
    let p = normalize(p);
    let g = p.integer_content();
    if g.is_one() {
        p
    } else {
        p.scale(&Ratio::new(T::one(), g))
    }
}

impl<'s, 'a, T: Scalar> System<'s, 'a, T> {
    fn flatten(p: &Problem<T>, simp: &'s Simplifier<'a, T>) -> Self {
        let mut taken: BTreeSet<Symbol> = p.parameters();
        taken.extend(p.vars.iter().cloned());
        for c in &p.constraints {
            taken.extend(c.symbols());
        }
        let mut sys = System {
            simp,
            eqs: Vec::new(),
            ineqs: Vec::new(),
            rest: Vec::new(),
            vars: p.vars.iter().cloned().collect(),
            var_set: p.vars.clone(),
            eliminated: BTreeSet::new(),
            fresh: Fresh::new(taken),
            ranges: BTreeMap::new(),
            pinned: BTreeSet::new(),
            signs: RefCell::new(BTreeMap::new()),
        };
        let conjuncts: Vec<Constraint<T>> =
            p.constraints.iter().flat_map(|c| c.conjuncts()).cloned().collect();
        for c in conjuncts {
            match &c {
                Constraint::Cmp(l, op, r) => {
                    let d = simp.to_poly(&(l.clone() - r.clone()));
                    let one = Poly::one();
                    match op {
                        CmpOp::Eq => sys.push_eq(d),
                        CmpOp::Ge => sys.ineqs.push(normalize(d)),
                        CmpOp::Gt => sys.ineqs.push(normalize(&d - &one)),
                        CmpOp::Le => sys.ineqs.push(normalize(-d)),
                        CmpOp::Lt => sys.ineqs.push(normalize(&(-&d) - &one)),
                        CmpOp::Ne => sys.rest.push(c.clone()),
                    }
                }
                Constraint::Divides(d, e) => {
                    let q = Poly::symbol(&sys.new_var("sq"));
                    let eq = &simp.to_poly(e) - &(&simp.to_poly(d) * &q);
                    sys.push_eq(eq);
                }
                Constraint::NotDivides(d, e) => {
                    let q = Poly::symbol(&sys.new_var("sq"));
                    let rv = sys.new_var("sr");
                    let r = Poly::symbol(&rv);
                    let d = simp.to_poly(d);
                    let eq = &(&simp.to_poly(e) - &(&d * &q)) - &r;
                    sys.push_eq(eq);
                    sys.ineqs.push(&r - &Poly::one());
                    sys.ineqs.push(normalize(&(&d - &Poly::one()) - &r));
                }
                _ => sys.rest.push(c.clone()),
            }
        }
        let opposed: Vec<Poly<T>> =
            sys.ineqs.iter().filter(|g| sys.ineqs.contains(&-*g) && sys.mentions_var(g)).cloned().collect();
        for g in opposed {
            sys.push_eq(g);
        }
        sys.eliminate_floors();
        sys
    }

    fn new_var(&mut self, base: &str) -> Symbol {
        let s = self.fresh.fresh(base);
        self.vars.push(s.clone());
        self.var_set.insert(s.clone());
        s
    }

    fn push_eq(&mut self, p: Poly<T>) {
        let poly = normalize_eq(p);
        let neg = -&poly;
        if !poly.is_zero() && !self.eqs.iter().any(|e| e.poly == poly || e.poly == neg) {
            self.eqs.push(Equation { poly, definition: false, expanded: false });
        }
    }

    fn mentions_var(&self, p: &Poly<T>) -> bool {
        p.symbols().iter().any(|s| self.var_set.contains(s))
    }

    /// Replace each `floor(n, d)` over variables, `d` a positive constant,
    /// by a fresh `f` with `d f <= n <= d f + d - 1`.
    fn eliminate_floors(&mut self) {
        loop {
            let target = self
                .eqs
                .iter()
                .map(|e| &e.poly)
                .chain(self.ineqs.iter())
                .flat_map(|p| p.atoms())
                .find(|a| match a {
                    Atom::Floor(n, d) => {
                        self.mentions_var(n) && d.as_constant().is_some_and(|c| c.is_positive())
                    }
                    _ => false,
                });
            let Some(atom) = target else { return };
            let Atom::Floor(n, d) = &atom else { unreachable!() };
            let f = Poly::symbol(&self.new_var("sf"));
            for e in &mut self.eqs {
                e.poly = normalize_eq(e.poly.subst_atom(&atom, &f));
            }
            for g in &mut self.ineqs {
                *g = normalize(g.subst_atom(&atom, &f));
            }
            let df = d * &f;
            self.ineqs.push(normalize(n - &df));
            self.ineqs.push(normalize(&(&df + d) - &(n + &Poly::one())));
        }
    }

    /// Split into variable monomials and their parameter coefficients.
    fn split(&self, p: &Poly<T>) -> BTreeMap<Monomial<T>, Poly<T>> {
        let mut out: BTreeMap<Monomial<T>, Poly<T>> = BTreeMap::new();
        for (m, c) in p.terms() {
            let (mut vm, mut pm) = (Monomial::one(), Monomial::one());
            for (a, e) in m.factors() {
                let f = Monomial::atom(a.clone(), *e);
                match a {
                    Atom::Sym(s) if self.var_set.contains(s) => vm = vm.mul(&f),
                    _ => pm = pm.mul(&f),
                }
            }
            *out.entry(vm).or_default() += Poly::term(pm, c.clone());
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// `Some(1)` if `c >= 0` under the assumptions, `Some(-1)` if `c <= 0`.
    fn sign(&self, c: &Poly<T>) -> Option<i32> {
        if let Some(k) = c.as_constant() {
            return Some(if k.is_negative() { -1 } else { 1 });
        }
        if let Some(s) = self.signs.borrow().get(c) {
            return *s;
        }
        let asm = self.simp.assumptions();
        let prove = |g: &Poly<T>| matches!(self.simp.prover().prove_nonneg(&[g.to_expr()], asm), ProofOutcome::Proven);
        let s = if prove(c) {
            Some(1)
        } else if prove(&-c) {
            Some(-1)
        } else {
            None
        };
        self.signs.borrow_mut().insert(c.clone(), s);
        s
    }

    /// Interval of `p` from the known variable ranges, linear terms only.
    fn range_of(&self, p: &Poly<T>) -> Range<T> {
        let (mut lo, mut hi) = (Some(Poly::zero()), Some(Poly::zero()));
        let add = |acc: &mut Option<Poly<T>>, t: Option<Poly<T>>| {
            *acc = match (acc.take(), t) {
                (Some(a), Some(b)) => Some(&a + &b),
                _ => None,
            };
        };
        for (vm, c) in self.split(p) {
            if vm.is_one() {
                add(&mut lo, Some(c.clone()));
                add(&mut hi, Some(c));
                continue;
            }
            let v = match vm.factors() {
                [(Atom::Sym(v), 1)] => v,
                _ => return Range::default(),
            };
            let r = self.ranges.get(v).cloned().unwrap_or_default();
            let scaled = |b: Option<Poly<T>>| b.map(|b| &b * &c);
            match self.sign(&c) {
                Some(1) => {
                    add(&mut lo, scaled(r.lo));
                    add(&mut hi, scaled(r.hi));
                }
                Some(_) => {
                    add(&mut lo, scaled(r.hi));
                    add(&mut hi, scaled(r.lo));
                }
                None => return Range::default(),
            }
            if lo.is_none() && hi.is_none() {
                return Range::default();
            }
        }
        Range { lo, hi }
    }

    fn floor_by(&self, n: &Poly<T>, d: &Poly<T>) -> Option<Poly<T>> {
        match self.simp.floor_poly(n, d) {
            FloorOutcome::Simplified(p) if p.is_pure() => Some(p),
            _ => None,
        }
    }

    fn ceil_by(&self, n: &Poly<T>, d: &Poly<T>) -> Option<Poly<T>> {
        self.floor_by(&-n, d).map(|p| -p)
    }

    /// Ranges of variables bounded by a constraint linear in them whose
    /// coefficient has a known sign, or is constant unless `symbolic`. The
    /// first bound found for a side wins.
    fn derive_ranges(&mut self, symbolic: bool) {
        let mut sources: Vec<Poly<T>> = self.ineqs.clone();
        for e in &self.eqs {
            sources.push(e.poly.clone());
            sources.push(-&e.poly);
        }
        for _ in 0..3 {
            let mut changed = false;
            for g in &sources {
                for v in g.symbols().into_iter().filter(|s| self.var_set.contains(s)) {
                    let coeffs = g.coeffs_in(&Atom::Sym(v.clone()));
                    if coeffs.keys().any(|&k| k > 1) {
                        continue;
                    }
                    let Some(c) = coeffs.get(&1).filter(|c| !self.mentions_var(c)) else { continue };
                    if !symbolic && c.as_constant().is_none() {
                        continue;
                    }
                    let rest = coeffs.get(&0).cloned().unwrap_or_default();
                    let cur = self.ranges.get(&v).cloned().unwrap_or_default();
                    // c v + rest >= 0, so |c| v >= -rest when c > 0 and |c| v <= rest when c < 0.
                    let (lower, k) = match self.sign(c) {
                        Some(1) if cur.lo.is_none() => (true, c.clone()),
                        Some(-1) if cur.hi.is_none() => (false, -c),
                        _ => continue,
                    };
                    if k.is_zero() {
                        continue;
                    }
                    let Some(h) = self.range_of(&rest).hi else { continue };
                    let bound = if lower { self.ceil_by(&-&h, &k) } else { self.floor_by(&h, &k) };
                    let bound = bound.or_else(|| {
                        let kc = k.as_constant()?;
                        Some(if lower { (-&h).scale(&kc.recip()) } else { h.scale(&kc.recip()) })
                    });
                    let Some(b) = bound else { continue };
                    let entry = self.ranges.entry(v.clone()).or_default();
                    if lower {
                        entry.lo = Some(b);
                    } else {
                        entry.hi = Some(b);
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn pin_ranged(&mut self) {
        let ranged = self.ranges.iter().filter(|(_, r)| r.lo.is_some() || r.hi.is_some());
        self.pinned.extend(ranged.map(|(v, _)| v.clone()));
    }

    /// Add integer-valued derived bounds as constraints.
    fn emit_ranges(&mut self) {
        let mut extra = Vec::new();
        for (v, r) in &self.ranges {
            let x = Poly::symbol(v);
            if let Some(lo) = r.lo.as_ref().filter(|p| p.denominator().is_one()) {
                extra.push(&x - lo);
            }
            if let Some(hi) = r.hi.as_ref().filter(|p| p.denominator().is_one()) {
                extra.push(hi - &x);
            }
        }
        for g in extra {
            if !self.ineqs.contains(&g) {
                self.ineqs.push(g);
            }
        }
    }

    /// Use equations `±v + rest = 0` to eliminate `v` from the other equations.
    fn substitute(&mut self, prefer: &[Symbol]) {
        loop {
            let order: BTreeMap<&Symbol, usize> = self.vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
            let rank = |v: &Symbol| -> usize {
                if let Some(i) = prefer.iter().position(|p| p == v) {
                    return i;
                }
                1_000_000 + order.get(v).copied().unwrap_or(0)
            };
            let mut best: Option<(usize, usize, Symbol, Poly<T>)> = None;
            for (i, e) in self.eqs.iter().enumerate() {
                if e.definition {
                    continue;
                }
                for v in e.poly.symbols() {
                    if !self.var_set.contains(&v) || self.eliminated.contains(&v) {
                        continue;
                    }
                    // Eliminating a bounded variable would hide its bounds from later steps.
                    if self.pinned.contains(&v) && !prefer.contains(&v) {
                        continue;
                    }
                    let coeffs = e.poly.coeffs_in(&Atom::Sym(v.clone()));
                    if coeffs.keys().any(|&k| k > 1) {
                        continue;
                    }
                    let Some(c) = coeffs.get(&1).and_then(Poly::as_constant) else { continue };
                    if c.abs() != Ratio::one() {
                        continue;
                    }
                    let rest = coeffs.get(&0).cloned().unwrap_or_default();
                    let def = rest.scale(&-c.recip());
                    let r = rank(&v);
                    if best.as_ref().is_none_or(|b| r < b.0) {
                        best = Some((r, i, v, def));
                    }
                }
            }
            let Some((_, i, v, def)) = best else { return };
            self.eqs[i].definition = true;
            self.eliminated.insert(v.clone());
            for e in self.eqs.iter_mut().filter(|e| !e.definition) {
                if e.poly.symbols().contains(&v) {
                    e.poly = normalize_eq(e.poly.subst_symbol(&v, &def));
                    e.expanded = false;
                }
            }
            self.eqs.retain(|e| e.definition || !e.poly.is_zero());
        }
    }

    fn parameters_of(&self, p: &Poly<T>) -> Vec<Symbol> {
        p.symbols().into_iter().filter(|s| !self.var_set.contains(s)).collect()
    }

    /// One residue expansion of every pending equation; false if none was pending.
    fn expand_round(&mut self, budget: &mut usize) -> bool {
        let mut pending: Vec<usize> = (0..self.eqs.len()).filter(|&i| !self.eqs[i].expanded).collect();
        pending.sort_by_key(|&i| self.eqs[i].definition);
        if pending.is_empty() {
            return false;
        }
        for i in pending {
            self.eqs[i].expanded = true;
            let p = self.eqs[i].poly.clone();
            if !self.mentions_var(&p) {
                continue;
            }
            for s in self.parameters_of(&p) {
                for r in [0i64, 1, -1, 2, -2] {
                    if *budget < 2 {
                        return true;
                    }
                    if let Some(new) = self.expand(&p, &s, r) {
                        for q in new {
                            self.push_eq(q);
                        }
                        *budget -= 2;
                    }
                }
            }
        }
        true
    }

    /// From `P = m Q + R = 0` with `m = s - r >= 1`: `R = c R'` with `c`
    /// coprime to `m`, so `R' = m w` and `Q + c w = 0` for a fresh `w`.
    fn expand(&mut self, p: &Poly<T>, s: &Symbol, r: i64) -> Option<Vec<Poly<T>>> {
        let rr = Ratio::from_integer(T::of(r));
        let at = Poly::constant(rr.clone());
        let sa = Atom::Sym(s.clone());
        let split = self.split(p);
        let vanishing = split.iter().any(|(vm, c)| !vm.is_one() && c.subst_atom(&sa, &at).is_zero());
        if !vanishing {
            return None;
        }
        let m = &Poly::symbol(s) - &at;
        if self.sign(&(&m - &Poly::one())) != Some(1) {
            return None;
        }
        let (q, rem) = p.divide_linear(s, &rr);
        if rem.is_zero() {
            return self.mentions_var(&q).then(|| vec![q]);
        }
        // `R' - m w` already: expanding again only renames `w`.
        let restates = q.as_term().is_some_and(|(vm, c)| {
            c.abs().is_one() && matches!(vm.factors(), [(Atom::Sym(v), 1)] if self.var_set.contains(v))
        });
        if restates {
            return None;
        }
        let (c, reduced) = self.strip_coprime(&rem, s, r);
        let w = self.new_var("sw");
        let wp = Poly::symbol(&w);
        let range = self.range_of(&reduced);
        let mut bounds = Range::default();
        if let Some(lo) = range.lo.as_ref().and_then(|l| self.ceil_by(l, &m)) {
            self.ineqs.push(normalize(&wp - &lo));
            bounds.lo = Some(lo);
        }
        if let Some(hi) = range.hi.as_ref().and_then(|h| self.floor_by(h, &m)) {
            self.ineqs.push(normalize(&hi - &wp));
            bounds.hi = Some(hi);
        }
        if bounds.lo.is_some() || bounds.hi.is_some() {
            self.pinned.insert(w.clone());
        }
        self.ranges.insert(w, bounds);
        Some(vec![&reduced - &(&m * &wp), &q + &(&c * &wp)])
    }

    /// Factor `rem = c * reduced` where `c` is provably coprime to `s - r`.
    fn strip_coprime(&self, rem: &Poly<T>, s: &Symbol, r: i64) -> (Poly<T>, Poly<T>) {
        let mut c = Poly::one();
        let mut reduced = rem.clone();
        let g = reduced.integer_content();
        let odd_modulus = self.simp.assumptions().parity(s).map(|p| (p.residue() - r).rem_euclid(2) == 1);
        let mut k = g.clone();
        let two = T::of(2);
        if odd_modulus == Some(true) {
            while !k.is_zero() && k.is_even() {
                k = k / two.clone();
            }
        }
        if k.abs().is_one() {
            c = Poly::int(g.clone());
            reduced = reduced.scale(&Ratio::new(T::one(), g));
        }
        let asm = self.simp.assumptions();
        let mut factors: Vec<Poly<T>> = Vec::new();
        if r == 0 {
            for t in self.parameters_of(&reduced) {
                if &t != s && asm.are_coprime(&t, s) {
                    factors.push(Poly::symbol(&t));
                }
            }
        }
        let x = Poly::symbol(s);
        if r.abs() == 1 {
            factors.push(x.clone());
        }
        for k in [1 - r, -1 - r] {
            if k != 0 {
                factors.push(&x + &Poly::of(k));
            }
        }
        for f in factors {
            for _ in 0..8 {
                match exact_quotient(&reduced, &f, s) {
                    Some(q) if !q.is_zero() => {
                        reduced = q;
                        c = &c * &f;
                    }
                    _ => break,
                }
            }
        }
        (c, reduced)
    }

    fn into_problem(self, p: &Problem<T>) -> Problem<T> {
        let mut out = Problem::new(p.asm.clone());
        out.params = p.params.clone();
        out.vars = self.var_set;
        let zero = SymExpr::zero();
        for e in &self.eqs {
            out.constraints.push(Constraint::cmp(e.poly.to_expr(), CmpOp::Eq, zero.clone()));
        }
        for g in &self.ineqs {
            out.constraints.push(Constraint::cmp(g.to_expr(), CmpOp::Ge, zero.clone()));
        }
        out.constraints.extend(self.rest);
        out
    }
}

/// `p / f` when `f` is a symbol or `s + k` and divides `p` exactly.
fn exact_quotient<T: Scalar>(p: &Poly<T>, f: &Poly<T>, s: &Symbol) -> Option<Poly<T>> {
    if let Some((m, c)) = f.as_term() {
        let (q, r) = p.div_by_term(m, c);
        return r.is_zero().then_some(q);
    }
    // f = s + k: divide by (s - (-k)).
    let k = f.constant_term();
    let (q, r) = p.divide_linear(s, &-k);
    r.is_zero().then_some(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{parse_expr, AssumptionSet, ShiftProver};

    fn e(s: &str) -> SymExpr<i128> {
        parse_expr(s).unwrap()
    }

    fn dump(p: &Problem<i128>) -> String {
        p.constraints.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("\n")
    }

    /// Pairs `w - c1 >= 0`, `c2 - w >= 0` with `c1 > c2`.
    fn has_empty_range(p: &Problem<i128>) -> bool {
        let mut lo: BTreeMap<String, i128> = BTreeMap::new();
        let mut hi: BTreeMap<String, i128> = BTreeMap::new();
        for c in &p.constraints {
            let (l, eq) = match c {
                Constraint::Cmp(l, CmpOp::Ge, _) => (l, false),
                Constraint::Cmp(l, CmpOp::Eq, _) => (l, true),
                _ => continue,
            };
            let poly = crate::symcore::expand(l);
            let syms: Vec<Symbol> = poly.symbols().into_iter().collect();
            let [v] = &syms[..] else { continue };
            let co = poly.coeffs_in(&Atom::Sym(v.clone()));
            if co.keys().any(|&k| k > 1) {
                continue;
            }
            let (Some(a), b) = (co.get(&1).and_then(Poly::as_integer), co.get(&0).map_or(Some(0), Poly::as_integer))
            else {
                continue;
            };
            let Some(b) = b else { continue };
            let a = if eq && a == -1 { 1 } else { a };
            let b = if eq && co.get(&1).and_then(Poly::as_integer) == Some(-1) { -b } else { b };
            if eq && a == 1 {
                let x = lo.entry(v.to_string()).or_insert(i128::MIN);
                *x = (*x).max(-b);
                let x = hi.entry(v.to_string()).or_insert(i128::MAX);
                *x = (*x).min(-b);
            } else if a == 1 {
                let x = lo.entry(v.to_string()).or_insert(i128::MIN);
                *x = (*x).max(-b);
            } else if a == -1 {
                let x = hi.entry(v.to_string()).or_insert(i128::MAX);
                *x = (*x).min(b);
            }
        }
        lo.iter().any(|(v, l)| hi.get(v).is_some_and(|h| l > h))
    }

    #[test]
    fn direct_is_identity() {
        let asm = AssumptionSet::new().at_least("a", 2);
        let simp = Simplifier::new(&asm, &ShiftProver);
        let p = Problem::new(asm.clone()).var("x").constraint(Constraint::Divides(e("a"), e("x")));
        assert_eq!(strengthen(&p, Rung::Direct, &[], &simp, Limits::default()), p);
    }

    #[test]
    fn multiple_of_a_but_not_of_a_squared() {
        // a | x, a^2 ∤ x, and a (x + y) = (a + 1) z with a ∤ z: impossible.
        let asm = AssumptionSet::new().at_least("a", 7).odd("a");
        let simp = Simplifier::new(&asm, &ShiftProver);
        let mut p = Problem::new(asm.clone()).var("x").var("y").var("z");
        for v in ["x", "y", "z"] {
            p = p
                .constraint(Constraint::between(e("1"), e(v), e("a^4 + a^3 - 1")))
                .constraint(Constraint::Divides(e("a"), e(v)))
                .constraint(Constraint::NotDivides(e("a^2"), e(v)));
        }
        p = p.constraint(Constraint::eq(e("a*x + a*y"), e("(a + 1)*z")));
        let prefer = [Symbol::new("x"), Symbol::new("y"), Symbol::new("z")];
        let out = strengthen(&p, Rung::Residue, &prefer, &simp, Limits::default());
        assert!(has_empty_range(&out), "{}", dump(&out));
        let sub = strengthen(&p, Rung::Substituted, &prefer, &simp, Limits::default());
        assert!(!has_empty_range(&sub));
    }

    #[test]
    fn point_ranges_become_equations() {
        let asm = AssumptionSet::new().at_least("a", 7).odd("a");
        let simp = Simplifier::new(&asm, &ShiftProver);
        let p = Problem::new(asm.clone())
            .var("v")
            .constraint(Constraint::between(e("1"), e("v"), e("a^4 + a^3 - 1")))
            .constraint(Constraint::Divides(e("a"), e("v")))
            .constraint(Constraint::NotDivides(e("a^2"), e("v")))
            .constraint(Constraint::between(e("a^4"), e("v"), e("a^4")));
        let out = strengthen(&p, Rung::Residue, &[Symbol::new("v")], &simp, Limits::default());
        assert!(has_empty_range(&out), "{}", dump(&out));
    }

    #[test]
    fn floor_of_variable_is_eliminated() {
        // z = a (a + 1) i + a j + k with 2 floor(j, 2) + 1 <= k <= a - 1 is never a multiple of a.
        let asm = AssumptionSet::new().at_least("a", 3);
        let simp = Simplifier::new(&asm, &ShiftProver);
        let p = Problem::new(asm.clone())
            .var("i")
            .var("j")
            .var("k")
            .var("z")
            .constraint(Constraint::between(e("0"), e("i"), e("a^2 - 1")))
            .constraint(Constraint::between(e("0"), e("j"), e("a")))
            .constraint(Constraint::between(e("2*floor(j, 2) + 1"), e("k"), e("a - 1")))
            .constraint(Constraint::eq(e("z"), e("a*(a + 1)*i + a*j + k")))
            .constraint(Constraint::Divides(e("a"), e("z")));
        let out = strengthen(&p, Rung::Residue, &[Symbol::new("z")], &simp, Limits::default());
        assert!(out.constraints.iter().all(|c| !c.to_string().contains("floor")));
        assert!(has_empty_range(&out), "{}", dump(&out));
    }

    #[test]
    fn coprime_content_is_stripped() {
        // a x + b y = b z with gcd(a, b) = 1 forces b | x.
        let asm = AssumptionSet::new().at_least("a", 4).at_least("b", 3).coprime("a", "b");
        let simp = Simplifier::new(&asm, &ShiftProver);
        let p = Problem::new(asm.clone())
            .var("x")
            .var("y")
            .var("z")
            .constraint(Constraint::between(e("1"), e("x"), e("b - 1")))
            .constraint(Constraint::eq(e("a*x + b*y"), e("b*z")));
        let out = strengthen(&p, Rung::Residue, &[], &simp, Limits::default());
        assert!(has_empty_range(&out));
    }

    #[test]
    fn upper_bounds_use_the_upper_end() {
        // z = x + y with x, y in [1, 10] and z >= 15 is satisfiable.
        let asm = AssumptionSet::new().at_least("a", 2);
        let simp = Simplifier::new(&asm, &ShiftProver);
        let p = Problem::new(asm.clone())
            .var("x")
            .var("y")
            .var("z")
            .constraint(Constraint::between(e("1"), e("x"), e("10")))
            .constraint(Constraint::between(e("1"), e("y"), e("10")))
            .constraint(Constraint::cmp(e("z"), CmpOp::Ge, e("15")))
            .constraint(Constraint::eq(e("z"), e("x + y")));
        let out = strengthen(&p, Rung::Residue, &[], &simp, Limits::default());
        assert!(!has_empty_range(&out), "{}", dump(&out));
        assert!(out.constraints.iter().any(|c| c.to_string() == "-z + 20 >= 0"), "{}", dump(&out));
    }

    #[test]
    fn symbolic_coefficients_give_bounds() {
        // b x = y with a b^2 < y <= a^2 b + a b: x in [a b + 1, a^2 + a].
        let asm = AssumptionSet::new().at_least("a", 4).at_least("b", 3);
        let simp = Simplifier::new(&asm, &ShiftProver);
        let p = Problem::new(asm.clone())
            .var("x")
            .var("y")
            .constraint(Constraint::between(e("a*b^2 + 1"), e("y"), e("a^2*b + a*b")))
            .constraint(Constraint::eq(e("b*x"), e("y")));
        let out = strengthen(&p, Rung::Residue, &[], &simp, Limits::default());
        let text = dump(&out);
        assert!(text.contains("a^2 - x + a >= 0"), "{text}");
        assert!(text.contains("-a*b + x - 1 >= 0"), "{text}");
    }
}
