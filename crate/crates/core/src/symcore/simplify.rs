use num_rational::Ratio;
use num_traits::Signed;

use super::assume::AssumptionSet;
use super::expr::{Bindings, Node, SymExpr};
use super::guard::{parity_reparam, zero_atoms, NonnegProver, ProofOutcome};
use super::poly::{Atom, Poly};
use crate::scalar::Scalar;

/// Expand into normal form without any floor or lcm rewriting.
pub fn expand<T: Scalar>(e: &SymExpr<T>) -> Poly<T> {
    match e.node() {
        Node::Const(c) => Poly::int(c.clone()),
        Node::Sym(s) => Poly::symbol(s),
        Node::Add(xs) => xs.iter().fold(Poly::zero(), |acc, x| &acc + &expand(x)),
        Node::Mul(xs) => xs.iter().fold(Poly::one(), |acc, x| &acc * &expand(x)),
        Node::Pow(b, k) => expand(b).pow(*k),
        Node::Floor(n, d) => Poly::atom(Atom::Floor(expand(n), expand(d))),
        Node::Lcm(xs) => Poly::atom(Atom::Lcm(xs.iter().map(expand).collect())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FloorOutcome<T: Scalar> {
    Simplified(Poly<T>),
    /// A remainder rule matched in shape but neither sign case could be proven.
    GuardUnproven(String),
    Irreducible,
}

/// Assumption-aware simplifier. Guards of the floor rules are discharged by
/// the injected prover.
pub struct Simplifier<'a, T: Scalar> {
    asm: &'a AssumptionSet<T>,
    prover: &'a dyn NonnegProver<T>,
}

impl<'a, T: Scalar> Simplifier<'a, T> {
    pub fn new(asm: &'a AssumptionSet<T>, prover: &'a dyn NonnegProver<T>) -> Self {
        Simplifier { asm, prover }
    }

    pub fn assumptions(&self) -> &AssumptionSet<T> {
        self.asm
    }

    pub fn prover(&self) -> &dyn NonnegProver<T> {
        self.prover
    }

    pub fn simplify(&self, e: &SymExpr<T>) -> SymExpr<T> {
        self.to_poly(e).to_expr()
    }

    pub fn to_poly(&self, e: &SymExpr<T>) -> Poly<T> {
        match e.node() {
            Node::Const(c) => Poly::int(c.clone()),
            Node::Sym(s) => Poly::symbol(s),
            Node::Add(xs) => xs.iter().fold(Poly::zero(), |acc, x| &acc + &self.to_poly(x)),
            Node::Mul(xs) => xs.iter().fold(Poly::one(), |acc, x| &acc * &self.to_poly(x)),
            Node::Pow(b, k) => self.to_poly(b).pow(*k),
            Node::Floor(n, d) => {
                let (n, d) = (self.to_poly(n), self.to_poly(d));
                match self.floor_poly(&n, &d) {
                    FloorOutcome::Simplified(p) => p,
                    _ => Poly::atom(Atom::Floor(n, d)),
                }
            }
            Node::Lcm(xs) => self.lcm_poly(xs.iter().map(|x| self.to_poly(x)).collect()),
        }
    }

    /// Integer-valued once parity facts are applied.
    pub fn is_integral(&self, p: &Poly<T>) -> bool {
        parity_reparam(p, self.asm).is_integer_valued()
    }

    pub fn floor_simplify(&self, num: &SymExpr<T>, den: &SymExpr<T>) -> FloorOutcome<T> {
        self.floor_poly(&self.to_poly(num), &self.to_poly(den))
    }

    pub fn floor_poly(&self, n: &Poly<T>, d: &Poly<T>) -> FloorOutcome<T> {
        if d.is_zero() {
            return FloorOutcome::Irreducible;
        }
        if n.is_zero() {
            return FloorOutcome::Simplified(Poly::zero());
        }
        if let Some(c) = d.as_constant() {
            return self.floor_by_constant(n, c);
        }
        if let Some(q) = n.div_exact(d) {
            if self.is_integral(&q) {
                return FloorOutcome::Simplified(q);
            }
        }
        let (q, r) = match d.as_term() {
            Some((m, c)) => n.div_by_term(m, c),
            None => match n.divrem(d) {
                Some(qr) => qr,
                None => return FloorOutcome::Irreducible,
            },
        };
        if !self.is_integral(&q) || !self.is_integral(&r) {
            return FloorOutcome::Irreducible;
        }
        if r.is_zero() {
            return FloorOutcome::Simplified(q);
        }
        match self.remainder_floor(&r, d) {
            Ok(k) => FloorOutcome::Simplified(&q + &Poly::of(k)),
            Err(msg) => FloorOutcome::GuardUnproven(msg),
        }
    }

    fn floor_by_constant(&self, n: &Poly<T>, c: Ratio<T>) -> FloorOutcome<T> {
        let (n, c) = if c.is_negative() { (-n, -c) } else { (n.clone(), c) };
        let q = n.scale(&c.recip());
        if self.is_integral(&q) {
            return FloorOutcome::Simplified(q);
        }
        if !c.is_integer() || !self.is_integral(&n) {
            return FloorOutcome::Irreducible;
        }
        // Constant residue: n mod c takes one value everywhere.
        let re = parity_reparam(&n, self.asm);
        let Some(v0) = re.eval_atoms(&zero_atoms(&re)) else {
            return FloorOutcome::Irreducible;
        };
        if !v0.is_integer() {
            return FloorOutcome::Irreducible;
        }
        let r0 = v0.to_integer().mod_floor(&c.to_integer());
        let q = (&n - &Poly::int(r0)).scale(&c.recip());
        if self.is_integral(&q) {
            FloorOutcome::Simplified(q)
        } else {
            FloorOutcome::Irreducible
        }
    }

    /// Decide `floor(r / d)` as 0 or -1 when `r` is provably small against `d`.
    fn remainder_floor(&self, r: &Poly<T>, d: &Poly<T>) -> Result<i64, String> {
        let (re, de) = (r.to_expr(), d.to_expr());
        let one = || SymExpr::one();
        let pos = |k: i64| -> Vec<SymExpr<T>> {
            if k == 0 {
                vec![&de - &one(), re.clone(), &(&de - &re) - &one()]
            } else {
                vec![&de - &one(), &re + &de, -re.clone() - one()]
            }
        };
        let neg = |k: i64| -> Vec<SymExpr<T>> {
            if k == 0 {
                vec![-de.clone() - one(), -re.clone(), &(&re - &de) - &one()]
            } else {
                vec![-de.clone() - one(), &re - &one(), -de.clone() - re.clone()]
            }
        };
        let same_sign = self
            .asm
            .witness()
            .and_then(|w| Some((r.eval(&w).ok()?, d.eval(&w).ok()?)))
            .map_or(true, |(rv, dv)| !(rv * dv).is_negative());
        let order = if same_sign { [0, -1] } else { [-1, 0] };
        for k in order {
            for goals in [pos(k), neg(k)] {
                if self.prover.prove_nonneg(&goals, self.asm).is_proven() {
                    return Ok(k);
                }
            }
        }
        Err(format!("floor({r}, {d}): remainder bound not proven"))
    }

    fn lcm_poly(&self, args: Vec<Poly<T>>) -> Poly<T> {
        if args.iter().any(Poly::is_zero) {
            return Poly::zero();
        }
        if let Some(vals) = args.iter().map(Poly::as_integer).collect::<Option<Vec<T>>>() {
            return Poly::int(vals.iter().fold(T::one(), |acc, v| acc.lcm(v)));
        }
        let mut kept: Vec<Poly<T>> = Vec::new();
        for a in args {
            if a.as_integer().is_some_and(|v| v.abs().is_one()) || kept.contains(&a) {
                continue;
            }
            kept.push(a);
        }
        let divides = |x: &Poly<T>, y: &Poly<T>| -> bool {
            x != y && y.div_exact(x).is_some_and(|q| self.is_integral(&q))
        };
        let mut reduced: Vec<Poly<T>> = Vec::new();
        for (i, x) in kept.iter().enumerate() {
            let absorbed = kept.iter().enumerate().any(|(j, y)| j != i && divides(x, y) && !(divides(y, x) && j > i));
            if !absorbed {
                reduced.push(x.clone());
            }
        }
        reduced.sort();
        match reduced.len() {
            0 => Poly::one(),
            1 => {
                let x = reduced.pop().unwrap();
                let nonneg = self.prover.prove_nonneg(&[x.to_expr()], self.asm).is_proven();
                if nonneg {
                    x
                } else {
                    Poly::atom(Atom::Lcm(vec![x]))
                }
            }
            _ => Poly::atom(Atom::Lcm(reduced)),
        }
    }

    /// Equality check: syntactic after simplification, else two-sided nonnegativity.
    pub fn prove_eq(&self, e1: &SymExpr<T>, e2: &SymExpr<T>) -> ProofOutcome<T> {
        let diff = self.to_poly(&(e1 - e2));
        if diff.is_zero() {
            return ProofOutcome::Proven;
        }
        if let Some(w) = self.asm.grid(6).into_iter().find(|env| {
            matches!((e1.eval(env), e2.eval(env)), (Ok(x), Ok(y)) if x != y)
        }) {
            return ProofOutcome::Refuted(w);
        }
        let d = diff.to_expr();
        match self.prover.prove_nonneg(&[d.clone(), -d], self.asm) {
            ProofOutcome::Refuted(w) => {
                if matches!((e1.eval(&w), e2.eval(&w)), (Ok(x), Ok(y)) if x != y) {
                    ProofOutcome::Refuted(w)
                } else {
                    ProofOutcome::Unknown("solver counterexample did not replay".into())
                }
            }
            other => other,
        }
    }
}

/// Evaluate both sides at a binding; convenience for tests and oracles.
pub fn agree_at<T: Scalar>(e1: &SymExpr<T>, e2: &SymExpr<T>, env: &Bindings<T>) -> bool {
    matches!((e1.eval(env), e2.eval(env)), (Ok(x), Ok(y)) if x == y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::guard::{NoProver, ShiftProver};
    use crate::symcore::parse::parse_expr;

    fn e(s: &str) -> SymExpr<i128> {
        parse_expr(s).unwrap()
    }

    fn simp(src: &str, asm: &AssumptionSet<i128>) -> String {
        Simplifier::new(asm, &ShiftProver).simplify(&e(src)).to_string()
    }

    #[test]
    fn collects_polynomials() {
        let asm = AssumptionSet::new();
        assert_eq!(simp("2*a*(a+1) + a*(a^2+3*a+1) + 4*a", &asm), "a^3 + 5*a^2 + 7*a");
        assert_eq!(simp("x + 0", &asm), "x");
        assert_eq!(simp("(a+1)*(a-1)", &asm), "a^2 - 1");
    }

    #[test]
    fn floor_rules() {
        let a1 = AssumptionSet::new().at_least("a", 1);
        let a2 = AssumptionSet::new().at_least("a", 2);
        assert_eq!(simp("floor(-1, a)", &a1), "-1");
        assert_eq!(simp("floor(a^2 + 1, a^3)", &a2), "0");
        assert_eq!(simp("floor(a^2, a)", &AssumptionSet::new()), "a");
        assert_eq!(simp("floor(a + 1, a)", &a2), "1");
        assert_eq!(simp("floor(b^2*a, b)", &AssumptionSet::new()), "a*b");
    }

    #[test]
    fn floor_rule_needs_its_guard() {
        let a1 = AssumptionSet::new().at_least("a", 1);
        let s = Simplifier::new(&a1, &ShiftProver);
        let out = s.floor_simplify(&e("a^2 + 1"), &e("a^3"));
        assert!(matches!(out, FloorOutcome::GuardUnproven(_)), "{out:?}");
        let none = Simplifier::new(&a1, &NoProver);
        assert!(matches!(none.floor_simplify(&e("-1"), &e("a")), FloorOutcome::GuardUnproven(_)));
    }

    #[test]
    fn parity_resolves_halves() {
        let asm = AssumptionSet::new().at_least("a", 7).odd("a");
        assert_eq!(simp("floor(a - 1, 2) + floor(a + 1, 2)", &asm), "a");
        assert_eq!(simp("floor(a, 2)", &asm), "floor(a - 1, 2)");
        assert_eq!(simp("floor(a^2, 2)", &asm), "floor(a^2 - 1, 2)");
    }

    #[test]
    fn lcm_nested_divisor() {
        let asm = AssumptionSet::new().at_least("b", 1);
        assert_eq!(simp("lcm(b, b^2)", &asm), "b^2");
        assert_eq!(simp("lcm(a, b)", &asm), "lcm(a, b)");
        assert_eq!(simp("lcm(4, 6)", &asm), "12");
    }

    #[test]
    fn prove_eq_examples() {
        let asm = AssumptionSet::new().at_least("a", 2);
        let s = Simplifier::new(&asm, &ShiftProver);
        assert!(s.prove_eq(&e("b*a"), &e("a*(b-1) + a")).is_proven());
        match s.prove_eq(&e("a^2"), &e("a^3")) {
            ProofOutcome::Refuted(w) => assert_eq!(w[&crate::Symbol::new("a")], 2),
            other => panic!("{other:?}"),
        }
    }
}
