use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use super::assume::AssumptionSet;
use super::expr::{Bindings, SymExpr, Symbol};
use super::poly::{Atom, Poly};
use super::simplify::expand;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofOutcome<T: Scalar> {
    Proven,
    Refuted(Bindings<T>),
    Unknown(String),
}

impl<T: Scalar> ProofOutcome<T> {
    pub fn is_proven(&self) -> bool {
        matches!(self, ProofOutcome::Proven)
    }
}

/// Decides `goal >= 0` for every integer point satisfying the assumptions.
pub trait NonnegProver<T: Scalar>: Send + Sync {
    fn prove_nonneg(&self, goals: &[SymExpr<T>], asm: &AssumptionSet<T>) -> ProofOutcome<T>;
}

/// Solver-free prover: shifts every symbol to its lower bound (`s = lb + u`,
/// or `s = 2u + r` for symbols of known parity) and accepts when all
/// coefficients of the shifted polynomial are nonnegative. Refutations come
/// from a bounded scan of the assumption domain.
#[derive(Debug, Clone, Copy, Default)]
pub struct ShiftProver;

impl ShiftProver {
    fn shifted<T: Scalar>(p: &Poly<T>, asm: &AssumptionSet<T>) -> Option<Poly<T>> {
        let mut out = p.clone();
        for s in p.symbols() {
            let lb = asm.lower(&s)?.clone();
            let u = Poly::symbol(&Symbol::new(&format!("__u_{s}")));
            let by = match asm.parity(&s) {
                Some(par) => {
                    let r = T::of(par.residue());
                    let two = T::of(2);
                    let ulb = (lb - r.clone()).div_ceil(&two);
                    &(&u + &Poly::int(ulb)).scale(&Ratio::from_integer(two)) + &Poly::int(r)
                }
                None => &u + &Poly::int(lb),
            };
            out = out.subst_symbol(&s, &by);
        }
        Some(out)
    }

    fn nonneg_coefficients<T: Scalar>(p: &Poly<T>) -> bool {
        p.terms().all(|(_, c)| !c.is_negative())
    }

    fn refute<T: Scalar>(p: &Poly<T>, asm: &AssumptionSet<T>) -> Option<Bindings<T>> {
        let syms = asm.symbols();
        if !p.symbols().is_subset(&syms) {
            return None;
        }
        asm.grid(6).into_iter().find(|env| p.eval(env).is_ok_and(|v| v < Ratio::zero()))
    }

    pub fn prove_one<T: Scalar>(&self, goal: &SymExpr<T>, asm: &AssumptionSet<T>) -> ProofOutcome<T> {
        let p = expand(goal);
        if !p.is_pure() {
            return ProofOutcome::Unknown(format!("`{goal}` contains floor or lcm terms"));
        }
        if let Some(q) = Self::shifted(&p, asm) {
            if Self::nonneg_coefficients(&q) {
                return ProofOutcome::Proven;
            }
        }
        match Self::refute(&p, asm) {
            Some(w) => ProofOutcome::Refuted(w),
            None => ProofOutcome::Unknown(format!("could not decide `{goal}` >= 0")),
        }
    }
}

impl<T: Scalar> NonnegProver<T> for ShiftProver {
    fn prove_nonneg(&self, goals: &[SymExpr<T>], asm: &AssumptionSet<T>) -> ProofOutcome<T> {
        let mut unknown = None;
        for g in goals {
            match self.prove_one(g, asm) {
                ProofOutcome::Proven => {}
                ProofOutcome::Refuted(w) => return ProofOutcome::Refuted(w),
                u @ ProofOutcome::Unknown(_) => {
                    unknown.get_or_insert(u);
                }
            }
        }
        unknown.unwrap_or(ProofOutcome::Proven)
    }
}

/// Prover that never succeeds; useful to observe which rewrites need a guard.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoProver;

impl<T: Scalar> NonnegProver<T> for NoProver {
    fn prove_nonneg(&self, _: &[SymExpr<T>], _: &AssumptionSet<T>) -> ProofOutcome<T> {
        ProofOutcome::Unknown("no prover configured".into())
    }
}

/// Replace every top-level occurrence of a parity-constrained symbol `s` by
/// `2*__t_s + r`.
pub fn parity_reparam<T: Scalar>(p: &Poly<T>, asm: &AssumptionSet<T>) -> Poly<T> {
    let mut out = p.clone();
    let atoms = p.atoms();
    for (s, par) in asm.parities() {
        if !atoms.contains(&Atom::Sym(s.clone())) {
            continue;
        }
        let t = Poly::symbol(&Symbol::new(&format!("__t_{s}")));
        let by = &t.scale(&Ratio::from_integer(T::of(2))) + &Poly::of(par.residue());
        out = out.subst_symbol(s, &by);
    }
    out
}

/// Bindings that send every top-level atom to zero.
pub(crate) fn zero_atoms<T: Scalar>(p: &Poly<T>) -> BTreeMap<Atom<T>, T> {
    p.atoms().into_iter().map(|a| (a, T::zero())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse::parse_expr;

    fn e(s: &str) -> SymExpr<i64> {
        parse_expr(s).unwrap()
    }

    #[test]
    fn shift_proves_cubic_gap() {
        let asm = AssumptionSet::new().at_least("a", 2);
        assert!(ShiftProver.prove_nonneg(&[e("a^3 - a^2 - 1")], &asm).is_proven());
    }

    #[test]
    fn shift_refutes_with_witness() {
        let asm = AssumptionSet::new().at_least("a", 1);
        match ShiftProver.prove_nonneg(&[e("a^3 - a^2 - 1")], &asm) {
            ProofOutcome::Refuted(w) => assert_eq!(w[&Symbol::new("a")], 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parity_tightens_shift() {
        let asm = AssumptionSet::new().at_least("a", 6).odd("a");
        assert!(ShiftProver.prove_nonneg(&[e("a - 7")], &asm).is_proven());
    }
}
