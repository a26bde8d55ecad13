use std::collections::BTreeMap;

use super::set::{SetShape, SymbolicSet};
use crate::scalar::Scalar;
use crate::smt::Constraint;
use crate::symcore::{Fresh, SymExpr, Symbol};

#[derive(Debug, Clone, PartialEq)]
pub struct Membership<T: Scalar> {
    pub constraint: Constraint<T>,
    /// Fresh variables introduced (renamed index variables).
    pub vars: Vec<Symbol>,
    /// `v` expressed through the fresh indices, for format sets.
    pub value: Option<SymExpr<T>>,
}

/// Constraint stating `v` lies in `set`. Index variables get fresh names
/// derived from `tag`.
pub fn membership<T: Scalar>(set: &SymbolicSet<T>, v: &SymExpr<T>, tag: &str, fresh: &mut Fresh) -> Membership<T> {
    let mut parts = Vec::new();
    let mut vars = Vec::new();
    let mut value = None;
    let filters = |parts: &mut Vec<Constraint<T>>, div: &[SymExpr<T>], ndiv: &[SymExpr<T>]| {
        parts.extend(div.iter().map(|d| Constraint::Divides(d.clone(), v.clone())));
        parts.extend(ndiv.iter().map(|d| Constraint::NotDivides(d.clone(), v.clone())));
    };
    match &set.shape {
        SetShape::Interval(s) => {
            parts.push(Constraint::le(s.lower.clone(), v.clone()));
            parts.push(Constraint::le(v.clone(), s.upper.clone()));
            filters(&mut parts, &s.div, &s.ndiv);
        }
        SetShape::Format(f) => {
            let mut map: BTreeMap<Symbol, SymExpr<T>> = BTreeMap::new();
            for idx in &f.indices {
                let name = fresh.fresh(&format!("{}_{tag}", idx.name));
                let (lo, hi) = (idx.lower.replace(&map), idx.upper.replace(&map));
                map.insert(idx.name.clone(), SymExpr::symbol(name.clone()));
                parts.push(Constraint::between(lo, SymExpr::symbol(name.clone()), hi));
                vars.push(name);
            }
            let image = f.expr.replace(&map);
            parts.push(Constraint::eq(v.clone(), image.clone()));
            filters(&mut parts, &f.div, &f.ndiv);
            if let Some(r) = &f.residue {
                parts.push(Constraint::Divides(r.modulus.replace(&map), r.combo.replace(&map)));
            }
            for x in &f.exclude {
                parts.push(Constraint::ne(v.clone(), x.value.clone()));
            }
            value = Some(image);
        }
    }
    Membership { constraint: Constraint::and(parts), vars, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{parse_expr, Bindings};
    use crate::symset::set::{FormatSet, IntervalSet};

    fn e(s: &str) -> SymExpr<i64> {
        parse_expr(s).unwrap()
    }

    #[test]
    fn interval_atoms() {
        let p4 = SymbolicSet::interval("P4", IntervalSet::new(e("a^3 + 4*a^2 + 4*a + 1"), e("a^3 + 4*a^2 + 5*a")));
        let m = membership(&p4, &e("x"), "x", &mut Fresh::default());
        assert_eq!(m.constraint.conjuncts().len(), 2);
        let b1 = SymbolicSet::interval("B1", IntervalSet::new(e("1"), e("b^2*a")).div(e("b")).ndiv(e("b^2")));
        let m = membership(&b1, &e("x"), "x", &mut Fresh::default());
        let c = m.constraint.conjuncts();
        assert_eq!(c.len(), 4);
        assert_eq!(*c[2], Constraint::Divides(e("b"), e("x")));
        assert_eq!(*c[3], Constraint::NotDivides(e("b^2"), e("x")));
    }

    #[test]
    fn fresh_indices_never_collide() {
        let f = SymbolicSet::format("F", FormatSet::new(e("a*i + j")).index("i", e("0"), e("1")).index("j", e("i"), e("a")));
        let mut fresh = Fresh::new([Symbol::new("a"), Symbol::new("x")]);
        let m1 = membership(&f, &e("x"), "x", &mut fresh);
        let m2 = membership(&f, &e("x"), "x", &mut fresh);
        assert!(m1.vars.iter().all(|v| !m2.vars.contains(v)));
        assert_eq!(m1.vars, vec![Symbol::new("i_x"), Symbol::new("j_x")]);
        assert_eq!(m2.vars, vec![Symbol::new("i_x_2"), Symbol::new("j_x_2")]);
        let env: Bindings<i64> =
            [("a", 5), ("x", 7), ("i_x", 1), ("j_x", 2)].iter().map(|(k, v)| (Symbol::new(k), *v)).collect();
        assert!(m1.constraint.eval(&env).unwrap());
    }
}
