use std::collections::BTreeMap;

use num_integer::binomial;
use num_rational::Ratio;
use num_traits::Zero;

use super::set::{FormatSet, IndexVar, IntervalSet, SetError, SetShape, SymbolicSet};
use crate::scalar::Scalar;
use crate::symcore::{Atom, Poly, Simplifier, SymExpr, Symbol};

/// Symbolic cardinality. `outside` lists excluded elements already proven
/// to lie outside the raw set; other exclusions need a membership witness.
pub fn size_of<T: Scalar>(
    set: &SymbolicSet<T>,
    simp: &Simplifier<'_, T>,
    outside: &[SymExpr<T>],
) -> Result<SymExpr<T>, SetError> {
    let p = size_poly(set, simp, outside)?;
    Ok(p.to_expr())
}

pub fn size_poly<T: Scalar>(
    set: &SymbolicSet<T>,
    simp: &Simplifier<'_, T>,
    outside: &[SymExpr<T>],
) -> Result<Poly<T>, SetError> {
    let p = match &set.shape {
        SetShape::Interval(s) => interval_size(s, simp),
        SetShape::Format(f) => format_size(&set.name, f, simp, outside)?,
    };
    if !p.is_pure() {
        return Err(SetError::UnsimplifiableSize { set: set.name.clone(), expr: p.to_expr().to_string() });
    }
    Ok(p)
}

/// Inclusion-exclusion over the excluded divisors.
fn interval_size<T: Scalar>(s: &IntervalSet<T>, simp: &Simplifier<'_, T>) -> Poly<T> {
    let mut total = Poly::zero();
    let n = s.ndiv.len();
    let below = &s.lower - &SymExpr::one();
    for mask in 0u64..(1u64 << n) {
        let mut ds = s.div.clone();
        ds.extend((0..n).filter(|k| mask >> k & 1 == 1).map(|k| s.ndiv[k].clone()));
        let l = match ds.len() {
            0 => SymExpr::one(),
            1 => ds.pop().unwrap(),
            _ => SymExpr::lcm(ds),
        };
        let count = SymExpr::floor_div(s.upper.clone(), l.clone()) - SymExpr::floor_div(below.clone(), l);
        let term = simp.to_poly(&count);
        total = if mask.count_ones() % 2 == 0 { &total + &term } else { &total - &term };
    }
    total
}

fn format_size<T: Scalar>(
    name: &str,
    f: &FormatSet<T>,
    simp: &Simplifier<'_, T>,
    outside: &[SymExpr<T>],
) -> Result<Poly<T>, SetError> {
    use super::set::Injectivity;
    if f.injectivity == Injectivity::Unknown {
        return Err(SetError::InjectivityUnknown(name.to_string()));
    }
    if !f.div.is_empty() || !f.ndiv.is_empty() {
        return Err(SetError::Unsupported { set: name.to_string(), why: "divisor filters on a format set".into() });
    }
    let indices = match &f.residue {
        None => f.indices.clone(),
        Some(r) => eliminate_residue(name, f, r, simp)?.0,
    };
    let mut raw = Poly::one();
    for v in indices.iter().rev() {
        let (lo, hi) = (simp.to_poly(&v.lower), simp.to_poly(&v.upper));
        raw = sum_over(name, &raw, &v.name, &lo, &hi, simp, 0)?;
    }
    let mut removed = 0i64;
    for x in &f.exclude {
        if outside.contains(&x.value) {
            continue;
        }
        match &x.witness {
            Some(w) if witness_holds(f, &x.value, w, simp) => removed += 1,
            _ => {
                return Err(SetError::ExclusionUndecided { set: name.to_string(), element: x.value.to_string() });
            }
        }
    }
    Ok(&raw - &Poly::of(removed))
}

/// Index values in range whose image is `value`.
fn witness_holds<T: Scalar>(
    f: &FormatSet<T>,
    value: &SymExpr<T>,
    w: &BTreeMap<Symbol, SymExpr<T>>,
    simp: &Simplifier<'_, T>,
) -> bool {
    if f.residue.is_some() || f.indices.iter().any(|v| !w.contains_key(&v.name)) {
        return false;
    }
    let mut goals = Vec::new();
    for v in &f.indices {
        let x = &w[&v.name];
        goals.push(x - &v.lower.replace(w));
        goals.push(&v.upper.replace(w) - x);
    }
    let goals: Vec<SymExpr<T>> = goals.iter().map(|g| simp.simplify(g)).collect();
    simp.prover().prove_nonneg(&goals, simp.assumptions()).is_proven()
        && simp.prove_eq(&f.expr.replace(w), value).is_proven()
}

/// Rewrite `m | s*i + rest` (s = ±1, `rest` free of `i` and later indices)
/// as `i = s*(m*t - rest)` with a fresh index `t` in place of `i`.
pub(crate) fn eliminate_residue<T: Scalar>(
    name: &str,
    f: &FormatSet<T>,
    r: &super::set::ResidueFilter<T>,
    simp: &Simplifier<'_, T>,
) -> Result<(Vec<IndexVar<T>>, SymExpr<T>), SetError> {
    let unsupported = |why: &str| SetError::Unsupported { set: name.to_string(), why: why.to_string() };
    let m = simp.simplify(&r.modulus);
    if !simp.prover().prove_nonneg(&[&m - &SymExpr::one()], simp.assumptions()).is_proven() {
        return Err(unsupported("residue modulus not provably positive"));
    }
    let combo = simp.to_poly(&r.combo);
    for pos in (0..f.indices.len()).rev() {
        let i = &f.indices[pos].name;
        let atom = Atom::Sym(i.clone());
        let coeffs = combo.coeffs_in(&atom);
        if coeffs.keys().any(|&d| d > 1) {
            continue;
        }
        let Some(s) = coeffs.get(&1).and_then(Poly::as_integer) else { continue };
        if !s.abs().is_one() {
            continue;
        }
        let later: Vec<&Symbol> = f.indices[pos..].iter().map(|v| &v.name).collect();
        let rest = coeffs.get(&0).cloned().unwrap_or_default();
        if later.iter().any(|x| rest.symbols().contains(*x))
            || f.indices[pos + 1..].iter().any(|v| v.lower.symbols().contains(i) || v.upper.symbols().contains(i))
        {
            continue;
        }
        let t = Symbol::new(&format!("{i}_t"));
        let (rest, te) = (rest.to_expr(), SymExpr::symbol(t.clone()));
        let (lo, hi) = (&f.indices[pos].lower, &f.indices[pos].upper);
        let (by, tlo, thi) = if s.is_positive() {
            (&(&m * &te) - &rest, ceil_div(&(lo + &rest), &m), SymExpr::floor_div(hi + &rest, m.clone()))
        } else {
            (&rest - &(&m * &te), ceil_div(&(&rest - hi), &m), SymExpr::floor_div(&rest - lo, m.clone()))
        };
        let mut out = f.indices.clone();
        out[pos] = IndexVar { name: t, lower: simp.simplify(&tlo), upper: simp.simplify(&thi) };
        let map: BTreeMap<Symbol, SymExpr<T>> = [(i.clone(), by)].into_iter().collect();
        return Ok((out, f.expr.replace(&map)));
    }
    Err(unsupported("residue filter cannot be eliminated by re-parameterizing an index"))
}

fn ceil_div<T: Scalar>(n: &SymExpr<T>, d: &SymExpr<T>) -> SymExpr<T> {
    -SymExpr::floor_div(-n.clone(), d.clone())
}

/// `sum_{i=lo}^{hi} p`, valid whenever `hi >= lo - 1`.
fn sum_over<T: Scalar>(
    name: &str,
    p: &Poly<T>,
    i: &Symbol,
    lo: &Poly<T>,
    hi: &Poly<T>,
    simp: &Simplifier<'_, T>,
    depth: u32,
) -> Result<Poly<T>, SetError> {
    let unsupported = |why: String| SetError::Unsupported { set: name.to_string(), why };
    let floor_atom = p.atoms().into_iter().find(|a| !matches!(a, Atom::Sym(_)) && atom_mentions(a, i));
    let Some(atom) = floor_atom else {
        let x = Atom::Sym(i.clone());
        let below = lo - &Poly::one();
        let mut total = Poly::zero();
        for (d, c) in p.coeffs_in(&x) {
            let f = power_sum::<T>(d);
            total = &total + &(&c * &(&eval_univariate(&f, hi) - &eval_univariate(&f, &below)));
        }
        return Ok(total);
    };
    let Atom::Floor(_, den) = &atom else {
        return Err(unsupported(format!("lcm over summation index `{i}`")));
    };
    let c = den
        .as_integer()
        .filter(|c| c.is_positive())
        .ok_or_else(|| unsupported(format!("floor over `{i}` with non-constant denominator")))?;
    if depth > 4 {
        return Err(unsupported(format!("nested residue split over `{i}`")));
    }
    // i = c*t + r for each residue r.
    let t = Symbol::new(&format!("{i}_{depth}"));
    let (ce, te) = (SymExpr::int(c.clone()), SymExpr::symbol(t.clone()));
    let (loe, hie) = (lo.to_expr(), hi.to_expr());
    let mut total = Poly::zero();
    let mut r = T::zero();
    while r < c {
        let re = SymExpr::int(r.clone());
        let by = &(&ce * &te) + &re;
        let map: BTreeMap<Symbol, SymExpr<T>> = [(i.clone(), by)].into_iter().collect();
        let q = simp.to_poly(&p.to_expr().replace(&map));
        if q.atoms().iter().any(|a| !matches!(a, Atom::Sym(_)) && atom_mentions(a, &t)) {
            return Err(unsupported(format!("floor over `{i}` does not split by residue")));
        }
        let tlo = simp.to_poly(&ceil_div(&(&loe - &re), &ce));
        let thi = simp.to_poly(&SymExpr::floor_div(&hie - &re, ce.clone()));
        total = &total + &sum_over(name, &q, &t, &tlo, &thi, simp, depth + 1)?;
        r = r + T::one();
    }
    Ok(total)
}

fn atom_mentions<T: Scalar>(a: &Atom<T>, s: &Symbol) -> bool {
    Poly::atom(a.clone()).symbols().contains(s)
}

/// Coefficients of `F_k(n) = sum_{i=0}^{n} i^k` as a polynomial in `n`.
pub fn power_sum<T: Scalar>(k: u32) -> Vec<Ratio<T>> {
    let mut fs: Vec<Vec<Ratio<T>>> = Vec::new();
    for j in 0..=k {
        // (n+1)^{j+1} = sum_{m<=j} C(j+1, m) F_m(n)
        let mut acc = vec![Ratio::zero(); j as usize + 2];
        for (e, slot) in acc.iter_mut().enumerate() {
            *slot = Ratio::from_integer(binomial(T::of(j as i64 + 1), T::of(e as i64)));
        }
        for (m, fm) in fs.iter().enumerate() {
            let b = Ratio::from_integer(binomial(T::of(j as i64 + 1), T::of(m as i64)));
            for (e, c) in fm.iter().enumerate() {
                acc[e] = acc[e].clone() - b.clone() * c.clone();
            }
        }
        let div = Ratio::from_integer(T::of(j as i64 + 1));
        fs.push(acc.into_iter().map(|c| c / div.clone()).collect());
    }
    fs.pop().unwrap()
}

fn eval_univariate<T: Scalar>(coeffs: &[Ratio<T>], x: &Poly<T>) -> Poly<T> {
    coeffs.iter().rev().fold(Poly::zero(), |acc, c| &(&acc * x) + &Poly::constant(c.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{parse_expr, AssumptionSet, Bindings, ShiftProver};
    use crate::symset::set::{Exclusion, ResidueFilter};

    fn e(s: &str) -> SymExpr<i64> {
        parse_expr(s).unwrap()
    }

    fn same(asm: &AssumptionSet<i64>, got: &SymExpr<i64>, want: &str) {
        let simp = Simplifier::new(asm, &ShiftProver);
        assert!(simp.prove_eq(got, &e(want)).is_proven(), "{got} vs {want}");
    }

    #[test]
    fn power_sums_match_direct_sums() {
        for k in 0..6u32 {
            let f = power_sum::<i64>(k);
            for n in 0..10i64 {
                let direct: i64 = (0..=n).map(|i| i.pow(k)).sum();
                let v = f.iter().rev().fold(Ratio::zero(), |acc, c| acc * Ratio::from_integer(n) + *c);
                assert_eq!(v, Ratio::from_integer(direct), "k={k} n={n}");
            }
        }
    }

    #[test]
    fn interval_sizes() {
        let asm = AssumptionSet::new().at_least("a", 1).at_least("b", 1);
        let simp = Simplifier::new(&asm, &ShiftProver);
        let b1 = SymbolicSet::interval("B1", IntervalSet::new(e("1"), e("b^2*a")).div(e("b")).ndiv(e("b^2")));
        same(&asm, &size_of(&b1, &simp, &[]).unwrap(), "a*(b - 1)");
        let whole = SymbolicSet::interval("W", IntervalSet::new(e("1"), e("n")));
        assert_eq!(size_of(&whole, &simp, &[]).unwrap(), e("n"));
        let c = SymbolicSet::interval("C", IntervalSet::new(e("1"), e("100")).div(e("4")).ndiv(e("6")));
        assert_eq!(size_of(&c, &simp, &[]).unwrap(), e("17"));
    }

    #[test]
    fn nested_sums() {
        let asm = AssumptionSet::new().at_least("a", 0).at_least("m", 0);
        let simp = Simplifier::new(&asm, &ShiftProver);
        let tri = SymbolicSet::format(
            "T",
            FormatSet::new(e("a^2*i + j")).index("i", e("0"), e("a")).index("j", e("1"), e("i")).declared_injective(),
        );
        same(&asm, &size_of(&tri, &simp, &[]).unwrap(), "floor(a*(a + 1), 2)");
        let grid = SymbolicSet::format(
            "G",
            FormatSet::new(e("a*i + j")).index("i", e("0"), e("m - 1")).index("j", e("1"), e("a")).declared_injective(),
        );
        same(&asm, &size_of(&grid, &simp, &[]).unwrap(), "m*a");
    }

    #[test]
    fn floor_bounds_split_by_parity() {
        let asm = AssumptionSet::new().at_least("a", 7).odd("a");
        let simp = Simplifier::new(&asm, &ShiftProver);
        let rl = FormatSet::new(e("a*(a + 1)*i + a*j + k"))
            .index("i", e("0"), e("a^2 - 1"))
            .index("j", e("0"), e("a"))
            .index("k", e("2*floor(j, 2) + 1"), e("a - 1"))
            .declared_injective();
        let s = SymbolicSet::format("Rl", rl);
        let size = size_of(&s, &simp, &[]).unwrap();
        for a in [7i64, 9, 11] {
            let env: Bindings<i64> = [(Symbol::new("a"), a)].into_iter().collect();
            assert_eq!(size.eval(&env).unwrap() as usize, s.instantiate(&env).unwrap().len());
        }
    }

    #[test]
    fn injectivity_and_filters_are_required() {
        let asm = AssumptionSet::new().at_least("a", 1);
        let simp = Simplifier::new(&asm, &ShiftProver);
        let s = SymbolicSet::format("S", FormatSet::new(e("i")).index("i", e("1"), e("a")));
        assert_eq!(size_of(&s, &simp, &[]), Err(SetError::InjectivityUnknown("S".into())));
        let mut f = FormatSet::new(e("i")).index("i", e("1"), e("a^2")).declared_injective();
        f.residue = Some(ResidueFilter { modulus: e("a"), combo: e("i") });
        let s = SymbolicSet::format("M", f);
        same(&asm, &size_of(&s, &simp, &[]).unwrap(), "a");
    }

    #[test]
    fn exclusions_need_a_decision() {
        let asm = AssumptionSet::new().at_least("a", 1);
        let simp = Simplifier::new(&asm, &ShiftProver);
        let mut f = FormatSet::new(e("a*i")).index("i", e("1"), e("a")).declared_injective();
        f.exclude.push(Exclusion { value: e("a^2"), witness: None });
        let s = SymbolicSet::format("S", f.clone());
        assert!(matches!(size_of(&s, &simp, &[]), Err(SetError::ExclusionUndecided { .. })));
        f.exclude[0].witness = Some([(Symbol::new("i"), e("a"))].into_iter().collect());
        let s = SymbolicSet::format("S", f);
        same(&asm, &size_of(&s, &simp, &[]).unwrap(), "a - 1");
        assert_eq!(size_of(&s, &simp, &[e("a^2")]).unwrap(), e("a"));
    }
}
