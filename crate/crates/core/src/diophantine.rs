//! Linear equations `a_1 x_1 + ... + a_{m-1} x_{m-1} + c = a_m x_m` and their
//! solutions in `[1, n]`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearEquation {
    pub lhs: Vec<i64>,
    pub rhs: i64,
    #[serde(default)]
    pub constant: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquationError {
    #[error("equation needs at least three variables")]
    TooFewVariables,
    #[error("coefficients must be positive")]
    NonPositiveCoefficient,
    #[error("cannot parse equation `{0}`")]
    Syntax(String),
}

impl LinearEquation {
    pub fn new(lhs: Vec<i64>, rhs: i64, constant: i64) -> Result<Self, EquationError> {
        if lhs.len() < 2 {
            return Err(EquationError::TooFewVariables);
        }
        if rhs < 1 || lhs.iter().any(|&a| a < 1) {
            return Err(EquationError::NonPositiveCoefficient);
        }
        Ok(LinearEquation { lhs, rhs, constant })
    }

    /// `E(3, 0; a, b, c)`: `a x + b y = c z`.
    pub fn three(a: i64, b: i64, c: i64) -> Self {
        Self::new(vec![a, b], c, 0).expect("positive coefficients")
    }

    pub fn arity(&self) -> usize {
        self.lhs.len() + 1
    }

    pub fn is_homogeneous(&self) -> bool {
        self.constant == 0
    }

    pub fn holds(&self, xs: &[i64]) -> bool {
        let m = self.lhs.len();
        xs.len() == m + 1
            && self.lhs.iter().zip(xs).map(|(a, x)| a * x).sum::<i64>() + self.constant == self.rhs * xs[m]
    }
}

impl fmt::Display for LinearEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E({},{};", self.arity(), self.constant)?;
        for a in &self.lhs {
            write!(f, "{a},")?;
        }
        write!(f, "{})", self.rhs)
    }
}

impl FromStr for LinearEquation {
    type Err = EquationError;

    /// `E(m,c;a_1,...,a_m)` or `a*x + b*y [+ c] = d*z`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || EquationError::Syntax(s.to_string());
        if let Some(body) = t.strip_prefix("E(").and_then(|r| r.strip_suffix(')')) {
            let (head, coeffs) = body.split_once(';').ok_or_else(bad)?;
            let (m, c) = head.split_once(',').ok_or_else(bad)?;
            let m: usize = m.parse().map_err(|_| bad())?;
            let c: i64 = c.parse().map_err(|_| bad())?;
            let a: Vec<i64> = coeffs.split(',').map(|x| x.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
            if a.len() != m {
                return Err(bad());
            }
            let (rhs, lhs) = a.split_last().ok_or_else(bad)?;
            return Self::new(lhs.to_vec(), *rhs, c);
        }
        let (l, r) = t.split_once('=').ok_or_else(bad)?;
        let mut lhs = Vec::new();
        let mut constant = 0i64;
        for term in l.split('+') {
            match parse_term(term) {
                Some((c, true)) => lhs.push(c),
                Some((c, false)) => constant += c,
                None => return Err(bad()),
            }
        }
        match parse_term(r) {
            Some((rhs, true)) => Self::new(lhs, rhs, constant),
            _ => Err(bad()),
        }
    }
}

/// `3*x`, `3x`, `x` or a bare constant; the flag says whether a variable occurs.
fn parse_term(t: &str) -> Option<(i64, bool)> {
    if t.is_empty() {
        return None;
    }
    if let Ok(c) = t.parse::<i64>() {
        return Some((c, false));
    }
    let digits: String = t.chars().take_while(|c| c.is_ascii_digit()).collect();
    let var = t[digits.len()..].trim_start_matches('*');
    let ok = var.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && var.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !ok {
        return None;
    }
    let c = if digits.is_empty() { 1 } else { digits.parse().ok()? };
    Some((c, true))
}

/// `(g, u, v)` with `g = gcd(a, b) > 0` and `a u + b v = g`.
pub fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// All `(p, q)` in `[1, n]^2` with `a p + b q = r`; `a, b` nonzero.
pub fn solve_two(a: i64, b: i64, r: i64, n: i64) -> Vec<(i64, i64)> {
    let (g, u, v) = extended_gcd(a, b);
    if r % g != 0 {
        return Vec::new();
    }
    let (p0, q0) = (u * (r / g), v * (r / g));
    let (sp, sq) = (b / g, -(a / g));
    // p = p0 + sp k, q = q0 + sq k
    let Some((k1, k2)) = k_range(p0, sp, n) else { return Vec::new() };
    let Some((k3, k4)) = k_range(q0, sq, n) else { return Vec::new() };
    let (lo, hi) = (k1.max(k3), k2.min(k4));
    (lo..=hi).map(|k| (p0 + sp * k, q0 + sq * k)).collect()
}

/// Values of `k` with `1 <= x0 + s k <= n`, `s != 0`.
fn k_range(x0: i64, s: i64, n: i64) -> Option<(i64, i64)> {
    let d = s.abs();
    let (a, b) = (Integer::div_ceil(&(1 - x0), &d), Integer::div_floor(&(n - x0), &d));
    let (lo, hi) = if s > 0 { (a, b) } else { (-b, -a) };
    (lo <= hi).then_some((lo, hi))
}

/// Solutions of a three-variable equation in `[1, n]^3`, sorted.
///
/// Each variable in turn is fixed and the remaining two-variable equation is
/// solved through [`extended_gcd`]; the sweeps are merged.
pub fn enumerate_solutions(eq: &LinearEquation, n: i64) -> Vec<[i64; 3]> {
    assert_eq!(eq.arity(), 3, "three-variable equation expected");
    let (a, b, c, k) = (eq.lhs[0], eq.lhs[1], eq.rhs, eq.constant);
    let mut out = BTreeSet::new();
    for i in 1..=n {
        // x = i: b y - c z = -a i - k
        for (y, z) in solve_two(b, -c, -a * i - k, n) {
            out.insert([i, y, z]);
        }
        // y = i: a x - c z = -b i - k
        for (x, z) in solve_two(a, -c, -b * i - k, n) {
            out.insert([x, i, z]);
        }
        // z = i: a x + b y = c i - k
        for (x, y) in solve_two(a, b, c * i - k, n) {
            out.insert([x, y, i]);
        }
    }
    out.into_iter().collect()
}

/// Solutions in `[1, n]^m` for any arity, lexicographically sorted.
pub fn solutions(eq: &LinearEquation, n: i64) -> Vec<Vec<i64>> {
    if eq.arity() == 3 {
        return enumerate_solutions(eq, n).into_iter().map(|s| s.to_vec()).collect();
    }
    let mut out = Vec::new();
    let mut xs = vec![1i64; eq.lhs.len()];
    if n < 1 {
        return out;
    }
    loop {
        let s: i64 = eq.lhs.iter().zip(&xs).map(|(a, x)| a * x).sum::<i64>() + eq.constant;
        if s % eq.rhs == 0 && (1..=n).contains(&(s / eq.rhs)) {
            let mut v = xs.clone();
            v.push(s / eq.rhs);
            out.push(v);
        }
        let mut p = xs.len();
        loop {
            if p == 0 {
                return out;
            }
            p -= 1;
            xs[p] += 1;
            if xs[p] <= n {
                break;
            }
            xs[p] = 1;
        }
    }
}

/// `|S_{E,n}|`, the number of solutions in `[1, n]^m`.
pub fn count_solutions(eq: &LinearEquation, n: i64) -> usize {
    solutions(eq, n).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_identity() {
        assert_eq!(extended_gcd(4, 3), (1, 1, -1));
        let (g, u, v) = extended_gcd(7, 8);
        assert_eq!((g, 7 * u + 8 * v), (1, 1));
        let (g, u, v) = extended_gcd(6, 6);
        assert_eq!((g, 6 * u + 6 * v), (6, 6));
        let (g, u, v) = extended_gcd(-4, 6);
        assert_eq!((g, -4 * u + 6 * v), (2, 2));
    }

    #[test]
    fn schur_small() {
        let eq = LinearEquation::three(1, 1, 1);
        let got = enumerate_solutions(&eq, 4);
        assert_eq!(got, vec![[1, 1, 2], [1, 2, 3], [1, 3, 4], [2, 1, 3], [2, 2, 4], [3, 1, 4]]);
        assert_eq!(count_solutions(&eq, 1), 0);
    }

    #[test]
    fn x_must_be_multiple_of_three() {
        let eq = LinearEquation::three(4, 3, 3);
        let got = enumerate_solutions(&eq, 10);
        let mut want: Vec<[i64; 3]> = (1..=6).map(|y| [3, y, y + 4]).collect();
        want.extend((1..=2).map(|y| [6, y, y + 8]));
        assert_eq!(got, want);
    }

    #[test]
    fn parsing() {
        assert_eq!("1*x+1*y=1*z".parse(), Ok(LinearEquation::three(1, 1, 1)));
        assert_eq!("E(3,0;7,7,8)".parse(), Ok(LinearEquation::three(7, 7, 8)));
        assert_eq!("2x + y + 3 = z".parse(), LinearEquation::new(vec![2, 1], 1, 3));
        assert_eq!("x + y + w = 2*z".parse(), LinearEquation::new(vec![1, 1, 1], 2, 0));
        assert!("x = y".parse::<LinearEquation>().is_err());
        assert!("E(3,0;1,1)".parse::<LinearEquation>().is_err());
        assert!("0*x + y = z".parse::<LinearEquation>().is_err());
        let eq = LinearEquation::three(4, 3, 3);
        assert_eq!(eq.to_string().parse(), Ok(eq));
    }

    #[test]
    fn general_arity() {
        let eq = LinearEquation::new(vec![1, 1, 1], 1, 0).unwrap();
        // x + y + w = z in [1, 4]: z in {3, 4}; 1 + 3 solutions.
        assert_eq!(count_solutions(&eq, 4), 4);
    }
}
