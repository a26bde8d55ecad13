//! Brute-force ground truth, sharing no code with the SAT or symbolic paths.

use thiserror::Error;

use crate::diophantine::LinearEquation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("no value up to the cap {0}")]
    ExceedsCap(usize),
}

/// Every monochromatic solution of `eq` under `colors`, where `colors[t - 1]`
/// is the color of `t`.
pub fn monochromatic_solutions(colors: &[usize], eq: &LinearEquation) -> Vec<Vec<i64>> {
    let n = colors.len() as i64;
    let mut out = Vec::new();
    let mut xs = vec![0i64; eq.lhs.len()];
    walk(colors, eq, n, 0, &mut xs, &mut out);
    out.sort();
    out
}

fn walk(colors: &[usize], eq: &LinearEquation, n: i64, depth: usize, xs: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if depth == xs.len() {
        let s: i64 = eq.lhs.iter().zip(xs.iter()).map(|(a, x)| a * x).sum::<i64>() + eq.constant;
        if s % eq.rhs == 0 {
            let z = s / eq.rhs;
            if 1 <= z && z <= n && colors[(z - 1) as usize] == colors[(xs[0] - 1) as usize] {
                let mut v = xs.clone();
                v.push(z);
                out.push(v);
            }
        }
        return;
    }
    for x in 1..=n {
        if depth > 0 && colors[(x - 1) as usize] != colors[(xs[0] - 1) as usize] {
            continue;
        }
        xs[depth] = x;
        walk(colors, eq, n, depth + 1, xs, out);
    }
}

/// Smallest `n` such that every `k`-coloring of `[1, n]` has a monochromatic
/// solution, by backtracking over colorings with colors in first-use order.
pub fn brute_rado(eq: &LinearEquation, k: usize, cap: usize) -> Result<usize, OracleError> {
    // Solutions whose largest entry is t, with all entries <= cap.
    let mut by_max: Vec<Vec<Vec<usize>>> = vec![Vec::new(); cap + 1];
    let mut all = Vec::new();
    let mut xs = vec![0i64; eq.lhs.len()];
    collect(eq, cap as i64, 0, &mut xs, &mut all);
    for s in all {
        let top = *s.iter().max().unwrap() as usize;
        by_max[top].push(s.into_iter().map(|v| v as usize).collect());
    }
    let mut colors = vec![usize::MAX; cap + 1];
    let mut best = 0usize;
    extend(&by_max, k, cap, 1, 0, &mut colors, &mut best);
    if best >= cap {
        Err(OracleError::ExceedsCap(cap))
    } else {
        Ok(best + 1)
    }
}

fn collect(eq: &LinearEquation, n: i64, depth: usize, xs: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if depth == xs.len() {
        let s: i64 = eq.lhs.iter().zip(xs.iter()).map(|(a, x)| a * x).sum::<i64>() + eq.constant;
        if s % eq.rhs == 0 && (1..=n).contains(&(s / eq.rhs)) {
            let mut v = xs.clone();
            v.push(s / eq.rhs);
            out.push(v);
        }
        return;
    }
    for x in 1..=n {
        xs[depth] = x;
        collect(eq, n, depth + 1, xs, out);
    }
}

/// Color `t` and beyond; `best` is the longest avoiding prefix seen.
fn extend(
    by_max: &[Vec<Vec<usize>>],
    k: usize,
    cap: usize,
    t: usize,
    used: usize,
    colors: &mut [usize],
    best: &mut usize,
) -> bool {
    *best = (*best).max(t - 1);
    if t > cap {
        return true;
    }
    for c in 0..k.min(used + 1) {
        colors[t] = c;
        let clash = by_max[t].iter().any(|s| s.iter().all(|&v| colors[v] == c));
        if !clash && extend(by_max, k, cap, t + 1, used.max(c + 1), colors, best) {
            return true;
        }
    }
    colors[t] = usize::MAX;
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_color_schur() {
        let eq = LinearEquation::three(1, 1, 1);
        let got = monochromatic_solutions(&[0; 5], &eq);
        assert!(got.contains(&vec![1, 1, 2]));
        assert_eq!(got.len(), 10);
    }

    #[test]
    fn schur_two_colors() {
        assert_eq!(brute_rado(&LinearEquation::three(1, 1, 1), 2, 20), Ok(5));
        assert_eq!(brute_rado(&LinearEquation::three(1, 1, 1), 3, 20), Ok(14));
    }

    #[test]
    fn trivial_solution_forces_one() {
        assert_eq!(brute_rado(&LinearEquation::three(1, 1, 2), 3, 10), Ok(1));
    }

    #[test]
    fn cap_reported() {
        assert_eq!(brute_rado(&LinearEquation::three(1, 1, 1), 3, 10), Err(OracleError::ExceedsCap(10)));
    }
}
