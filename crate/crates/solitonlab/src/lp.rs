//! Exact linear programming over rationals.
//!
//! Dense two-phase simplex with Bland's rule. Problems in this crate have
//! at most a few dozen constraints, so no effort is spent on sparsity.

use crate::Rat;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    /// Optimal solution of the original (free-variable) problem.
    Optimal { x: Vec<Rat>, value: Rat },
    Unbounded,
    Infeasible,
}

/// Maximize `c . x` subject to `rows[i] . x <= rhs[i]`, `x` free.
pub fn maximize(c: &[Rat], rows: &[Vec<Rat>], rhs: &[Rat]) -> LpResult {
    let n = c.len();
    let m = rows.len();
    // Split free variables x = p - q with p, q >= 0 and add slacks.
    let ncols = 2 * n + m;
    let mut a: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut b: Vec<Rat> = rhs.to_vec();
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), n);
        let mut r = vec![Rat::zero(); ncols];
        for j in 0..n {
            r[j] = row[j].clone();
            r[n + j] = -row[j].clone();
        }
        r[2 * n + i] = Rat::one();
        a.push(r);
    }
    let mut obj = vec![Rat::zero(); ncols];
    for j in 0..n {
        obj[j] = c[j].clone();
        obj[n + j] = -c[j].clone();
    }
    // Normalize to b >= 0.
    for i in 0..m {
        if b[i].is_negative() {
            for x in a[i].iter_mut() {
                *x = -x.clone();
            }
            b[i] = -b[i].clone();
        }
    }
    match simplex_two_phase(a, b, obj) {
        SimplexOutcome::Optimal { x, value } => {
            let sol: Vec<Rat> = (0..n).map(|j| x[j].clone() - x[n + j].clone()).collect();
            LpResult::Optimal { x: sol, value }
        }
        SimplexOutcome::Unbounded => LpResult::Unbounded,
        SimplexOutcome::Infeasible => LpResult::Infeasible,
    }
}

enum SimplexOutcome {
    Optimal { x: Vec<Rat>, value: Rat },
    Unbounded,
    Infeasible,
}

/// Maximize obj.y s.t. A y = b, y >= 0, b >= 0.
fn simplex_two_phase(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>, obj: Vec<Rat>) -> SimplexOutcome {
    let m = a.len();
    let n = if m == 0 { obj.len() } else { a[0].len() };
    if m == 0 {
        // No constraints: optimum is zero only if obj has no positive part.
        if obj.iter().any(|c| !c.is_zero()) {
            return SimplexOutcome::Unbounded;
        }
        return SimplexOutcome::Optimal { x: vec![Rat::zero(); n], value: Rat::zero() };
    }
    // Phase 1: append artificials.
    let total = n + m;
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    for (i, row) in a.iter_mut().enumerate() {
        row.extend((0..m).map(|k| if k == i { Rat::one() } else { Rat::zero() }));
        basis.push(n + i);
    }
    // Phase-1 objective: minimize sum of artificials == maximize -sum.
    let mut cost = vec![Rat::zero(); total];
    for j in n..total {
        cost[j] = -Rat::one();
    }
    let feasible = run_simplex(&mut a, &mut b, &mut basis, &cost, total);
    match feasible {
        SimplexRun::Unbounded => unreachable!("phase 1 is bounded"),
        SimplexRun::Optimal(value) => {
            if !value.is_zero() {
                return SimplexOutcome::Infeasible;
            }
        }
    }
    // Drive artificials out of the basis when possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !a[i][j].is_zero()) {
                pivot(&mut a, &mut b, &mut basis, i, j);
            }
            // Otherwise the row is all zeros in original columns: redundant.
        }
    }
    // Phase 2 on original columns (artificial columns pinned at zero).
    let mut cost = obj;
    cost.extend(vec![-Rat::one() * big_m(); m]); // keep artificials unattractive
    match run_simplex(&mut a, &mut b, &mut basis, &cost, n) {
        SimplexRun::Unbounded => SimplexOutcome::Unbounded,
        SimplexRun::Optimal(_) => {
            let mut x = vec![Rat::zero(); n];
            let mut value = Rat::zero();
            for i in 0..m {
                if basis[i] < n {
                    x[basis[i]] = b[i].clone();
                    value = value + cost[basis[i]].clone() * b[i].clone();
                }
            }
            SimplexOutcome::Optimal { x, value }
        }
    }
}

fn big_m() -> Rat {
    Rat::from_integer(1_000_000_000.into())
}

enum SimplexRun {
    Optimal(Rat),
    Unbounded,
}

/// Revised-free tableau simplex with Bland's rule. Only columns `< limit`
/// may enter the basis.
fn run_simplex(
    a: &mut [Vec<Rat>],
    b: &mut [Rat],
    basis: &mut [usize],
    cost: &[Rat],
    limit: usize,
) -> SimplexRun {
    let m = a.len();
    loop {
        // Reduced costs: c_j - c_B . A_j (columns computed on demand).
        let mut entering = None;
        for j in 0..limit {
            if basis.contains(&j) {
                continue;
            }
            let mut red = cost[j].clone();
            for i in 0..m {
                if !a[i][j].is_zero() {
                    red = red - cost[basis[i]].clone() * a[i][j].clone();
                }
            }
            if red.is_positive() {
                entering = Some(j);
                break; // Bland: smallest index
            }
        }
        let Some(col) = entering else {
            let mut val = Rat::zero();
            for i in 0..m {
                val = val + cost[basis[i]].clone() * b[i].clone();
            }
            return SimplexRun::Optimal(val);
        };
        // Ratio test with Bland tie-break on basis index.
        let mut leave: Option<(usize, Rat)> = None;
        for i in 0..m {
            if a[i][col].is_positive() {
                let ratio = b[i].clone() / a[i][col].clone();
                match &leave {
                    None => leave = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < *br || (ratio == *br && basis[i] < basis[*bi]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, _)) = leave else {
            return SimplexRun::Unbounded;
        };
        pivot(a, b, basis, row, col);
    }
}

fn pivot(a: &mut [Vec<Rat>], b: &mut [Rat], basis: &mut [usize], row: usize, col: usize) {
    let m = a.len();
    let pv = a[row][col].clone();
    for x in a[row].iter_mut() {
        *x = x.clone() / pv.clone();
    }
    b[row] = b[row].clone() / pv;
    for i in 0..m {
        if i == row || a[i][col].is_zero() {
            continue;
        }
        let f = a[i][col].clone();
        let (head, tail) = if i < row {
            let (h, t) = a.split_at_mut(row);
            (&mut h[i], &t[0])
        } else {
            let (h, t) = a.split_at_mut(i);
            (&mut t[0], &h[row])
        };
        for (x, y) in head.iter_mut().zip(tail.iter()) {
            *x = x.clone() - f.clone() * y.clone();
        }
        b[i] = b[i].clone() - f * b[row].clone();
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    #[test]
    fn simple_box() {
        // max x + y on [0,1]^2 (via free vars and 4 inequalities)
        let res = maximize(
            &[r(1, 1), r(1, 1)],
            &[
                vec![r(1, 1), r(0, 1)],
                vec![r(-1, 1), r(0, 1)],
                vec![r(0, 1), r(1, 1)],
                vec![r(0, 1), r(-1, 1)],
            ],
            &[r(1, 1), r(0, 1), r(1, 1), r(0, 1)],
        );
        match res {
            LpResult::Optimal { value, .. } => assert_eq!(value, r(2, 1)),
            _ => panic!("expected optimum"),
        }
    }

    #[test]
    fn unbounded_detected() {
        let res = maximize(&[r(1, 1)], &[vec![r(-1, 1)]], &[r(0, 1)]);
        assert_eq!(res, LpResult::Unbounded);
    }

    #[test]
    fn infeasible_detected() {
        let res = maximize(
            &[r(1, 1)],
            &[vec![r(1, 1)], vec![r(-1, 1)]],
            &[r(-2, 1), r(1, 1)],
        );
        assert_eq!(res, LpResult::Infeasible);
    }

    #[test]
    fn negative_optimum() {
        // max -x subject to x >= 3  ->  value -3
        let res = maximize(&[r(-1, 1)], &[vec![r(-1, 1)]], &[r(-3, 1)]);
        match res {
            LpResult::Optimal { x, value } => {
                assert_eq!(value, r(-3, 1));
                assert_eq!(x[0], r(3, 1));
            }
            _ => panic!("expected optimum"),
        }
    }
}
