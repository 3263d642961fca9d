//! Phase-one simplex for `A x = b, x >= 0`, generic over the scalar type.
//!
//! Bland's rule (lowest eligible index for both the entering and the
//! leaving variable) rules out cycling. Exact scalars compare against zero;
//! floats treat anything within `tol` of zero as zero.

use alloc::vec;
use alloc::vec::Vec;

use crate::prob::Scalar;

pub(crate) enum PhaseOne<T> {
    /// A feasible point.
    Feasible(Vec<T>),
    /// Optimal phase-one objective (sum of artificials), strictly positive.
    Infeasible(T),
}

fn positive<T: Scalar>(x: &T, tol: f64) -> bool {
    x.is_positive() && !x.is_negligible(tol)
}

/// Solve the phase-one problem for `a` (rows of length `n`) and `b`.
pub(crate) fn phase_one<T: Scalar>(a: &[Vec<T>], b: &[T], tol: f64) -> PhaseOne<T> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + m + 1;

    // Tableau rows: structural columns, artificial columns, right-hand side.
    let mut t: Vec<Vec<T>> = Vec::with_capacity(m);
    for (r, (row, rhs)) in a.iter().zip(b).enumerate() {
        let flip = rhs.is_negative();
        let mut line = vec![T::zero(); width];
        for (c, v) in row.iter().enumerate() {
            line[c] = if flip { -v.clone() } else { v.clone() };
        }
        line[n + r] = T::one();
        line[width - 1] = if flip { -rhs.clone() } else { rhs.clone() };
        t.push(line);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Reduced-cost row for minimizing the sum of artificials, stored as
    // `d_j = sum_i t_ij` over structural columns; the last entry is the
    // current objective value.
    let mut obj = vec![T::zero(); width];
    for line in &t {
        for c in 0..n {
            obj[c] = obj[c].clone() + line[c].clone();
        }
        obj[width - 1] = obj[width - 1].clone() + line[width - 1].clone();
    }

    while let Some(enter) = (0..n).find(|&c| positive(&obj[c], tol)) {
        let mut leave: Option<(usize, T)> = None;
        for r in 0..m {
            if !positive(&t[r][enter], tol) {
                continue;
            }
            let ratio = t[r][width - 1].clone() / t[r][enter].clone();
            let better = match &leave {
                None => true,
                Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        // The phase-one objective is bounded below by zero, so an entering
        // column always has a positive pivot candidate.
        let Some((pr, _)) = leave else { break };

        let pivot = t[pr][enter].clone();
        for v in t[pr].iter_mut() {
            *v = v.clone() / pivot.clone();
        }
        let pivot_row = t[pr].clone();
        for (r, line) in t.iter_mut().enumerate() {
            if r == pr || line[enter].is_zero() {
                continue;
            }
            let factor = line[enter].clone();
            for (v, p) in line.iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * p.clone();
            }
        }
        let factor = obj[enter].clone();
        for (v, p) in obj.iter_mut().zip(&pivot_row) {
            *v = v.clone() - factor.clone() * p.clone();
        }
        basis[pr] = enter;
    }

    let objective = obj[width - 1].clone();
    if positive(&objective, tol) {
        return PhaseOne::Infeasible(objective);
    }
    let mut x = vec![T::zero(); n];
    for (r, &var) in basis.iter().enumerate() {
        if var < n {
            let v = t[r][width - 1].clone();
            x[var] = if v.is_negative() { T::zero() } else { v };
        }
    }
    PhaseOne::Feasible(x)
}
