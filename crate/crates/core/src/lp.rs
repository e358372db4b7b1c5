//! Dense two-phase simplex for small linear programs.
//!
//! This is the workhorse behind boundedness checks, emptiness checks,
//! intersection witnesses, convex-hull membership queries, and the test
//! oracles. Problems are desk-scale (tens of rows, at most a few hundred
//! columns), so a dense tableau with Bland's anti-cycling rule is plenty.
//!
//! The public entry point solves
//!
//! ```text
//! minimize    c' x
//! subject to  A_ub x <= b_ub
//!             A_eq x  = b_eq
//! ```
//!
//! over free variables `x` by splitting each into a difference of
//! nonnegatives and adding slacks internally.

use nalgebra::{DMatrix, DVector};

/// Pivot / optimality tolerance of the tableau.
const PIVOT_TOL: f64 = 1e-9;
/// Phase-1 objective threshold below which the program counts as feasible.
const FEAS_TOL: f64 = 1e-8;

/// Outcome of a linear program.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    /// Finite optimum attained at `x` with objective `value`.
    Optimal { x: DVector<f64>, value: f64 },
    /// No point satisfies the constraints.
    Infeasible,
    /// The objective is unbounded below on the feasible set.
    Unbounded,
}

impl LpOutcome {
    /// The optimal point, if one exists.
    pub fn point(&self) -> Option<&DVector<f64>> {
        match self {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

/// Minimize `c' x` subject to `a_ub x <= b_ub` and `a_eq x = b_eq`, `x` free.
///
/// Either constraint block may be empty (zero rows); all blocks must share
/// the column count of `c`.
pub fn solve_lp(
    c: &DVector<f64>,
    a_ub: &DMatrix<f64>,
    b_ub: &DVector<f64>,
    a_eq: &DMatrix<f64>,
    b_eq: &DVector<f64>,
) -> LpOutcome {
    let n = c.len();
    assert_eq!(a_ub.ncols(), if a_ub.nrows() > 0 { n } else { a_ub.ncols() });
    assert_eq!(a_eq.ncols(), if a_eq.nrows() > 0 { n } else { a_eq.ncols() });
    assert_eq!(a_ub.nrows(), b_ub.len());
    assert_eq!(a_eq.nrows(), b_eq.len());

    let m_ub = a_ub.nrows();
    let m_eq = a_eq.nrows();
    let m = m_ub + m_eq;

    // Standard form: x = u - v (u, v >= 0), slacks s >= 0 on the <= rows.
    let n_std = 2 * n + m_ub;
    let mut a = DMatrix::<f64>::zeros(m, n_std);
    let mut b = DVector::<f64>::zeros(m);
    for r in 0..m_ub {
        for j in 0..n {
            a[(r, j)] = a_ub[(r, j)];
            a[(r, n + j)] = -a_ub[(r, j)];
        }
        a[(r, 2 * n + r)] = 1.0;
        b[r] = b_ub[r];
    }
    for r in 0..m_eq {
        for j in 0..n {
            a[(m_ub + r, j)] = a_eq[(r, j)];
            a[(m_ub + r, n + j)] = -a_eq[(r, j)];
        }
        b[m_ub + r] = b_eq[r];
    }
    // Nonnegative right-hand side for phase 1.
    for r in 0..m {
        if b[r] < 0.0 {
            for j in 0..n_std {
                a[(r, j)] = -a[(r, j)];
            }
            b[r] = -b[r];
        }
    }
    let mut c_std = DVector::<f64>::zeros(n_std);
    for j in 0..n {
        c_std[j] = c[j];
        c_std[n + j] = -c[j];
    }

    match simplex_standard(&a, &b, &c_std) {
        StdOutcome::Optimal { y, value } => {
            let mut x = DVector::<f64>::zeros(n);
            for j in 0..n {
                x[j] = y[j] - y[n + j];
            }
            LpOutcome::Optimal { x, value }
        }
        StdOutcome::Infeasible => LpOutcome::Infeasible,
        StdOutcome::Unbounded => LpOutcome::Unbounded,
    }
}

/// Convenience wrapper: is `a_ub x <= b_ub`, `a_eq x = b_eq` feasible?
/// Returns a witness on success.
pub fn feasible_point(
    a_ub: &DMatrix<f64>,
    b_ub: &DVector<f64>,
    a_eq: &DMatrix<f64>,
    b_eq: &DVector<f64>,
) -> Option<DVector<f64>> {
    let n = a_ub.ncols().max(a_eq.ncols());
    let c = DVector::<f64>::zeros(n);
    match solve_lp(&c, a_ub, b_ub, a_eq, b_eq) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

enum StdOutcome {
    Optimal { y: DVector<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Two-phase tableau simplex for `min c'y, Ay = b, y >= 0` with `b >= 0`.
fn simplex_standard(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> StdOutcome {
    let m = a.nrows();
    let n = a.ncols();

    // Tableau over [original columns | artificial columns | rhs].
    let total = n + m;
    let mut t = DMatrix::<f64>::zeros(m + 1, total + 1);
    for r in 0..m {
        for j in 0..n {
            t[(r, j)] = a[(r, j)];
        }
        t[(r, n + r)] = 1.0;
        t[(r, total)] = b[r];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: minimize the sum of artificials.
    for j in 0..total + 1 {
        let mut s = 0.0;
        for r in 0..m {
            s += t[(r, j)];
        }
        // cost row = c_phase1 - sum of basic rows; artificial costs are 1.
        let c_j = if j >= n && j < total { 1.0 } else { 0.0 };
        t[(m, j)] = c_j - s;
    }
    // rhs entry of the cost row carries -objective; fix sign convention below.
    t[(m, total)] = -{
        let mut s = 0.0;
        for r in 0..m {
            s += t[(r, total)];
        }
        s
    };

    if !run_simplex(&mut t, &mut basis, n, usize::MAX) {
        // Phase 1 is always bounded below by 0; unbounded cannot happen.
        return StdOutcome::Infeasible;
    }
    let phase1_obj = -t[(m, total)];
    if phase1_obj > FEAS_TOL {
        return StdOutcome::Infeasible;
    }

    // Drive any remaining artificial out of the basis (degenerate rows).
    for r in 0..m {
        if basis[r] >= n {
            let mut pivoted = false;
            for j in 0..n {
                if t[(r, j)].abs() > PIVOT_TOL {
                    pivot(&mut t, &mut basis, r, j);
                    pivoted = true;
                    break;
                }
            }
            // A row with no original-column entry is redundant; the
            // artificial stays basic at value zero and never re-enters.
            let _ = pivoted;
        }
    }

    // Phase 2: rebuild the cost row for the real objective.
    for j in 0..total + 1 {
        t[(m, j)] = if j < n { c[j] } else { 0.0 };
    }
    for r in 0..m {
        let bj = basis[r];
        let cb = if bj < n { c[bj] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..total + 1 {
                t[(m, j)] -= cb * t[(r, j)];
            }
        }
    }

    if !run_simplex(&mut t, &mut basis, n, n) {
        return StdOutcome::Unbounded;
    }

    let mut y = DVector::<f64>::zeros(n);
    for r in 0..m {
        if basis[r] < n {
            y[basis[r]] = t[(r, total)];
        }
    }
    let value = -t[(m, total)];
    StdOutcome::Optimal { y, value }
}

/// Bland-rule simplex on the prepared tableau. Columns with index
/// `>= col_limit` are banned from entering (used to freeze the artificials in
/// phase 2). Returns `false` on unboundedness.
fn run_simplex(t: &mut DMatrix<f64>, basis: &mut [usize], _n: usize, col_limit: usize) -> bool {
    let m = t.nrows() - 1;
    let total = t.ncols() - 1;
    let limit = col_limit.min(total);
    loop {
        // Entering column: Bland — smallest index with negative reduced cost.
        let enter = match (0..limit).find(|&j| t[(m, j)] < -PIVOT_TOL) {
            Some(j) => j,
            None => return true, // optimal
        };

        // Leaving row: minimum ratio, Bland tie-break on basis index.
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for r in 0..m {
            let a_rj = t[(r, enter)];
            if a_rj > PIVOT_TOL {
                let ratio = t[(r, total)].max(0.0) / a_rj;
                let better = match leave {
                    None => true,
                    Some(lr) => {
                        ratio < best_ratio - PIVOT_TOL
                            || (ratio < best_ratio + PIVOT_TOL && basis[r] < basis[lr])
                    }
                };
                if better {
                    best_ratio = ratio;
                    leave = Some(r);
                }
            }
        }
        let leave = match leave {
            Some(r) => r,
            None => return false, // unbounded
        };
        pivot(t, basis, leave, enter);
    }
}

fn pivot(t: &mut DMatrix<f64>, basis: &mut [usize], r: usize, c: usize) {
    let rows = t.nrows();
    let cols = t.ncols();
    let p = t[(r, c)];
    for j in 0..cols {
        t[(r, j)] /= p;
    }
    for i in 0..rows {
        if i != r {
            let f = t[(i, c)];
            if f != 0.0 {
                for j in 0..cols {
                    t[(i, j)] -= f * t[(r, j)];
                }
            }
        }
    }
    basis[r] = c;
}
