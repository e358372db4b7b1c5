//! Embedded interior-point solver for the conic programs assembled by this
//! crate: linear objective, linear inequality rows, and norm-ball rows
//! `||F x + g|| <= r` with constant radius (every second-order-cone
//! constraint in the decomposition has a constant right-hand side, so the
//! cone reduces to a convex quadratic `||F x + g||^2 - r^2 <= 0`).
//!
//! Method: a log-barrier path-following scheme. Each constraint contributes
//! `-ln(-f(x))` with `f` linear or the quadratic ball form; an outer loop
//! scales the objective weight `t` geometrically until the certified gap
//! `m / t` is below tolerance, with damped Newton centering steps inside.
//! A phase-1 stage (minimize the common violation `s`) produces a strictly
//! feasible start or a primal-infeasibility verdict.
//!
//! Dual multipliers of the linear rows are recovered from the barrier as
//! `lambda_i = 1 / (t * slack_i)`; they are what the decentralized algorithm
//! exchanges between edges.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Norm-ball constraint `||f x + g|| <= radius`.
#[derive(Debug, Clone)]
pub struct BallConstraint {
    pub f: DMatrix<f64>,
    pub g: DVector<f64>,
    pub radius: f64,
}

/// `minimize objective' x` subject to `lin_a x <= lin_b` and the balls.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    pub objective: DVector<f64>,
    pub lin_a: DMatrix<f64>,
    pub lin_b: DVector<f64>,
    pub balls: Vec<BallConstraint>,
}

impl ConicProblem {
    pub fn n(&self) -> usize {
        self.objective.len()
    }

    /// Total number of constraint rows (each ball counts once).
    pub fn m(&self) -> usize {
        self.lin_a.nrows() + self.balls.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.lin_a.nrows() != self.lin_b.len() {
            return Err(Error::Dimension {
                context: "ConicProblem linear rows",
                expected: self.lin_a.nrows(),
                got: self.lin_b.len(),
            });
        }
        if self.lin_a.nrows() > 0 && self.lin_a.ncols() != n {
            return Err(Error::Dimension {
                context: "ConicProblem linear columns",
                expected: n,
                got: self.lin_a.ncols(),
            });
        }
        for b in &self.balls {
            if b.f.ncols() != n || b.f.nrows() != b.g.len() {
                return Err(Error::Dimension {
                    context: "ConicProblem ball",
                    expected: n,
                    got: b.f.ncols(),
                });
            }
            if b.radius <= 0.0 {
                return Err(Error::Contract("ball radius must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Termination status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpmStatus {
    Optimal,
    Infeasible,
    IterLimit,
}

/// Solution bundle.
#[derive(Debug, Clone)]
pub struct IpmSolution {
    pub x: DVector<f64>,
    /// Multipliers of the linear rows (same order as `lin_a`).
    pub lin_duals: DVector<f64>,
    pub objective: f64,
    pub status: IpmStatus,
    /// Certified duality-gap bound `m / t_final` at the last centering.
    pub certified_gap: f64,
    pub newton_steps: usize,
}

/// Solver knobs.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Target duality gap.
    pub gap_tol: f64,
    /// Strictly feasible starting point, if the caller has one.
    pub warm_start: Option<DVector<f64>>,
    /// Initial barrier weight.
    pub t_init: f64,
    /// Geometric growth factor of the barrier weight.
    pub mu: f64,
    /// Newton-step budget per centering.
    pub max_newton: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            warm_start: None,
            t_init: 1.0,
            mu: 20.0,
            max_newton: 200,
        }
    }
}

/// Internal constraint form `||F x + g||^2 + d' x + e <= 0`
/// (linear rows have no quadratic part).
struct QuadConstraint {
    f: Option<(DMatrix<f64>, DVector<f64>)>,
    d: DVector<f64>,
    e: f64,
}

impl QuadConstraint {
    fn linear(row: DVector<f64>, rhs: f64) -> Self {
        Self {
            f: None,
            d: row,
            e: -rhs,
        }
    }

    fn ball(f: DMatrix<f64>, g: DVector<f64>, radius: f64, n: usize) -> Self {
        Self {
            f: Some((f, g)),
            d: DVector::zeros(n),
            e: -radius * radius,
        }
    }

    /// Constraint value `f(x)`; feasible iff `<= 0`.
    fn value(&self, x: &DVector<f64>) -> f64 {
        let mut v = self.d.dot(x) + self.e;
        if let Some((f, g)) = &self.f {
            let u = f * x + g;
            v += u.norm_squared();
        }
        v
    }

    /// Gradient of `f` at `x`.
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut grad = self.d.clone();
        if let Some((f, g)) = &self.f {
            let u = f * x + g;
            grad += 2.0 * f.transpose() * u;
        }
        grad
    }

    /// Largest step `sigma` with `f(x + sigma dir) < 0`, assuming `f(x) < 0`.
    fn max_step(&self, x: &DVector<f64>, dir: &DVector<f64>) -> f64 {
        match &self.f {
            None => {
                let slope = self.d.dot(dir);
                if slope <= 0.0 {
                    f64::INFINITY
                } else {
                    -self.value(x) / slope
                }
            }
            Some((f, g)) => {
                // f(x + s dir) = s^2 |v|^2 + s (2 u'v + d'dir) + f(x), with
                // u = F x + g, v = F dir.
                let u = f * x + g;
                let v = f * dir;
                let aa = v.norm_squared();
                let bb = 2.0 * u.dot(&v) + self.d.dot(dir);
                let cc = self.value(x);
                if aa <= 1e-300 {
                    if bb <= 0.0 {
                        f64::INFINITY
                    } else {
                        -cc / bb
                    }
                } else {
                    let disc = bb * bb - 4.0 * aa * cc;
                    if disc <= 0.0 {
                        f64::INFINITY
                    } else {
                        let root = (-bb + disc.sqrt()) / (2.0 * aa);
                        if root <= 0.0 {
                            f64::INFINITY
                        } else {
                            root
                        }
                    }
                }
            }
        }
    }
}

struct Barrier<'a> {
    cons: &'a [QuadConstraint],
    objective: &'a DVector<f64>,
}

impl Barrier<'_> {
    fn strictly_feasible(&self, x: &DVector<f64>) -> bool {
        self.cons.iter().all(|c| c.value(x) < 0.0)
    }

    /// Damped Newton centering: minimize the merit for a fixed `t`.
    /// Returns the Newton-step count; `x` is updated in place.
    fn center(&self, x: &mut DVector<f64>, t: f64, max_newton: usize) -> Result<usize> {
        let n = x.len();
        let mut steps = 0;
        for _ in 0..max_newton {
            // Assemble gradient and Hessian of the merit.
            let mut grad = t * self.objective.clone();
            let mut hess = DMatrix::<f64>::zeros(n, n);
            for c in self.cons {
                let v = c.value(x);
                let s = -v;
                if s <= 0.0 {
                    return Err(Error::SolverFailure(
                        "barrier iterate left the strict interior".into(),
                    ));
                }
                let cg = c.gradient(x);
                grad += &cg / s;
                // grad grad' / s^2
                hess.ger(1.0 / (s * s), &cg, &cg, 1.0);
                if let Some((f, _)) = &c.f {
                    // + 2 F'F / s
                    hess.gemm_tr(2.0 / s, f, f, 1.0);
                }
            }

            // Solve H d = -grad, escalating a ridge on Cholesky failure. The
            // ridge is sized relative to the diagonal: near-boundary iterates
            // produce Hessian entries of order 1/s^2, so an absolute ridge
            // would be numerically invisible.
            let diag_scale = (0..n)
                .map(|i| hess[(i, i)])
                .fold(1e-300f64, f64::max);
            let mut ridge = 0.0;
            let dir = loop {
                let mut h = hess.clone();
                if ridge > 0.0 {
                    for i in 0..n {
                        h[(i, i)] += ridge;
                    }
                }
                match h.cholesky() {
                    Some(ch) => break ch.solve(&(-&grad)),
                    None => {
                        ridge = if ridge == 0.0 {
                            1e-14 * diag_scale
                        } else {
                            ridge * 100.0
                        };
                        if ridge > diag_scale {
                            return Err(Error::SolverFailure(
                                "Hessian not positive definite even with ridge".into(),
                            ));
                        }
                    }
                }
            };

            let decrement = -grad.dot(&dir);
            if decrement <= 1e-10 {
                return Ok(steps);
            }

            // Step length: stay strictly inside, then backtrack on the merit
            // DIFFERENCE. Evaluating the merit at both points and subtracting
            // would cancel catastrophically at large `t` (the merit reaches
            // 1e10 and beyond while the predicted decrease is below 1e-5), so
            // the difference is assembled term by term: the objective part
            // from the step itself, the barrier part from slack ratios.
            let slacks: Vec<f64> = self.cons.iter().map(|c| -c.value(x)).collect();
            let mut sigma: f64 = 1.0;
            for c in self.cons {
                sigma = sigma.min(0.99 * c.max_step(x, &dir));
            }
            let slope = grad.dot(&dir);
            let obj_dir = self.objective.dot(&dir);
            let mut accepted = false;
            for _ in 0..60 {
                let cand = &*x + sigma * &dir;
                let mut diff = t * sigma * obj_dir;
                let mut interior = true;
                for (c, &s_old) in self.cons.iter().zip(&slacks) {
                    let s_new = -c.value(&cand);
                    if s_new <= 0.0 {
                        interior = false;
                        break;
                    }
                    diff -= (s_new / s_old).ln();
                }
                if interior && diff <= 0.25 * sigma * slope {
                    *x = cand;
                    accepted = true;
                    break;
                }
                sigma *= 0.5;
            }
            steps += 1;
            if !accepted {
                // No further progress possible at this scale.
                return Ok(steps);
            }
        }
        Ok(steps)
    }
}

fn build_constraints(p: &ConicProblem) -> Vec<QuadConstraint> {
    let n = p.n();
    let mut cons = Vec::with_capacity(p.m());
    for i in 0..p.lin_a.nrows() {
        cons.push(QuadConstraint::linear(
            p.lin_a.row(i).transpose(),
            p.lin_b[i],
        ));
    }
    for b in &p.balls {
        cons.push(QuadConstraint::ball(b.f.clone(), b.g.clone(), b.radius, n));
    }
    cons
}

/// Phase 1: find a strictly feasible point of `p`, or report infeasibility.
///
/// Minimizes the common violation `s` over `(x, s)` with every constraint
/// relaxed by `s`; the problem is strictly feasible by construction and
/// bounded below by `max(-1, -r^2)` thanks to a safety floor on `s`.
pub fn find_strictly_feasible(p: &ConicProblem, hint: Option<&DVector<f64>>) -> Result<Option<DVector<f64>>> {
    p.validate()?;
    let n = p.n();
    let cons = build_constraints(p);

    // Quick accept: the hint (or origin) may already be strictly feasible.
    let x0 = hint.cloned().unwrap_or_else(|| DVector::zeros(n));
    if cons.iter().all(|c| c.value(&x0) < -1e-9) {
        return Ok(Some(x0));
    }

    // Augmented constraints over y = (x, s): f_i(x) - s <= 0 and s >= -1.
    let mut aug: Vec<QuadConstraint> = Vec::with_capacity(cons.len() + 1);
    for c in &cons {
        let mut d = DVector::zeros(n + 1);
        d.rows_mut(0, n).copy_from(&c.d);
        d[n] = -1.0;
        let f = c.f.as_ref().map(|(f, g)| {
            let mut fa = DMatrix::zeros(f.nrows(), n + 1);
            fa.view_mut((0, 0), (f.nrows(), n)).copy_from(f);
            (fa, g.clone())
        });
        aug.push(QuadConstraint { f, d, e: c.e });
    }
    {
        // s >= -1  <=>  -s - 1 <= 0
        let mut d = DVector::zeros(n + 1);
        d[n] = -1.0;
        aug.push(QuadConstraint { f: None, d, e: -1.0 });
    }
    // A large box on x: without it, a variable that every constraint is
    // decreasing in (for instance a pure slack) is a recession direction of
    // the phase-1 barrier and centering marches along it forever.
    let box_bound = 1e6 + x0.amax();
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut d = DVector::zeros(n + 1);
            d[i] = sign;
            aug.push(QuadConstraint { f: None, d, e: -box_bound });
        }
    }

    let mut obj = DVector::zeros(n + 1);
    obj[n] = 1.0;
    let barrier = Barrier {
        cons: &aug,
        objective: &obj,
    };

    let worst = cons.iter().map(|c| c.value(&x0)).fold(f64::NEG_INFINITY, f64::max);
    let mut y = DVector::zeros(n + 1);
    y.rows_mut(0, n).copy_from(&x0);
    y[n] = worst + 1.0;

    let m = aug.len() as f64;
    let mut t = 1.0;
    loop {
        barrier.center(&mut y, t, 200)?;
        if y[n] < -1e-6 {
            // Strictly feasible with a healthy margin: done early.
            return Ok(Some(y.rows(0, n).into_owned()));
        }
        if m / t <= 1e-10 {
            break;
        }
        t *= 20.0;
    }
    if y[n] <= -1e-9 {
        Ok(Some(y.rows(0, n).into_owned()))
    } else {
        Ok(None)
    }
}

/// Solve the conic program.
pub fn solve(p: &ConicProblem, opts: &SolveOptions) -> Result<IpmSolution> {
    p.validate()?;
    let n = p.n();
    let cons = build_constraints(p);
    let barrier = Barrier {
        cons: &cons,
        objective: &p.objective,
    };

    // Strictly feasible start.
    let mut x = match opts.warm_start.as_ref() {
        Some(w) if w.len() == n && cons.iter().all(|c| c.value(w) < -1e-12) => w.clone(),
        _ => match find_strictly_feasible(p, opts.warm_start.as_ref())? {
            Some(x) => x,
            None => {
                return Ok(IpmSolution {
                    x: DVector::zeros(n),
                    lin_duals: DVector::zeros(p.lin_a.nrows()),
                    objective: f64::NAN,
                    status: IpmStatus::Infeasible,
                    certified_gap: f64::INFINITY,
                    newton_steps: 0,
                })
            }
        },
    };
    debug_assert!(barrier.strictly_feasible(&x));

    let m = cons.len() as f64;
    let mut t = opts.t_init.max(1e-6);
    let mut newton_total = 0usize;
    let mut outer = 0usize;
    loop {
        newton_total += barrier.center(&mut x, t, opts.max_newton)?;
        if m / t <= opts.gap_tol {
            break;
        }
        t *= opts.mu;
        outer += 1;
        if outer > 200 {
            return Ok(IpmSolution {
                lin_duals: lin_duals(&cons, &x, t, p.lin_a.nrows()),
                objective: p.objective.dot(&x),
                x,
                status: IpmStatus::IterLimit,
                certified_gap: m / t,
                newton_steps: newton_total,
            });
        }
    }

    Ok(IpmSolution {
        lin_duals: lin_duals(&cons, &x, t, p.lin_a.nrows()),
        objective: p.objective.dot(&x),
        x,
        status: IpmStatus::Optimal,
        certified_gap: m / t,
        newton_steps: newton_total,
    })
}

fn lin_duals(cons: &[QuadConstraint], x: &DVector<f64>, t: f64, m_lin: usize) -> DVector<f64> {
    DVector::from_fn(m_lin, |i, _| {
        let s = -cons[i].value(x);
        if s > 0.0 {
            1.0 / (t * s)
        } else {
            0.0
        }
    })
}
