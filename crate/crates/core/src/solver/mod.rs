//! Solvers for the assembled decomposition program.
//!
//! Two entry points operate on the same [`DecompositionProblem`]:
//!
//! * [`solve_centralized`] stacks every edge's variables into one conic
//!   program and solves it directly;
//! * [`solve_decentralized`] runs the per-edge dual-exchange iteration: each
//!   decomposition edge repeatedly solves a relaxed local program (its slice
//!   of the shared inclusion constraint softened by a penalized violation
//!   variable `rho`), exchanges the multipliers of that constraint block with
//!   its neighbors in the edge-computing graph, and descends on the exchanged
//!   multiplier differences.

pub mod ipm;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::assembly::{DecompositionProblem, EdgeProblem};
use crate::error::{Error, Result};
use crate::geometry::SimilarityParam;
use crate::graphs::Edge;
use crate::tasks::TaskSpec;
use ipm::{BallConstraint, ConicProblem, IpmStatus, SolveOptions};

/// One row of the decentralized convergence trace.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub iteration: usize,
    pub edge: Edge,
    /// Local relaxation level (shared-row violation allowed this round).
    pub rho: f64,
    /// Sum of the parametric scales on this edge.
    pub alpha_sum: f64,
    /// Largest entry of the global shared residual after this round.
    pub max_residual: f64,
}

/// Solution of the decomposition program.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Per-edge variable vector in the edge's local layout.
    pub chi: BTreeMap<Edge, DVector<f64>>,
    /// Total objective (negated sum of all parametric scales).
    pub objective: f64,
    /// Per decomposition unit: the sum of scales along its path.
    pub unit_alpha_sums: Vec<f64>,
    /// Largest entry of the summed shared rows (feasible when <= 0 up to
    /// tolerance).
    pub max_shared_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
    /// Decentralized only: per round, the largest entry of the summed
    /// multiplier offsets over all edges. The offsets telescope pairwise, so
    /// this is zero (up to rounding) at every round; it certifies that the
    /// exchange never injects or loses budget.
    pub consensus_gaps: Vec<f64>,
}

/// Knobs of the decentralized iteration.
#[derive(Debug, Clone)]
pub struct DecentralizedOptions {
    pub max_iter: usize,
    /// Initial multiplier step size; decays as `gamma0 / (1 + t)^0.75`.
    pub gamma0: f64,
    /// Penalty weight on the local violation variable.
    pub rho_weight: f64,
    /// Shared-residual tolerance for convergence.
    pub residual_tol: f64,
    /// Objective-stability window (iterations) and tolerance.
    pub stable_window: usize,
    pub objective_tol: f64,
    /// Duality-gap target of the local solves.
    pub local_gap_tol: f64,
}

impl Default for DecentralizedOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            gamma0: 0.05,
            rho_weight: 1e3,
            residual_tol: 1e-5,
            stable_window: 50,
            objective_tol: 1e-5,
            local_gap_tol: 1e-7,
        }
    }
}

/// Summed shared rows `sum_e (T_e chi_e - t_e)`.
pub fn shared_residual(
    problem: &DecompositionProblem,
    chi: &BTreeMap<Edge, DVector<f64>>,
) -> Result<DVector<f64>> {
    let mut r = DVector::<f64>::zeros(problem.shared_rows);
    for (e, ep) in &problem.edges {
        let x = chi
            .get(e)
            .ok_or_else(|| Error::Contract(format!("missing chi for edge {e:?}")))?;
        r += &ep.t_mat * x - &ep.t_vec;
    }
    Ok(r)
}

/// Per-unit sums of the parametric scales along each decomposition path.
pub fn unit_alpha_sums(
    problem: &DecompositionProblem,
    chi: &BTreeMap<Edge, DVector<f64>>,
) -> Vec<f64> {
    problem
        .unit_routing
        .iter()
        .map(|route| {
            route
                .iter()
                .map(|(e, p)| {
                    let ep = &problem.edges[e];
                    chi[e][ep.eta_offset(*p) + problem.n]
                })
                .sum()
        })
        .collect()
}

fn edge_alpha_sum(ep: &EdgeProblem, x: &DVector<f64>, n: usize) -> f64 {
    (0..ep.n_param()).map(|p| x[ep.eta_offset(p) + n]).sum()
}

/// A starting hint spreading every unit's truth set uniformly along its
/// path: `eta = [c / L; 1 / (2 L)]` keeps the shared rows strictly
/// negative. Conflict witnesses are seeded at a fixed member's center when
/// the family has one (the fixed set cannot move, so any feasible witness is
/// near it), else at the mean of the parametric shares. Conflict rows and
/// cones may still be violated, which phase 1 repairs from nearby.
fn initial_hint(problem: &DecompositionProblem, ep: &EdgeProblem) -> DVector<f64> {
    let n = problem.n;
    let mut x = DVector::<f64>::zeros(ep.chi_dim);
    let share = |u: usize| {
        let route_len = problem.unit_routing[u].len().max(1) as f64;
        (&problem.unit_centers[u] / route_len, 1.0 / (2.0 * route_len))
    };
    for (p, &u) in ep.tasks.parametric_units.iter().enumerate() {
        let (center, alpha) = share(u);
        x.rows_mut(ep.eta_offset(p), n).copy_from(&center);
        x[ep.eta_offset(p) + n] = alpha;
    }
    for (q_idx, family) in ep.families.q.iter().enumerate() {
        let fixed_center = family
            .iter()
            .filter(|&&idx| idx < ep.tasks.k_fixed)
            .find_map(|&idx| {
                let t = &ep.tasks.tasks[idx];
                t.oriented_set().ok().map(|s| s.c().clone())
            });
        let xi = fixed_center.unwrap_or_else(|| {
            let mut sum = DVector::<f64>::zeros(n);
            let mut count = 0.0;
            for &idx in family {
                if idx >= ep.tasks.k_fixed {
                    let u = ep.tasks.parametric_units[idx - ep.tasks.k_fixed];
                    sum += share(u).0;
                    count += 1.0;
                }
            }
            if count > 0.0 {
                sum /= count;
            }
            sum
        });
        x.rows_mut(ep.xi_offset(q_idx), n).copy_from(&xi);
    }
    x
}

fn report_for(
    problem: &DecompositionProblem,
    chi: BTreeMap<Edge, DVector<f64>>,
    iterations: usize,
    converged: bool,
    trace: Vec<TraceRow>,
) -> Result<SolveReport> {
    let residual = shared_residual(problem, &chi)?;
    let objective = problem
        .edges
        .iter()
        .map(|(e, ep)| ep.objective.dot(&chi[e]))
        .sum();
    Ok(SolveReport {
        unit_alpha_sums: unit_alpha_sums(problem, &chi),
        max_shared_residual: residual.max(),
        chi,
        objective,
        iterations,
        converged,
        trace,
        consensus_gaps: Vec::new(),
    })
}

/// Solve the decomposition program as one stacked conic program.
pub fn solve_centralized(problem: &DecompositionProblem) -> Result<SolveReport> {
    if problem.edges.is_empty() {
        return report_for(problem, BTreeMap::new(), 0, true, Vec::new());
    }

    // Column layout: edges in canonical order.
    let mut offsets: BTreeMap<Edge, usize> = BTreeMap::new();
    let mut total = 0usize;
    for (e, ep) in &problem.edges {
        offsets.insert(*e, total);
        total += ep.chi_dim;
    }

    let local_rows: usize = problem.edges.values().map(|ep| ep.lin_a.nrows()).sum();
    let mut lin_a = DMatrix::<f64>::zeros(local_rows + problem.shared_rows, total);
    let mut lin_b = DVector::<f64>::zeros(local_rows + problem.shared_rows);
    let mut objective = DVector::<f64>::zeros(total);
    let mut balls = Vec::new();
    let mut hint = DVector::<f64>::zeros(total);
    let mut row = 0usize;
    for (e, ep) in &problem.edges {
        let col = offsets[e];
        objective
            .rows_mut(col, ep.chi_dim)
            .copy_from(&ep.objective);
        lin_a
            .view_mut((row, col), (ep.lin_a.nrows(), ep.chi_dim))
            .copy_from(&ep.lin_a);
        lin_b.rows_mut(row, ep.lin_a.nrows()).copy_from(&ep.lin_b);
        row += ep.lin_a.nrows();
        for ball in ep.all_balls() {
            let mut f = DMatrix::<f64>::zeros(ball.f.nrows(), total);
            f.view_mut((0, col), (ball.f.nrows(), ep.chi_dim))
                .copy_from(&ball.f);
            balls.push(BallConstraint {
                f,
                g: ball.g,
                radius: ball.radius,
            });
        }
        // Shared slice.
        lin_a
            .view_mut((local_rows, col), (problem.shared_rows, ep.chi_dim))
            .copy_from(&ep.t_mat);
        lin_b
            .rows_mut(local_rows, problem.shared_rows)
            .add_scalar_mut(0.0);
        hint.rows_mut(col, ep.chi_dim)
            .copy_from(&initial_hint(problem, ep));
    }
    {
        let mut rhs = DVector::<f64>::zeros(problem.shared_rows);
        for ep in problem.edges.values() {
            rhs += &ep.t_vec;
        }
        lin_b.rows_mut(local_rows, problem.shared_rows).copy_from(&rhs);
    }

    let conic = ConicProblem {
        objective,
        lin_a,
        lin_b,
        balls,
    };
    let opts = SolveOptions {
        warm_start: Some(hint),
        ..SolveOptions::default()
    };
    let sol = ipm::solve(&conic, &opts)?;
    match sol.status {
        IpmStatus::Infeasible => Err(Error::Infeasible(
            "no equivalent-or-stronger decomposition exists under the \
             communication range and the shared-inclusion constraint"
                .into(),
        )),
        IpmStatus::IterLimit => Err(Error::SolverFailure(format!(
            "centralized solve hit the iteration limit (gap {:.3e})",
            sol.certified_gap
        ))),
        IpmStatus::Optimal => {
            let chi: BTreeMap<Edge, DVector<f64>> = problem
                .edges
                .keys()
                .map(|e| {
                    let ep = &problem.edges[e];
                    (*e, sol.x.rows(offsets[e], ep.chi_dim).into_owned())
                })
                .collect();
            report_for(problem, chi, 1, true, Vec::new())
        }
    }
}

/// Global shared-row indices of the units routed through an edge. Each
/// shared row belongs to exactly one unit and only that unit's path edges
/// have nonzero coefficients there, so an edge's local program (and the
/// multiplier consensus) only ever involves these rows.
fn participating_rows(problem: &DecompositionProblem, edge: Edge) -> Vec<usize> {
    let mut rows = Vec::new();
    for (u, route) in problem.unit_routing.iter().enumerate() {
        if route.iter().any(|(e, _)| *e == edge) {
            let off = problem.unit_row_offsets[u];
            rows.extend(off..off + problem.unit_rows[u]);
        }
    }
    rows
}

/// Local relaxed program of one edge: variables `y = (chi, rho)`.
struct EdgeNode {
    conic: ConicProblem,
    /// Row offset of the shared block inside `conic.lin_a`.
    shared_row0: usize,
    chi_dim: usize,
    /// Global shared-row indices present in this node's shared block.
    rows: Vec<usize>,
    /// Previous iterate, reused as a warm start.
    last_y: Option<DVector<f64>>,
    /// Barrier weight to start the next solve from; successive solves differ
    /// only by a small right-hand-side shift, so re-tracking the central
    /// path from scratch would waste centerings.
    t_start: f64,
    /// Multipliers of the shared block from the latest solve, scattered into
    /// the global row layout (zero on rows this edge does not participate in).
    mu: DVector<f64>,
}

impl EdgeNode {
    fn new(problem: &DecompositionProblem, ep: &EdgeProblem, edge: Edge, rho_weight: f64) -> Self {
        let rows_idx = participating_rows(problem, edge);
        let n_shared = rows_idx.len();
        let n_local = ep.lin_a.nrows();
        let dim = ep.chi_dim + 1;
        let rows = n_local + 1 + n_shared;
        let mut lin_a = DMatrix::<f64>::zeros(rows, dim);
        let mut lin_b = DVector::<f64>::zeros(rows);
        lin_a
            .view_mut((0, 0), (n_local, ep.chi_dim))
            .copy_from(&ep.lin_a);
        lin_b.rows_mut(0, n_local).copy_from(&ep.lin_b);
        // rho >= 0.
        lin_a[(n_local, ep.chi_dim)] = -1.0;
        // Shared slice: T chi - rho 1 <= t (the RHS varies per iteration).
        for (k, &r) in rows_idx.iter().enumerate() {
            for c in 0..ep.chi_dim {
                lin_a[(n_local + 1 + k, c)] = ep.t_mat[(r, c)];
            }
            lin_a[(n_local + 1 + k, ep.chi_dim)] = -1.0;
            lin_b[n_local + 1 + k] = ep.t_vec[r];
        }

        let mut objective = DVector::<f64>::zeros(dim);
        objective.rows_mut(0, ep.chi_dim).copy_from(&ep.objective);
        objective[ep.chi_dim] = rho_weight;

        let balls = ep
            .all_balls()
            .into_iter()
            .map(|b| {
                let mut f = DMatrix::<f64>::zeros(b.f.nrows(), dim);
                f.view_mut((0, 0), (b.f.nrows(), ep.chi_dim)).copy_from(&b.f);
                BallConstraint {
                    f,
                    g: b.g,
                    radius: b.radius,
                }
            })
            .collect();

        let mut hint_y = DVector::<f64>::zeros(dim);
        hint_y
            .rows_mut(0, ep.chi_dim)
            .copy_from(&initial_hint(problem, ep));

        Self {
            conic: ConicProblem {
                objective,
                lin_a,
                lin_b,
                balls,
            },
            shared_row0: n_local + 1,
            chi_dim: ep.chi_dim,
            rows: rows_idx,
            last_y: Some(hint_y),
            t_start: 1.0,
            mu: DVector::zeros(problem.shared_rows),
        }
    }

    /// Solve the local program against the current multiplier offset
    /// `lambda_net` on the shared right-hand side (both in the global row
    /// layout).
    fn solve(
        &mut self,
        base_rhs: &DVector<f64>,
        lambda_net: &DVector<f64>,
        gap_tol: f64,
    ) -> Result<(DVector<f64>, f64)> {
        let rows = self.conic.lin_a.nrows();
        for (k, &r) in self.rows.iter().enumerate() {
            self.conic.lin_b[self.shared_row0 + k] = base_rhs[r] - lambda_net[r];
        }

        // Warm start: reuse chi, lift rho above the current worst violation.
        let warm = self.last_y.as_ref().map(|y| {
            let mut w = y.clone();
            let mut worst = 0.0f64;
            for r in self.shared_row0..rows {
                let mut v = -self.conic.lin_b[r];
                for c in 0..self.chi_dim {
                    v += self.conic.lin_a[(r, c)] * w[c];
                }
                worst = worst.max(v);
            }
            // Stay just above the worst violation: a large lift would put
            // rho far off the central path and stall the warm-started
            // centering in a long damped phase.
            w[self.chi_dim] = (worst + 1e-6).max(w[self.chi_dim]);
            w
        });
        let opts = SolveOptions {
            gap_tol,
            warm_start: warm,
            t_init: self.t_start,
            ..SolveOptions::default()
        };
        let sol = ipm::solve(&self.conic, &opts)?;
        if sol.certified_gap.is_finite() && sol.certified_gap > 0.0 {
            // Restart the next solve a couple of centerings below this
            // solve's final barrier weight.
            let t_final = self.conic.m() as f64 / sol.certified_gap;
            self.t_start = (t_final / 400.0).clamp(1.0, 1e7);
        }
        if sol.status == IpmStatus::Infeasible {
            return Err(Error::Internal(
                "relaxed local program reported infeasible".into(),
            ));
        }
        self.mu.fill(0.0);
        for (k, &r) in self.rows.iter().enumerate() {
            self.mu[r] = sol.lin_duals[self.shared_row0 + k];
        }
        let rho = sol.x[self.chi_dim];
        self.last_y = Some(sol.x.clone());
        Ok((sol.x.rows(0, self.chi_dim).into_owned(), rho))
    }
}

/// Run the decentralized per-edge iteration.
pub fn solve_decentralized(
    problem: &DecompositionProblem,
    opts: &DecentralizedOptions,
) -> Result<SolveReport> {
    if problem.edges.is_empty() {
        return report_for(problem, BTreeMap::new(), 0, true, Vec::new());
    }

    let mut nodes: BTreeMap<Edge, EdgeNode> = problem
        .edges
        .iter()
        .map(|(e, ep)| (*e, EdgeNode::new(problem, ep, *e, opts.rho_weight)))
        .collect();

    // Directed multipliers lambda[(from, to)] for every edge-computing pair,
    // restricted to the rows of units routed through both edges: only those
    // rows couple the pair, and exchanging the rest would push multipliers of
    // constraints one side does not even hold.
    let mut lambda: BTreeMap<(Edge, Edge), DVector<f64>> = BTreeMap::new();
    let mut pair_rows: BTreeMap<(Edge, Edge), Vec<usize>> = BTreeMap::new();
    for (e, nbrs) in &problem.theta {
        for b in nbrs {
            lambda.insert((*e, *b), DVector::zeros(problem.shared_rows));
            let mine: std::collections::BTreeSet<usize> =
                nodes[e].rows.iter().copied().collect();
            pair_rows.insert(
                (*e, *b),
                nodes[b]
                    .rows
                    .iter()
                    .copied()
                    .filter(|r| mine.contains(r))
                    .collect(),
            );
        }
    }

    let mut chi: BTreeMap<Edge, DVector<f64>> = BTreeMap::new();
    let mut trace = Vec::new();
    let mut consensus_gaps: Vec<f64> = Vec::new();
    let mut obj_history: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0usize;

    for t in 0..opts.max_iter {
        iterations = t + 1;
        let gamma = opts.gamma0 / (1.0 + t as f64).powf(0.75);

        let mut rho_max = 0.0f64;
        let mut net_sum = DVector::<f64>::zeros(problem.shared_rows);
        for (e, node) in nodes.iter_mut() {
            let mut net = DVector::<f64>::zeros(problem.shared_rows);
            for b in &problem.theta[e] {
                net += &lambda[&(*e, *b)];
                net -= &lambda[&(*b, *e)];
            }
            net_sum += &net;
            let (x, rho) = node.solve(&problem.edges[e].t_vec, &net, opts.local_gap_tol)?;
            rho_max = rho_max.max(rho);
            chi.insert(*e, x);
        }
        consensus_gaps.push(net_sum.amax());

        // Multiplier exchange and descent on the rows both edges hold.
        for ((e, b), l) in lambda.iter_mut() {
            for &r in &pair_rows[&(*e, *b)] {
                l[r] -= gamma * (nodes[e].mu[r] - nodes[b].mu[r]);
            }
        }

        let residual = shared_residual(problem, &chi)?;
        let max_res = residual.max();
        let objective: f64 = problem
            .edges
            .iter()
            .map(|(e, ep)| ep.objective.dot(&chi[e]))
            .sum();
        for (e, ep) in &problem.edges {
            trace.push(TraceRow {
                iteration: t,
                edge: *e,
                rho: nodes[e].last_y.as_ref().map_or(0.0, |y| y[ep.chi_dim]),
                alpha_sum: edge_alpha_sum(ep, &chi[e], problem.n),
                max_residual: max_res,
            });
        }
        obj_history.push(objective);

        if max_res <= opts.residual_tol && rho_max <= opts.residual_tol {
            let w = opts.stable_window;
            if obj_history.len() > w {
                let prev = obj_history[obj_history.len() - 1 - w];
                if (objective - prev).abs() <= opts.objective_tol * (1.0 + objective.abs()) {
                    converged = true;
                    break;
                }
            }
        }
        if !max_res.is_finite() {
            return Err(Error::Divergence(format!(
                "shared residual became non-finite at iteration {t}"
            )));
        }
    }

    let mut report = report_for(problem, chi, iterations, converged, trace)?;
    report.consensus_gaps = consensus_gaps;
    Ok(report)
}

/// Instantiate the edge task lists from a solution: fixed tasks unchanged,
/// parametric tasks bound to their optimized similarity parameters.
pub fn extract_tasks(
    problem: &DecompositionProblem,
    chi: &BTreeMap<Edge, DVector<f64>>,
) -> Result<BTreeMap<Edge, Vec<TaskSpec>>> {
    let n = problem.n;
    let mut out = BTreeMap::new();
    for (e, ep) in &problem.edges {
        let x = chi
            .get(e)
            .ok_or_else(|| Error::Contract(format!("missing chi for edge {e:?}")))?;
        let mut tasks = Vec::with_capacity(ep.tasks.tasks.len());
        for (idx, task) in ep.tasks.tasks.iter().enumerate() {
            if idx < ep.tasks.k_fixed {
                tasks.push(task.clone());
            } else {
                let p = idx - ep.tasks.k_fixed;
                let off = ep.eta_offset(p);
                let center = x.rows(off, n).into_owned();
                let alpha = x[off + n].max(0.0);
                tasks.push(task.instantiated(SimilarityParam::new(center, alpha)?)?);
            }
        }
        out.insert(*e, tasks);
    }
    Ok(out)
}
