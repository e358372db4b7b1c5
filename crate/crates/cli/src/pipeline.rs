//! End-to-end orchestration: input validation, decomposition, solving,
//! extraction, and soundness verification.
//!
//! The pipeline rewrites the scenario's task conjunction so that every
//! collaborative task lives on a communication edge: consistent tasks are
//! kept verbatim, inconsistent tasks are replaced by conjunctions of
//! parametric tasks along their communication paths, with the parameters
//! chosen by the assembled conic program.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use stldecomp::assembly::{assemble, Bounds, DecompositionProblem};
use stldecomp::conflicts::{detect_conflicts_static, detect_cycle_conflicts, CycleEdge};
use stldecomp::error::Error as CoreError;
use stldecomp::geometry::Polytope;
use stldecomp::graphs::{
    build_decomposition_index, build_graphs, canonical, DecompositionIndex, Edge, GraphPair,
    UnionFind,
};
use stldecomp::lp;
use stldecomp::solver::{
    extract_tasks, shared_residual, solve_centralized, solve_decentralized, DecentralizedOptions,
    SolveReport,
};
use stldecomp::tasks::{robustness_conjunction, Signal, TaskSpec, TemporalOp};

use crate::scenario::Scenario;

/// Classified pipeline failure; maps onto the CLI exit codes.
#[derive(Debug)]
pub enum RunError {
    /// The input conjunction is conflicting (exit 2).
    InputConflict(String),
    /// No valid decomposition exists (exit 3).
    Infeasible(String),
    /// Numerical failure or non-convergence (exit 4).
    Solver(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::InputConflict(s) => write!(f, "input conflict: {s}"),
            RunError::Infeasible(s) => write!(f, "infeasible: {s}"),
            RunError::Solver(s) => write!(f, "solver failure: {s}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Infeasible(msg) => RunError::Infeasible(msg),
            CoreError::InputConflict(msg) => RunError::InputConflict(msg),
            other => RunError::Solver(other.to_string()),
        }
    }
}

/// Per decomposed task: accuracy and routing summary (external agent ids).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitAccuracy {
    pub edge: (usize, usize),
    pub operator: String,
    pub alpha_sum: f64,
    pub path: Vec<usize>,
    pub inclusion_rows: usize,
}

/// Soundness-verification outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    /// No conflicting conjunction in the rewritten task set.
    pub conflict_free: bool,
    /// Every rewritten collaborative task is communication consistent.
    pub consistent: bool,
    pub task_graph_acyclic: bool,
    pub witness_pass: usize,
    pub witness_total: usize,
    /// A deliberately corrupted parameter set must fail the witness test.
    pub negative_control_detected: bool,
    /// Witness-signal implication: rewritten conjunction satisfied implies
    /// the original conjunction satisfied.
    pub signal_check: bool,
    pub signal_robustness_rewritten: f64,
    pub signal_robustness_original: f64,
    pub units: Vec<UnitAccuracy>,
}

/// Everything a successful run produces.
pub struct PipelineResult {
    pub graphs: GraphPair,
    pub index: DecompositionIndex,
    pub problem: DecompositionProblem,
    pub report: SolveReport,
    /// Rewritten collaborative task lists per (canonical) edge.
    pub new_edge_tasks: BTreeMap<Edge, Vec<TaskSpec>>,
    /// Independent tasks, unchanged, keyed by internal agent index.
    pub independent: BTreeMap<usize, Vec<TaskSpec>>,
    pub verification: VerificationReport,
}

/// CLI-level overrides of the scenario's solver block.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub mode: Option<String>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub verify_samples: Option<usize>,
}

const CYCLE_COMBO_CAP: usize = 128;

/// Validate the input conjunction (single-edge detectors plus cycle
/// detectors over the fundamental cycles of the task graph). Returns one
/// message per detected conflict.
pub fn validate_input(g: &GraphPair, scenario: &Scenario) -> Result<Vec<String>, CoreError> {
    let mut findings = Vec::new();
    for (edge, tasks) in &g.task_edges {
        for report in detect_conflicts_static(tasks)? {
            let (i, j) = scenario.external_edge(*edge);
            let loc = if edge.0 == edge.1 {
                format!("agent {i}")
            } else {
                format!("edge ({i}, {j})")
            };
            findings.push(format!(
                "{loc}: conflicting conjunction {:?} over tasks {:?}",
                report.kind, report.indices
            ));
        }
    }

    // Fundamental cycles of the collaborative task graph.
    let n = g.n_agents;
    let edges: Vec<Edge> = g
        .task_edges
        .keys()
        .copied()
        .filter(|e| e.0 != e.1)
        .collect();
    let mut uf = UnionFind::new(n);
    let mut tree: Vec<Edge> = Vec::new();
    let mut extra: Vec<Edge> = Vec::new();
    for &e in &edges {
        if uf.union(e.0, e.1) {
            tree.push(e);
        } else {
            extra.push(e);
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in &tree {
        adj[i].push(j);
        adj[j].push(i);
    }
    for &(u, v) in &extra {
        // Tree path u -> v, then close with (v, u).
        let Some(path) = tree_path(&adj, u, v) else {
            continue;
        };
        let mut cycle_edges: Vec<(usize, usize)> = path.windows(2).map(|w| (w[0], w[1])).collect();
        cycle_edges.push((v, u));
        // One task per edge, all combinations (capped).
        let lists: Vec<&Vec<TaskSpec>> = cycle_edges
            .iter()
            .map(|&(i, j)| &g.task_edges[&canonical(i, j)])
            .collect();
        let combos: usize = lists.iter().map(|l| l.len()).product();
        if combos > CYCLE_COMBO_CAP {
            return Err(CoreError::Contract(format!(
                "cycle through {:?} has {combos} task combinations (cap {CYCLE_COMBO_CAP})",
                cycle_edges
            )));
        }
        let mut pick = vec![0usize; lists.len()];
        loop {
            let cycle: Vec<CycleEdge> = cycle_edges
                .iter()
                .zip(&pick)
                .map(|(&(i, j), &k)| CycleEdge {
                    edge: (i, j),
                    task: lists[cycle_pos(&cycle_edges, (i, j))][k].clone(),
                })
                .collect();
            if let Some(report) = detect_cycle_conflicts(&cycle)? {
                let ext: Vec<usize> = path.iter().map(|&a| scenario.external_id(a)).collect();
                findings.push(format!(
                    "cycle through agents {ext:?}: conflicting conjunction {:?}",
                    report.kind
                ));
            }
            // Advance the mixed-radix counter.
            let mut k = 0;
            loop {
                if k == pick.len() {
                    break;
                }
                pick[k] += 1;
                if pick[k] < lists[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
            if k == pick.len() {
                break;
            }
        }
    }
    Ok(findings)
}

fn cycle_pos(edges: &[(usize, usize)], e: (usize, usize)) -> usize {
    edges.iter().position(|&x| x == e).unwrap()
}

fn tree_path(adj: &[Vec<usize>], from: usize, to: usize) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut prev = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    prev[from] = from;
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for &v in &adj[u] {
            if prev[v] == usize::MAX {
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    if prev[to] == usize::MAX {
        return None;
    }
    let mut path = vec![to];
    while *path.last().unwrap() != from {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    Some(path)
}

/// Full pipeline.
pub fn run(scenario: &Scenario, overrides: &Overrides) -> Result<PipelineResult, RunError> {
    let g = build_graphs(
        &scenario.agents,
        &scenario.tasks,
        scenario.radius,
        scenario.tokens.as_ref(),
    )
    .map_err(RunError::from)?;

    let findings = validate_input(&g, scenario).map_err(RunError::from)?;
    if !findings.is_empty() {
        return Err(RunError::InputConflict(findings.join("; ")));
    }

    let index = build_decomposition_index(&g, &scenario.agents).map_err(RunError::from)?;

    // Synchronization-instant overrides carried on the original tasks.
    let mut sync_overrides = BTreeMap::new();
    for (u, unit) in index.units.iter().enumerate() {
        let original = &g.task_edges[&canonical(unit.edge.0, unit.edge.1)][unit.task_idx];
        if original.operator == TemporalOp::Eventually {
            if let Some(s) = original.sync_time {
                sync_overrides.insert(u, s);
            }
        }
    }

    let bounds = match (scenario.solver.xi_max, scenario.solver.eta_max) {
        (Some(xi_max), Some(eta_max)) => Some(Bounds { xi_max, eta_max }),
        (None, None) => None,
        _ => {
            return Err(RunError::Solver(
                "xi_max and eta_max must be set together".into(),
            ))
        }
    };

    let problem = assemble(&g, &scenario.agents, &index, &sync_overrides, bounds)
        .map_err(RunError::from)?;

    let mode = overrides
        .mode
        .clone()
        .unwrap_or_else(|| scenario.solver.mode.clone());
    let report = match mode.as_str() {
        "centralized" => solve_centralized(&problem).map_err(RunError::from)?,
        "decentralized" => {
            let opts = DecentralizedOptions {
                max_iter: overrides.max_iter.unwrap_or(scenario.solver.max_iter),
                gamma0: scenario.solver.gamma0,
                rho_weight: scenario.solver.rho_weight,
                residual_tol: scenario.solver.residual_tol,
                ..DecentralizedOptions::default()
            };
            let r = solve_decentralized(&problem, &opts).map_err(RunError::from)?;
            if !r.converged && r.max_shared_residual > 1e-4 {
                return Err(RunError::Solver(format!(
                    "decentralized iteration did not reach a valid decomposition in {} rounds \
                     (shared residual {:.3e})",
                    r.iterations, r.max_shared_residual
                )));
            }
            r
        }
        other => return Err(RunError::Solver(format!("unknown mode {other:?}"))),
    };

    let extracted = extract_tasks(&problem, &report.chi).map_err(RunError::from)?;

    // Rewritten task set: decomposition-edge lists from the solution plus the
    // untouched consistent task edges; independent tasks pass through.
    let mut new_edge_tasks: BTreeMap<Edge, Vec<TaskSpec>> = extracted;
    let mut independent: BTreeMap<usize, Vec<TaskSpec>> = BTreeMap::new();
    let decomposed: BTreeSet<Edge> = index
        .units
        .iter()
        .map(|u| canonical(u.edge.0, u.edge.1))
        .collect();
    for (edge, tasks) in &g.task_edges {
        if edge.0 == edge.1 {
            independent.insert(edge.0, tasks.clone());
        } else if !decomposed.contains(edge) && !new_edge_tasks.contains_key(edge) {
            new_edge_tasks.insert(*edge, tasks.clone());
        }
    }

    let seed = overrides.seed.unwrap_or(scenario.seed);
    let samples = overrides
        .verify_samples
        .unwrap_or(scenario.solver.verify_samples);
    let verification = verify(
        scenario,
        &g,
        &index,
        &problem,
        &report,
        &new_edge_tasks,
        &independent,
        samples,
        seed,
    )
    .map_err(RunError::from)?;

    Ok(PipelineResult {
        graphs: g,
        index,
        problem,
        report,
        new_edge_tasks,
        independent,
        verification,
    })
}

/// Uniform-ish point in a polytope: rejection sampling over the bounding
/// box, falling back to a random convex combination of the vertices.
pub fn sample_point<R: Rng>(set: &Polytope, rng: &mut R) -> Result<DVector<f64>, CoreError> {
    let (lo, hi) = set.bounding_box()?;
    let n = lo.len();
    if (0..n).all(|i| hi[i] - lo[i] < 1e-12) {
        return Ok(set.c().clone());
    }
    for _ in 0..10_000 {
        let x = DVector::from_fn(n, |i, _| {
            if hi[i] - lo[i] < 1e-15 {
                lo[i]
            } else {
                rng.gen_range(lo[i]..hi[i])
            }
        });
        if set.contains(&x) {
            return Ok(x);
        }
    }
    let verts = set.vertices()?;
    let mut w: Vec<f64> = (0..verts.len()).map(|_| -f64::ln(rng.gen_range(1e-12..1.0))).collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    let mut x = DVector::zeros(n);
    for (k, v) in verts.iter().enumerate() {
        x += w[k] * v;
    }
    Ok(x)
}

/// The concrete truth sets of one unit's decomposed tasks, in path-traversal
/// frame, as instantiated by the solution vector.
fn unit_part_sets(
    problem: &DecompositionProblem,
    chi: &BTreeMap<Edge, DVector<f64>>,
    unit: usize,
) -> Result<Vec<Polytope>, CoreError> {
    let n = problem.n;
    problem.unit_routing[unit]
        .iter()
        .map(|(e, p)| {
            let ep = &problem.edges[e];
            let task = &ep.tasks.tasks[ep.tasks.k_fixed + *p];
            let off = ep.eta_offset(*p);
            let center = chi[e].rows(off, n).into_owned();
            let alpha = chi[e][off + n].max(0.0);
            Polytope::new(task.base.a().clone(), center, alpha * task.base.z())
        })
        .collect()
}

/// Monte-Carlo witness test of one unit: draw one point per part set, sum
/// along the path, require membership in the original truth set.
fn witness_unit<R: Rng>(
    original_set: &Polytope,
    parts: &[Polytope],
    samples: usize,
    rng: &mut R,
) -> Result<(usize, usize), CoreError> {
    let mut pass = 0;
    for _ in 0..samples {
        let mut sum = DVector::zeros(original_set.dim());
        for part in parts {
            sum += sample_point(part, rng)?;
        }
        if original_set.h_value(&sum)? >= -1e-9 {
            pass += 1;
        }
    }
    Ok((pass, samples))
}

#[allow(clippy::too_many_arguments)]
fn verify(
    scenario: &Scenario,
    g: &GraphPair,
    index: &DecompositionIndex,
    problem: &DecompositionProblem,
    report: &SolveReport,
    new_edge_tasks: &BTreeMap<Edge, Vec<TaskSpec>>,
    independent: &BTreeMap<usize, Vec<TaskSpec>>,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport, CoreError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // (a) Theorem-1 surface: consistency, conflict freedom, acyclicity.
    let mut consistent = true;
    let mut conflict_free = true;
    let mut uf = UnionFind::new(g.n_agents);
    let mut task_graph_acyclic = true;
    for (edge, tasks) in new_edge_tasks {
        if !uf.union(edge.0, edge.1) {
            task_graph_acyclic = false;
        }
        if !detect_conflicts_static(tasks)?.is_empty() {
            conflict_free = false;
        }
        for t in tasks {
            if !stldecomp::graphs::task_consistent(g, &scenario.agents, t)? {
                consistent = false;
            }
        }
    }

    // (b) Witness sampling per decomposed unit, plus the negative control.
    let mut witness_pass = 0;
    let mut witness_total = 0;
    let mut units = Vec::new();
    let mut negative_control_detected = index.units.is_empty();
    for (u, unit) in index.units.iter().enumerate() {
        let original = &g.task_edges[&canonical(unit.edge.0, unit.edge.1)][unit.task_idx];
        let eff = original.effective_set()?;
        let parts = unit_part_sets(problem, &report.chi, u)?;
        let (pass, total) = witness_unit(&eff, &parts, samples, &mut rng)?;
        witness_pass += pass;
        witness_total += total;
        units.push(UnitAccuracy {
            edge: scenario.external_edge(canonical(unit.edge.0, unit.edge.1)),
            operator: format!("{:?}", original.operator),
            alpha_sum: report.unit_alpha_sums[u],
            path: unit.path.iter().map(|&a| scenario.external_id(a)).collect(),
            inclusion_rows: problem.unit_rows[u],
        });

        if u == 0 && !parts.is_empty() {
            // Negative control: translate one part beyond the original set's
            // width; every witness sample must then fail.
            let (lo, hi) = eff.bounding_box()?;
            let shift = 2.0 * (hi[0] - lo[0]) + 1.0;
            let mut corrupted = parts.clone();
            let mut c = corrupted[0].c().clone();
            c[0] += shift;
            corrupted[0] = Polytope::new(
                corrupted[0].a().clone(),
                c,
                corrupted[0].z().clone(),
            )?;
            let (bad_pass, bad_total) =
                witness_unit(&eff, &corrupted, samples.min(500).max(1), &mut rng)?;
            negative_control_detected = bad_pass < bad_total;
        }
    }
    if index.units.is_empty() {
        negative_control_detected = true; // nothing to corrupt
    }

    // (c) Witness signal: rewritten satisfied implies original satisfied.
    let (signal_check, rho_bar, rho_orig) = match build_witness_signal(
        g,
        new_edge_tasks,
        independent,
        &scenario.tasks,
    ) {
        Ok(sig) => {
            let mut all_new: Vec<TaskSpec> = Vec::new();
            for tasks in new_edge_tasks.values() {
                all_new.extend(tasks.iter().cloned());
            }
            for tasks in independent.values() {
                all_new.extend(tasks.iter().cloned());
            }
            let rho_bar = robustness_conjunction(&sig, &all_new, 0.0)?;
            let rho_orig = robustness_conjunction(&sig, &scenario.tasks, 0.0)?;
            // The implication only binds when the witness satisfies the
            // rewritten conjunction.
            let ok = rho_bar < -1e-6 || rho_orig >= -1e-6;
            (ok && rho_bar >= -1e-6, rho_bar, rho_orig)
        }
        Err(_) => (false, f64::NAN, f64::NAN),
    };

    Ok(VerificationReport {
        conflict_free,
        consistent,
        task_graph_acyclic,
        witness_pass,
        witness_total,
        negative_control_detected,
        signal_check,
        signal_robustness_rewritten: rho_bar,
        signal_robustness_original: rho_orig,
        units,
    })
}

/// Pin instant a witness uses for an Eventually task.
fn pin_time(task: &TaskSpec) -> Option<f64> {
    match task.operator {
        TemporalOp::Always => None,
        TemporalOp::Eventually => Some(task.sync_time.unwrap_or(task.interval.midpoint())),
    }
}

fn active_at(task: &TaskSpec, t: f64) -> bool {
    match pin_time(task) {
        None => task.interval.contains(t),
        Some(pin) => (t - pin).abs() < 1e-9,
    }
}

/// Build a piecewise-linear witness signal satisfying the rewritten
/// conjunction: at every grid time, each communication edge's relative state
/// is a feasible point of the intersection of its active truth sets, and the
/// root agent satisfies its active independent tasks; positions follow by
/// integrating along the communication tree.
pub fn build_witness_signal(
    g: &GraphPair,
    new_edge_tasks: &BTreeMap<Edge, Vec<TaskSpec>>,
    independent: &BTreeMap<usize, Vec<TaskSpec>>,
    original_tasks: &[TaskSpec],
) -> Result<Signal, CoreError> {
    let n = g
        .task_edges
        .values()
        .flatten()
        .next()
        .map(|t| t.base.dim())
        .unwrap_or(2);

    // Grid: all interval endpoints and pins of the rewritten and original
    // conjunctions, plus zero.
    let mut grid: Vec<f64> = vec![0.0];
    let mut add_task = |task: &TaskSpec| {
        grid.push(task.interval.a());
        grid.push(task.interval.b());
        if let Some(pin) = pin_time(task) {
            grid.push(pin);
        }
    };
    for tasks in new_edge_tasks.values() {
        tasks.iter().for_each(&mut add_task);
    }
    for tasks in independent.values() {
        tasks.iter().for_each(&mut add_task);
    }
    original_tasks.iter().for_each(&mut add_task);
    grid.sort_by(|p, q| p.partial_cmp(q).unwrap());
    grid.dedup_by(|p, q| (*p - *q).abs() < 1e-9);
    if grid.len() < 2 {
        grid.push(grid[0] + 1.0);
    }

    // Tree adjacency for position integration (root = internal agent 0).
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.n_agents];
    for &(i, j) in &g.comm_edges {
        adj[i].push(j);
        adj[j].push(i);
    }

    let mut states = Vec::with_capacity(grid.len());
    let mut last_edge_val: BTreeMap<Edge, DVector<f64>> = BTreeMap::new();
    let mut last_root = DVector::<f64>::zeros(n);
    for &t in &grid {
        // Per-edge relative state in the canonical frame.
        let mut rel: BTreeMap<Edge, DVector<f64>> = BTreeMap::new();
        for &edge in &g.comm_edges {
            let active: Vec<Polytope> = new_edge_tasks
                .get(&edge)
                .map(|tasks| {
                    tasks
                        .iter()
                        .filter(|task| active_at(task, t))
                        .map(|task| task.oriented_set())
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?
                .unwrap_or_default();
            let val = if active.is_empty() {
                last_edge_val
                    .get(&edge)
                    .cloned()
                    .unwrap_or_else(|| DVector::zeros(n))
            } else {
                feasible_in_all(&active).ok_or_else(|| {
                    CoreError::Internal(format!(
                        "no witness point for edge {edge:?} at time {t}"
                    ))
                })?
            };
            last_edge_val.insert(edge, val.clone());
            rel.insert(edge, val);
        }

        // Root position from its active independent tasks.
        let root_active: Vec<Polytope> = independent
            .get(&0)
            .map(|tasks| {
                tasks
                    .iter()
                    .filter(|task| active_at(task, t))
                    .map(|task| task.effective_set())
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?
            .unwrap_or_default();
        let root = if root_active.is_empty() {
            last_root.clone()
        } else {
            feasible_in_all(&root_active).ok_or_else(|| {
                CoreError::Internal(format!("no witness point for the root at time {t}"))
            })?
        };
        last_root = root.clone();

        // Integrate along the tree.
        let mut pos: Vec<Option<DVector<f64>>> = vec![None; g.n_agents];
        pos[0] = Some(root);
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if pos[v].is_none() {
                    let e = canonical(u, v);
                    let val = &rel[&e];
                    let base = pos[u].as_ref().unwrap();
                    // Canonical frame: e = x_hi - x_lo.
                    pos[v] = Some(if u < v { base + val } else { base - val });
                    queue.push_back(v);
                }
            }
        }
        let mut stacked = DVector::<f64>::zeros(g.n_agents * n);
        for (i, p) in pos.into_iter().enumerate() {
            stacked.rows_mut(i * n, n).copy_from(&p.ok_or_else(|| {
                CoreError::Disconnected(format!("agent {i} unreachable in the witness tree"))
            })?);
        }
        states.push(stacked);
    }

    Signal::new(grid, states, g.n_agents)
}

/// Feasible point of the intersection of several polytopes (chebyshev-less:
/// plain phase-1 feasibility by linear programming).
fn feasible_in_all(sets: &[Polytope]) -> Option<DVector<f64>> {
    let n = sets[0].dim();
    let rows: usize = sets.iter().map(|s| s.num_rows()).sum();
    let mut a = nalgebra::DMatrix::<f64>::zeros(rows, n);
    let mut b = DVector::<f64>::zeros(rows);
    let mut r = 0;
    for s in sets {
        a.rows_mut(r, s.num_rows()).copy_from(s.a());
        b.rows_mut(r, s.num_rows())
            .copy_from(&(s.z() + s.a() * s.c()));
        r += s.num_rows();
    }
    lp::feasible_point(&a, &b, &nalgebra::DMatrix::zeros(0, n), &DVector::zeros(0))
}

/// Re-verify a stored solution: recompute the shared residual and rerun the
/// witness sampling against the scenario's problem.
pub fn reverify(
    scenario: &Scenario,
    chi: &BTreeMap<Edge, DVector<f64>>,
    samples: usize,
) -> Result<(f64, usize, usize), RunError> {
    let g = build_graphs(
        &scenario.agents,
        &scenario.tasks,
        scenario.radius,
        scenario.tokens.as_ref(),
    )
    .map_err(RunError::from)?;
    let index = build_decomposition_index(&g, &scenario.agents).map_err(RunError::from)?;
    let mut sync_overrides = BTreeMap::new();
    for (u, unit) in index.units.iter().enumerate() {
        let original = &g.task_edges[&canonical(unit.edge.0, unit.edge.1)][unit.task_idx];
        if original.operator == TemporalOp::Eventually {
            if let Some(s) = original.sync_time {
                sync_overrides.insert(u, s);
            }
        }
    }
    let problem = assemble(&g, &scenario.agents, &index, &sync_overrides, None)
        .map_err(RunError::from)?;
    let residual = shared_residual(&problem, chi).map_err(RunError::from)?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut pass = 0;
    let mut total = 0;
    for (u, unit) in index.units.iter().enumerate() {
        let original = &g.task_edges[&canonical(unit.edge.0, unit.edge.1)][unit.task_idx];
        let eff = original.effective_set().map_err(RunError::from)?;
        let parts = unit_part_sets(&problem, chi, u).map_err(RunError::from)?;
        let (p, t) = witness_unit(&eff, &parts, samples, &mut rng).map_err(RunError::from)?;
        pass += p;
        total += t;
    }
    Ok((residual.max(), pass, total))
}
