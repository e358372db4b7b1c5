//! Assembly of the decomposition program: attach parametric tasks along the
//! decomposition paths, build the per-edge constraint sets (communication
//! cones, conflict rows, norm bounds), and build the shared inclusion
//! constraint in its separable per-edge form (`T_rs`, `t_rs`).
//!
//! Variable layout per edge: `chi_rs = [[eta^l]_{l parametric}, [xi^q]_q]`
//! with `eta^l = [c; alpha]` of size `n + 1` and `xi^q` of size `n`. The
//! shared constraint rows are grouped into one block per decomposition unit;
//! summing `T_rs chi_rs - t_rs` over all decomposition edges reproduces the
//! per-unit Minkowski-inclusion inequalities.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::conflicts::{build_families, ConflictFamilies, IndexSet};
use crate::error::{Error, Result};
use crate::geometry::{GeneratorMatrix, Polytope};
use crate::graphs::{canonical, AgentState, DecompositionIndex, Edge, GraphPair};
use crate::solver::ipm::BallConstraint;
use crate::tasks::{Binding, TaskSpec, TemporalOp, TimeInterval};

/// Norm bounds keeping the optimization domain compact.
#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub xi_max: f64,
    pub eta_max: f64,
}

/// Default norm bounds: ten times the largest truth-set coordinate magnitude
/// plus the largest truth-set extent, over all tasks. Large enough that the
/// bounds never bind at the optimum.
pub fn default_bounds(tasks: &[TaskSpec]) -> Result<Bounds> {
    let mut coord: f64 = 1.0;
    let mut extent: f64 = 1.0;
    for t in tasks {
        let set = t.effective_set()?;
        let (lo, hi) = set.bounding_box()?;
        for i in 0..lo.len() {
            coord = coord.max(lo[i].abs()).max(hi[i].abs());
            extent = extent.max(hi[i] - lo[i]);
        }
    }
    let v = 10.0 * (coord + extent);
    Ok(Bounds {
        xi_max: v,
        eta_max: v,
    })
}

/// The task list of one decomposition edge: fixed (pre-existing, consistent)
/// tasks first, then the parametric tasks attached by the decomposition in
/// unit order.
#[derive(Debug, Clone)]
pub struct EdgeTasks {
    /// Canonical edge.
    pub edge: Edge,
    pub tasks: Vec<TaskSpec>,
    /// Number of fixed tasks (indices `0..k_fixed`).
    pub k_fixed: usize,
    /// Decomposition-unit id behind each parametric task (index `k_fixed + p`).
    pub parametric_units: Vec<usize>,
    /// Frame sign of each task relative to the canonical edge direction.
    pub orientations: Vec<f64>,
}

impl EdgeTasks {
    /// Indices of the parametric tasks.
    pub fn parametric_indices(&self) -> IndexSet {
        (self.k_fixed..self.tasks.len()).collect()
    }
}

/// Attach one parametric task per routed unit on every decomposition edge.
///
/// A decomposed `Always` task copies its interval; a decomposed `Eventually`
/// task is pinned to a synchronized instant (default: the interval midpoint,
/// overridable per unit through `sync_overrides`).
pub fn attach_parametric_tasks(
    g: &GraphPair,
    index: &DecompositionIndex,
    sync_overrides: &BTreeMap<usize, f64>,
) -> Result<BTreeMap<Edge, EdgeTasks>> {
    let mut out: BTreeMap<Edge, EdgeTasks> = BTreeMap::new();
    for edge in &index.e_pi {
        let k_fixed = index.k_fixed[edge];
        let mut tasks: Vec<TaskSpec> = Vec::new();
        if k_fixed > 0 {
            tasks.extend(g.task_edges[edge].iter().cloned());
        }
        let orientations = tasks.iter().map(|t| t.frame_sign()).collect();
        out.insert(
            *edge,
            EdgeTasks {
                edge: *edge,
                tasks,
                k_fixed,
                parametric_units: Vec::new(),
                orientations,
            },
        );
    }

    for (u, unit) in index.units.iter().enumerate() {
        let original = &g.task_edges[&canonical(unit.edge.0, unit.edge.1)][unit.task_idx];
        let eff = original.effective_set()?;
        let interval = match original.operator {
            TemporalOp::Always => original.interval,
            TemporalOp::Eventually => {
                let t_bar = sync_overrides
                    .get(&u)
                    .copied()
                    .unwrap_or_else(|| original.interval.midpoint());
                if !original.interval.contains(t_bar) {
                    return Err(Error::Contract(format!(
                        "sync time {t_bar} outside the interval of unit {u}"
                    )));
                }
                TimeInterval::instant(t_bar)?
            }
        };
        let sync_time = match original.operator {
            TemporalOp::Eventually => Some(interval.a()),
            TemporalOp::Always => None,
        };
        for &(r, s) in &unit.path_edges {
            let base = Polytope::new(
                eff.a().clone(),
                DVector::zeros(eff.dim()),
                eff.z().clone(),
            )?;
            let task = TaskSpec::parametric(
                original.operator,
                interval,
                Binding::EdgePair { i: r, j: s },
                base,
                crate::tasks::Origin {
                    edge: unit.edge,
                    task_idx: unit.task_idx,
                },
                sync_time,
            )?;
            let et = out
                .get_mut(&canonical(r, s))
                .ok_or_else(|| Error::Internal("path edge missing from index".into()))?;
            et.orientations.push(task.frame_sign());
            et.tasks.push(task);
            et.parametric_units.push(u);
        }
    }
    Ok(out)
}

/// Inclusion block of one decomposition unit: `M` stacks `A G_k` over the
/// base vertices, `Z = 1 (x) [A | z]`, and `t_const = Z [c; 1]` for the
/// unit's concrete truth set.
#[derive(Debug, Clone)]
pub struct InclusionBlock {
    pub m: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub t_const: DVector<f64>,
    pub rows: usize,
}

/// Build the inclusion block from the (concrete) truth set of an
/// inconsistent task.
pub fn build_inclusion_blocks(task: &TaskSpec) -> Result<InclusionBlock> {
    let eff = task.effective_set()?;
    let n = eff.dim();
    let base = Polytope::new(eff.a().clone(), DVector::zeros(n), eff.z().clone())?;
    let gens = GeneratorMatrix::from_base(&base)?;
    let facet_rows = eff.num_rows();
    let rows = facet_rows * gens.len();
    let mut m = DMatrix::<f64>::zeros(rows, n + 1);
    let mut z = DMatrix::<f64>::zeros(rows, n + 1);
    for (k, g_k) in gens.blocks().iter().enumerate() {
        m.view_mut((k * facet_rows, 0), (facet_rows, n + 1))
            .copy_from(&(eff.a() * g_k));
        z.view_mut((k * facet_rows, 0), (facet_rows, n))
            .copy_from(eff.a());
        z.view_mut((k * facet_rows, n), (facet_rows, 1))
            .copy_from(eff.z());
    }
    let mut c1 = DVector::<f64>::zeros(n + 1);
    c1.rows_mut(0, n).copy_from(eff.c());
    c1[n] = 1.0;
    let t_const = &z * c1;
    Ok(InclusionBlock {
        m,
        z,
        t_const,
        rows,
    })
}

/// One edge's local program plus its slice of the shared constraint.
#[derive(Debug, Clone)]
pub struct EdgeProblem {
    pub edge: Edge,
    /// Relative-state dimension.
    pub n: usize,
    pub chi_dim: usize,
    /// Minimization objective (`-1` on every parametric scale entry).
    pub objective: DVector<f64>,
    /// Local linear rows: conflict constraints and scale nonnegativity.
    pub lin_a: DMatrix<f64>,
    pub lin_b: DVector<f64>,
    /// Communication cones, one per vertex of every parametric truth set.
    pub comm_cones: Vec<BallConstraint>,
    /// Norm-bound balls on every `eta` and `xi` block.
    pub norm_balls: Vec<BallConstraint>,
    /// Shared constraint slice: rows over all decomposition units.
    pub t_mat: DMatrix<f64>,
    pub t_vec: DVector<f64>,
    pub families: ConflictFamilies,
    pub tasks: EdgeTasks,
}

impl EdgeProblem {
    /// Number of parametric tasks on this edge.
    pub fn n_param(&self) -> usize {
        self.tasks.parametric_units.len()
    }

    /// Column offset of the parameter block of parametric task `p`.
    pub fn eta_offset(&self, p: usize) -> usize {
        p * (self.n + 1)
    }

    /// Column offset of auxiliary witness `q`.
    pub fn xi_offset(&self, q: usize) -> usize {
        self.n_param() * (self.n + 1) + q * self.n
    }

    /// All conic constraints (cones plus norm balls) in one list.
    pub fn all_balls(&self) -> Vec<BallConstraint> {
        let mut balls = self.comm_cones.clone();
        balls.extend(self.norm_balls.iter().cloned());
        balls
    }
}

/// The fully assembled decomposition program.
#[derive(Debug, Clone)]
pub struct DecompositionProblem {
    pub n: usize,
    pub edges: BTreeMap<Edge, EdgeProblem>,
    /// Edge-computing adjacency.
    pub theta: BTreeMap<Edge, Vec<Edge>>,
    pub shared_rows: usize,
    /// Shared-row offset of each decomposition unit's block.
    pub unit_row_offsets: Vec<usize>,
    /// Rows of each unit's block.
    pub unit_rows: Vec<usize>,
    /// Per unit: the decomposition edges it routes through, with the local
    /// parametric position on each.
    pub unit_routing: Vec<Vec<(Edge, usize)>>,
    /// Per unit: the center of the concrete truth set being decomposed, in
    /// the unit's path-traversal frame. Solvers use it to seed iterates.
    pub unit_centers: Vec<DVector<f64>>,
    pub bounds: Bounds,
    pub radius: f64,
}

fn embed(
    target: &mut DMatrix<f64>,
    row: usize,
    col: usize,
    block: &DMatrix<f64>,
) {
    target
        .view_mut((row, col), (block.nrows(), block.ncols()))
        .copy_from(block);
}

/// Build one edge's local program and its shared-constraint slice.
#[allow(clippy::too_many_arguments)]
pub fn build_edge_problem(
    edge_tasks: &EdgeTasks,
    families: &ConflictFamilies,
    blocks: &[InclusionBlock],
    unit_row_offsets: &[usize],
    unit_path_lens: &[usize],
    shared_rows: usize,
    selection: &DMatrix<f64>,
    radius: f64,
    bounds: &Bounds,
) -> Result<EdgeProblem> {
    let n = selection.ncols();
    let n_param = edge_tasks.parametric_units.len();
    let xi_count = families.xi_count();
    let chi_dim = (n + 1) * n_param + n * xi_count;

    let mut objective = DVector::<f64>::zeros(chi_dim);
    for p in 0..n_param {
        objective[p * (n + 1) + n] = -1.0;
    }

    // Communication cones per parametric vertex.
    let mut comm_cones = Vec::new();
    for p in 0..n_param {
        let task = &edge_tasks.tasks[edge_tasks.k_fixed + p];
        let gens = GeneratorMatrix::from_base(&task.base)?;
        for g_k in gens.blocks() {
            let sg = selection * g_k;
            let mut f = DMatrix::<f64>::zeros(sg.nrows(), chi_dim);
            embed(&mut f, 0, p * (n + 1), &sg);
            comm_cones.push(BallConstraint {
                f,
                g: DVector::zeros(sg.nrows()),
                radius,
            });
        }
    }

    // Conflict rows: for each potential-conflict set, the shared witness must
    // lie in every member's truth set (fixed members contribute constants on
    // the right-hand side); plus scale nonnegativity.
    let xi_base = n_param * (n + 1);
    let mut conflict_rows: usize = 0;
    for q_set in &families.q {
        for &l in q_set {
            conflict_rows += edge_tasks.tasks[l].base.num_rows();
        }
    }
    let mut lin_a = DMatrix::<f64>::zeros(conflict_rows + n_param, chi_dim);
    let mut lin_b = DVector::<f64>::zeros(conflict_rows + n_param);
    let mut row = 0;
    for (q_idx, q_set) in families.q.iter().enumerate() {
        let xi_col = xi_base + q_idx * n;
        for &l in q_set {
            let task = &edge_tasks.tasks[l];
            let sigma = edge_tasks.orientations[l];
            let a = task.base.a();
            let rows_l = a.nrows();
            embed(&mut lin_a, row, xi_col, &(sigma * a));
            if l >= edge_tasks.k_fixed {
                // Parametric member: A (sigma xi) - [A | z] eta <= 0.
                let eta_col = (l - edge_tasks.k_fixed) * (n + 1);
                embed(&mut lin_a, row, eta_col, &(-a));
                let mz = -task.base.z();
                lin_a
                    .view_mut((row, eta_col + n), (rows_l, 1))
                    .copy_from(&mz);
            } else {
                // Fixed member: constant set, move its term to the RHS.
                let eff = task.effective_set()?;
                lin_b
                    .rows_mut(row, rows_l)
                    .copy_from(&(eff.a() * eff.c() + eff.z()));
            }
            row += rows_l;
        }
    }
    for p in 0..n_param {
        lin_a[(row + p, p * (n + 1) + n)] = -1.0;
    }

    // Norm bounds.
    let mut norm_balls = Vec::new();
    for p in 0..n_param {
        let mut f = DMatrix::<f64>::zeros(n + 1, chi_dim);
        embed(&mut f, 0, p * (n + 1), &DMatrix::identity(n + 1, n + 1));
        norm_balls.push(BallConstraint {
            f,
            g: DVector::zeros(n + 1),
            radius: bounds.eta_max,
        });
    }
    for q_idx in 0..xi_count {
        let mut f = DMatrix::<f64>::zeros(n, chi_dim);
        embed(&mut f, 0, xi_base + q_idx * n, &DMatrix::identity(n, n));
        norm_balls.push(BallConstraint {
            f,
            g: DVector::zeros(n),
            radius: bounds.xi_max,
        });
    }

    // Shared-constraint slice.
    let mut t_mat = DMatrix::<f64>::zeros(shared_rows, chi_dim);
    let mut t_vec = DVector::<f64>::zeros(shared_rows);
    for (p, &u) in edge_tasks.parametric_units.iter().enumerate() {
        let block = &blocks[u];
        let offset = unit_row_offsets[u];
        embed(&mut t_mat, offset, p * (n + 1), &block.m);
        t_vec
            .rows_mut(offset, block.rows)
            .copy_from(&(&block.t_const / unit_path_lens[u] as f64));
    }

    Ok(EdgeProblem {
        edge: edge_tasks.edge,
        n,
        chi_dim,
        objective,
        lin_a,
        lin_b,
        comm_cones,
        norm_balls,
        t_mat,
        t_vec,
        families: families.clone(),
        tasks: edge_tasks.clone(),
    })
}

/// Assemble the full decomposition program from the graphs and the
/// decomposition index.
pub fn assemble(
    g: &GraphPair,
    agents: &[AgentState],
    index: &DecompositionIndex,
    sync_overrides: &BTreeMap<usize, f64>,
    bounds: Option<Bounds>,
) -> Result<DecompositionProblem> {
    let selection = &agents[0].selection;
    for a in agents {
        if a.selection != *selection {
            return Err(Error::Contract(
                "all agents must share the same selection matrix".into(),
            ));
        }
    }
    let n = selection.ncols();

    let bounds = match bounds {
        Some(b) => b,
        None => {
            let all_tasks: Vec<TaskSpec> = g
                .task_edges
                .values()
                .flat_map(|ts| ts.iter().cloned())
                .collect();
            default_bounds(&all_tasks)?
        }
    };

    // Inclusion blocks and the shared row layout, one block per unit.
    let mut blocks = Vec::with_capacity(index.units.len());
    let mut unit_row_offsets = Vec::with_capacity(index.units.len());
    let mut unit_rows = Vec::with_capacity(index.units.len());
    let mut unit_path_lens = Vec::with_capacity(index.units.len());
    let mut unit_centers = Vec::with_capacity(index.units.len());
    let mut shared_rows = 0usize;
    for unit in &index.units {
        let original = &g.task_edges[&canonical(unit.edge.0, unit.edge.1)][unit.task_idx];
        let block = build_inclusion_blocks(original)?;
        unit_centers.push(original.effective_set()?.c().clone());
        unit_row_offsets.push(shared_rows);
        unit_rows.push(block.rows);
        unit_path_lens.push(unit.path_edges.len());
        shared_rows += block.rows;
        blocks.push(block);
    }

    let edge_tasks = attach_parametric_tasks(g, index, sync_overrides)?;

    let mut edges = BTreeMap::new();
    let mut unit_routing: Vec<Vec<(Edge, usize)>> = vec![Vec::new(); index.units.len()];
    for (edge, et) in &edge_tasks {
        let families = build_families(&et.tasks, &et.parametric_indices())?;
        let problem = build_edge_problem(
            et,
            &families,
            &blocks,
            &unit_row_offsets,
            &unit_path_lens,
            shared_rows,
            selection,
            g.radius,
            &bounds,
        )?;
        for (p, &u) in et.parametric_units.iter().enumerate() {
            unit_routing[u].push((*edge, p));
        }
        edges.insert(*edge, problem);
    }

    let theta = crate::graphs::edge_computing_graph(index);

    Ok(DecompositionProblem {
        n,
        edges,
        theta,
        shared_rows,
        unit_row_offsets,
        unit_rows,
        unit_routing,
        unit_centers,
        bounds,
        radius: g.radius,
    })
}
