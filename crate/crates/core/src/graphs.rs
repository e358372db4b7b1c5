//! Agents, communication / task graphs, consistency classification, and
//! decomposition-path bookkeeping.
//!
//! The communication graph contains an edge between two agents when they are
//! within the communication radius *and* hold a communication token; after
//! token selection it is a spanning tree (connected and acyclic), so paths
//! between agents are unique. The task graph has an edge wherever a
//! collaborative task binds two agents (plus self-loops for independent
//! tasks).
//!
//! A collaborative task is *communication consistent* when its edge is a
//! communication edge and its truth set intersects the relative-position ball
//! of radius `r_c`. Inconsistent edges get decomposed along their unique
//! communication path; this module computes the required index structures.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::solver::ipm::{self, BallConstraint, ConicProblem};
use crate::tasks::{Binding, TaskSpec};

/// Undirected edge in canonical `(min, max)` order.
pub type Edge = (usize, usize);

/// Canonicalize an undirected edge.
pub fn canonical(i: usize, j: usize) -> Edge {
    (i.min(j), i.max(j))
}

/// One agent: index, initial position, and the selection matrix mapping its
/// state to its position.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: usize,
    pub position: DVector<f64>,
    pub state_dim: usize,
    pub selection: DMatrix<f64>,
}

impl AgentState {
    /// Agent whose state *is* its position (`S = I`).
    pub fn at(id: usize, position: DVector<f64>) -> Self {
        let n = position.len();
        Self {
            id,
            position,
            state_dim: n,
            selection: DMatrix::identity(n, n),
        }
    }

    /// Agent with an explicit selection matrix `S` (`position = S * state`).
    pub fn with_selection(
        id: usize,
        position: DVector<f64>,
        state_dim: usize,
        selection: DMatrix<f64>,
    ) -> Result<Self> {
        if selection.nrows() != position.len() || selection.ncols() != state_dim {
            return Err(Error::Dimension {
                context: "AgentState selection shape",
                expected: position.len() * state_dim,
                got: selection.nrows() * selection.ncols(),
            });
        }
        // A valid selection matrix picks one state coordinate per row.
        for r in 0..selection.nrows() {
            let ones = (0..selection.ncols())
                .filter(|&c| (selection[(r, c)] - 1.0).abs() < 1e-12)
                .count();
            let zeros = (0..selection.ncols())
                .filter(|&c| selection[(r, c)].abs() < 1e-12)
                .count();
            if ones != 1 || ones + zeros != selection.ncols() {
                return Err(Error::Contract(
                    "selection matrix rows must pick exactly one coordinate".into(),
                ));
            }
        }
        Ok(Self {
            id,
            position,
            state_dim,
            selection,
        })
    }
}

/// Communication graph + task graph bundle.
#[derive(Debug, Clone)]
pub struct GraphPair {
    pub n_agents: usize,
    /// Communication edges (canonical order).
    pub comm_edges: BTreeSet<Edge>,
    /// Task edges with their task lists; independent tasks live on the
    /// self-loop `(i, i)`.
    pub task_edges: BTreeMap<Edge, Vec<TaskSpec>>,
    /// Token assignment over proximity edges.
    pub tokens: BTreeMap<Edge, bool>,
    /// Communication radius `r_c`.
    pub radius: f64,
}

/// Edges within the communication radius (no tokens applied).
pub fn proximity_edges(agents: &[AgentState], radius: f64) -> BTreeSet<Edge> {
    let mut edges = BTreeSet::new();
    for i in 0..agents.len() {
        for j in (i + 1)..agents.len() {
            if (&agents[i].position - &agents[j].position).norm() <= radius {
                edges.insert((i, j));
            }
        }
    }
    edges
}

/// Select communication tokens forming a spanning tree of the proximity
/// graph: breadth-first expansion from the lowest agent id, neighbors visited
/// in ascending order.
pub fn spanning_tree_tokens(agents: &[AgentState], radius: f64) -> Result<BTreeSet<Edge>> {
    let n = agents.len();
    if n == 0 {
        return Err(Error::Contract("no agents".into()));
    }
    let prox = proximity_edges(agents, radius);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in &prox {
        adj[i].push(j);
        adj[j].push(i);
    }
    for nb in &mut adj {
        nb.sort_unstable();
    }
    let mut tokens = BTreeSet::new();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    seen[0] = true;
    queue.push_back(0usize);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                tokens.insert(canonical(u, v));
                queue.push_back(v);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        let missing: Vec<usize> = (0..n).filter(|&i| !seen[i]).collect();
        return Err(Error::Disconnected(format!(
            "proximity graph does not reach agents {missing:?}"
        )));
    }
    Ok(tokens)
}

/// Build the communication and task graphs.
///
/// If `tokens` is absent, [`spanning_tree_tokens`] selects them. The
/// resulting communication graph must be connected and acyclic.
pub fn build_graphs(
    agents: &[AgentState],
    tasks: &[TaskSpec],
    radius: f64,
    tokens: Option<&BTreeSet<Edge>>,
) -> Result<GraphPair> {
    let n = agents.len();
    if n == 0 {
        return Err(Error::Contract("no agents".into()));
    }
    for (k, a) in agents.iter().enumerate() {
        if a.id != k {
            return Err(Error::Contract(format!(
                "agent ids must be contiguous from 0; slot {k} holds id {}",
                a.id
            )));
        }
    }
    let prox = proximity_edges(agents, radius);
    let token_set: BTreeSet<Edge> = match tokens {
        Some(t) => t.clone(),
        None => spanning_tree_tokens(agents, radius)?,
    };
    let comm_edges: BTreeSet<Edge> = prox.intersection(&token_set).cloned().collect();

    // Assumption: connected and acyclic.
    let mut uf = UnionFind::new(n);
    for &(i, j) in &comm_edges {
        if !uf.union(i, j) {
            return Err(Error::Contract(format!(
                "communication graph has a cycle through edge ({i}, {j})"
            )));
        }
    }
    if comm_edges.len() != n - 1 {
        return Err(Error::Disconnected(format!(
            "communication graph has {} edges over {} agents; a spanning tree needs {}",
            comm_edges.len(),
            n,
            n - 1
        )));
    }

    let mut task_edges: BTreeMap<Edge, Vec<TaskSpec>> = BTreeMap::new();
    for t in tasks {
        let edge = match t.binding {
            Binding::Agent(i) => {
                if i >= n {
                    return Err(Error::Contract(format!("task references missing agent {i}")));
                }
                (i, i)
            }
            Binding::EdgePair { i, j } => {
                if i >= n || j >= n {
                    return Err(Error::Contract(format!(
                        "task references missing agent pair ({i}, {j})"
                    )));
                }
                if i == j {
                    return Err(Error::Contract(format!(
                        "collaborative task binds agent {i} to itself"
                    )));
                }
                canonical(i, j)
            }
        };
        task_edges.entry(edge).or_default().push(t.clone());
    }

    let tokens_map = prox
        .iter()
        .map(|e| (*e, token_set.contains(e)))
        .collect();

    Ok(GraphPair {
        n_agents: n,
        comm_edges,
        task_edges,
        tokens: tokens_map,
        radius,
    })
}

/// Unique path `pi_i^j` over the communication tree: vertex sequence and the
/// directed consecutive-pair edge list (so `e_ij = sum over pairs of e_rs`).
pub fn find_path(g: &GraphPair, i: usize, j: usize) -> Result<(Vec<usize>, Vec<(usize, usize)>)> {
    if i == j {
        return Err(Error::Contract(format!("path endpoints coincide ({i})")));
    }
    if i >= g.n_agents || j >= g.n_agents {
        return Err(Error::Contract(format!(
            "path endpoints ({i}, {j}) out of range"
        )));
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.n_agents];
    for &(a, b) in &g.comm_edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for nb in &mut adj {
        nb.sort_unstable();
    }
    let mut prev: Vec<Option<usize>> = vec![None; g.n_agents];
    let mut seen = vec![false; g.n_agents];
    let mut queue = VecDeque::new();
    seen[i] = true;
    queue.push_back(i);
    while let Some(u) = queue.pop_front() {
        if u == j {
            break;
        }
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                prev[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    if !seen[j] {
        return Err(Error::Disconnected(format!("no path from {i} to {j}")));
    }
    let mut path = vec![j];
    let mut cur = j;
    while let Some(p) = prev[cur] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    let edges = path.windows(2).map(|w| (w[0], w[1])).collect();
    Ok((path, edges))
}

/// Communication consistency of one collaborative task: its edge must be a
/// communication edge and its truth set must intersect the relative-position
/// ball `{e | ||S e|| <= r_c}`.
pub fn task_consistent(g: &GraphPair, agents: &[AgentState], task: &TaskSpec) -> Result<bool> {
    let (i, j) = match task.binding {
        Binding::Agent(_) => return Ok(true), // independent tasks are not classified
        Binding::EdgePair { i, j } => (i, j),
    };
    if !g.comm_edges.contains(&canonical(i, j)) {
        return Ok(false);
    }
    truth_set_within_range(task, &agents[i].selection, g.radius)
}

/// Whether a task's (effective) truth set intersects `{e | ||S e|| <= r_c}`.
pub fn truth_set_within_range(task: &TaskSpec, selection: &DMatrix<f64>, radius: f64) -> Result<bool> {
    let set = task.effective_set()?;
    let problem = ConicProblem {
        objective: DVector::zeros(set.dim()),
        lin_a: set.a().clone(),
        lin_b: set.z() + set.a() * set.c(),
        balls: vec![BallConstraint {
            f: selection.clone(),
            g: DVector::zeros(selection.nrows()),
            radius,
        }],
    };
    Ok(ipm::find_strictly_feasible(&problem, Some(set.c()))?.is_some())
}

/// One decomposition unit: a single inconsistent task routed along its
/// communication path.
#[derive(Debug, Clone)]
pub struct DecompUnit {
    /// Task edge, directed as the task binds it (`e_ij = x_j - x_i`).
    pub edge: (usize, usize),
    /// Index of the task within its edge's task list.
    pub task_idx: usize,
    /// Vertex sequence of the communication path from `edge.0` to `edge.1`.
    pub path: Vec<usize>,
    /// Directed consecutive pairs of the path.
    pub path_edges: Vec<(usize, usize)>,
}

/// Index structures driving the decomposition.
#[derive(Debug, Clone)]
pub struct DecompositionIndex {
    /// All decomposition units in deterministic order (the row-block order of
    /// the shared constraint).
    pub units: Vec<DecompUnit>,
    /// Communication edges used by at least one path (canonical order).
    pub e_pi: BTreeSet<Edge>,
    /// Units routed through each edge of `e_pi`.
    pub pi: BTreeMap<Edge, Vec<usize>>,
    /// Count of pre-existing (consistent, fixed) tasks per edge of `e_pi`.
    pub k_fixed: BTreeMap<Edge, usize>,
}

impl DecompositionIndex {
    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}

/// Classify tasks by Def.-5 consistency and build the decomposition index:
/// every task on an inconsistent edge becomes a unit routed along the unique
/// communication path of its endpoints.
pub fn build_decomposition_index(
    g: &GraphPair,
    agents: &[AgentState],
) -> Result<DecompositionIndex> {
    let mut units = Vec::new();
    let mut e_pi = BTreeSet::new();
    let mut pi: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();

    for (edge, tasks) in &g.task_edges {
        if edge.0 == edge.1 {
            continue; // independent tasks never decompose
        }
        // An edge is consistent when it is a communication edge and every one
        // of its tasks meets the range condition.
        let mut consistent = g.comm_edges.contains(edge);
        if consistent {
            for t in tasks {
                if !task_consistent(g, agents, t)? {
                    consistent = false;
                    break;
                }
            }
        }
        if consistent {
            continue;
        }
        for (k, t) in tasks.iter().enumerate() {
            let (i, j) = match t.binding {
                Binding::EdgePair { i, j } => (i, j),
                Binding::Agent(_) => {
                    return Err(Error::Internal(
                        "independent task stored on a pair edge".into(),
                    ))
                }
            };
            let (path, path_edges) = find_path(g, i, j)?;
            let unit_id = units.len();
            for &(r, s) in &path_edges {
                let ce = canonical(r, s);
                e_pi.insert(ce);
                pi.entry(ce).or_default().push(unit_id);
            }
            units.push(DecompUnit {
                edge: (i, j),
                task_idx: k,
                path,
                path_edges,
            });
        }
    }

    // Pre-existing fixed tasks on decomposition edges: tasks of consistent
    // edges only (tasks of inconsistent edges became units above).
    let mut k_fixed = BTreeMap::new();
    for edge in &e_pi {
        let count = match g.task_edges.get(edge) {
            Some(tasks) => {
                let mut all_ok = g.comm_edges.contains(edge);
                if all_ok {
                    for t in tasks {
                        if !task_consistent(g, agents, t)? {
                            all_ok = false;
                            break;
                        }
                    }
                }
                if all_ok {
                    tasks.len()
                } else {
                    0
                }
            }
            None => 0,
        };
        k_fixed.insert(*edge, count);
    }

    Ok(DecompositionIndex {
        units,
        e_pi,
        pi,
        k_fixed,
    })
}

/// Edge-computing graph: nodes are the decomposition edges, adjacent iff
/// they share an agent.
pub fn edge_computing_graph(index: &DecompositionIndex) -> BTreeMap<Edge, Vec<Edge>> {
    let nodes: Vec<Edge> = index.e_pi.iter().cloned().collect();
    let mut adj: BTreeMap<Edge, Vec<Edge>> = nodes.iter().map(|e| (*e, Vec::new())).collect();
    for (a, &ea) in nodes.iter().enumerate() {
        for &eb in nodes.iter().skip(a + 1) {
            if ea.0 == eb.0 || ea.0 == eb.1 || ea.1 == eb.0 || ea.1 == eb.1 {
                adj.get_mut(&ea).unwrap().push(eb);
                adj.get_mut(&eb).unwrap().push(ea);
            }
        }
    }
    adj
}

/// Disjoint-set forest used for acyclicity checks.
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merge the sets of `a` and `b`; `false` when already joined (a cycle).
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}
