//! Scenario files: a JSON document describing agents, the communication
//! setup, the task conjunction, and solver knobs.
//!
//! Tasks outside the Always/Eventually fragment are rewritten at ingestion:
//! an `until` task becomes `Always[a, tau] set  AND  Eventually[tau, tau]
//! set2` for a user-supplied `tau` in `[a, b]`, and a `recurrence` task with
//! period `T` and `k` repetitions unrolls into `k` Always copies with
//! shifted intervals.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use stldecomp::geometry::{regular_polytope, Polytope};
use stldecomp::graphs::{canonical, AgentState, Edge};
use stldecomp::tasks::{Binding, TaskSpec, TemporalOp, TimeInterval};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    /// Communication radius `r_c`.
    pub radius: f64,
    #[serde(default)]
    pub seed: u64,
    /// Marks a communication graph reproduced from secondary sources rather
    /// than specified directly.
    #[serde(default)]
    pub reconstructed: bool,
    pub agents: Vec<AgentSpec>,
    /// Explicit communication tree (token selection). When omitted, a
    /// breadth-first spanning tree of the proximity graph is used.
    #[serde(default)]
    pub comm_edges: Option<Vec<[usize; 2]>>,
    pub tasks: Vec<TaskEntry>,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentSpec {
    /// External agent id (1-based in shipped files; any unique ids work).
    pub id: usize,
    pub position: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskEntry {
    /// "always" | "eventually" | "until" | "recurrence"
    pub operator: String,
    pub interval: [f64; 2],
    /// Switch instant of an `until` task (required for `until`).
    #[serde(default)]
    pub tau: Option<f64>,
    /// Period of a `recurrence` task (required for `recurrence`).
    #[serde(default)]
    pub period: Option<f64>,
    /// Number of unrolled repetitions of a `recurrence` task.
    #[serde(default)]
    pub repetitions: Option<usize>,
    pub binding: BindingSpec,
    pub set: SetSpec,
    /// Second truth set of an `until` task.
    #[serde(default)]
    pub set2: Option<SetSpec>,
    /// Synchronization-instant override used when an Eventually task is
    /// decomposed (defaults to the interval midpoint).
    #[serde(default)]
    pub sync_time: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingSpec {
    Agent(usize),
    Edge([usize; 2]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetSpec {
    Regular {
        sides: usize,
        beta: f64,
        center: Vec<f64>,
    },
    Raw {
        a: Vec<Vec<f64>>,
        c: Vec<f64>,
        z: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// "centralized" | "decentralized"
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_gamma0")]
    pub gamma0: f64,
    #[serde(default = "default_rho_weight")]
    pub rho_weight: f64,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default)]
    pub xi_max: Option<f64>,
    #[serde(default)]
    pub eta_max: Option<f64>,
    #[serde(default = "default_verify_samples")]
    pub verify_samples: usize,
}

fn default_mode() -> String {
    "centralized".into()
}
fn default_max_iter() -> usize {
    3500
}
fn default_gamma0() -> f64 {
    0.05
}
fn default_rho_weight() -> f64 {
    1e3
}
fn default_residual_tol() -> f64 {
    1e-5
}
fn default_verify_samples() -> usize {
    10_000
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            max_iter: default_max_iter(),
            gamma0: default_gamma0(),
            rho_weight: default_rho_weight(),
            residual_tol: default_residual_tol(),
            xi_max: None,
            eta_max: None,
            verify_samples: default_verify_samples(),
        }
    }
}

/// A fully validated, fragment-normalized scenario with 0-based agent
/// indices.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub radius: f64,
    pub seed: u64,
    pub agents: Vec<AgentState>,
    pub tokens: Option<BTreeSet<Edge>>,
    pub tasks: Vec<TaskSpec>,
    pub solver: SolverConfig,
    /// External ids in internal order (internal index -> external id).
    pub external_ids: Vec<usize>,
}

impl Scenario {
    /// External (file-level) label of an internal agent index.
    pub fn external_id(&self, internal: usize) -> usize {
        self.external_ids[internal]
    }

    /// External label of an internal edge.
    pub fn external_edge(&self, e: Edge) -> (usize, usize) {
        (self.external_ids[e.0], self.external_ids[e.1])
    }
}

/// Every problem found while validating a scenario, with its location.
#[derive(Debug)]
pub struct LoadErrors(pub Vec<String>);

impl std::fmt::Display for LoadErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        let _ = writeln!(s, "scenario file is invalid ({} problems):", self.0.len());
        for e in &self.0 {
            let _ = writeln!(s, "  - {e}");
        }
        f.write_str(s.trim_end())
    }
}

impl std::error::Error for LoadErrors {}

fn build_set(spec: &SetSpec, loc: &str, errors: &mut Vec<String>) -> Option<Polytope> {
    match spec {
        SetSpec::Regular {
            sides,
            beta,
            center,
        } => {
            if center.len() != 2 {
                errors.push(format!("{loc}: regular sets are 2-D; center has {} entries", center.len()));
                return None;
            }
            match regular_polytope(*sides, *beta, &DVector::from_row_slice(center)) {
                Ok(p) => Some(p),
                Err(e) => {
                    errors.push(format!("{loc}: {e}"));
                    None
                }
            }
        }
        SetSpec::Raw { a, c, z } => {
            let rows = a.len();
            if rows == 0 || a.iter().any(|r| r.len() != c.len()) || z.len() != rows {
                errors.push(format!("{loc}: raw set dimensions are inconsistent"));
                return None;
            }
            let flat: Vec<f64> = a.iter().flatten().copied().collect();
            match Polytope::new(
                DMatrix::from_row_slice(rows, c.len(), &flat),
                DVector::from_row_slice(c),
                DVector::from_row_slice(z),
            ) {
                Ok(p) => Some(p),
                Err(e) => {
                    errors.push(format!("{loc}: {e}"));
                    None
                }
            }
        }
    }
}

/// Parse and validate a scenario file, collecting every violation.
pub fn load_scenario(path: &Path) -> Result<Scenario, anyhow::Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("cannot parse {}: {e}", path.display()))?;
    parse_scenario(&file).map_err(Into::into)
}

/// Validate an in-memory scenario document.
pub fn parse_scenario(file: &ScenarioFile) -> Result<Scenario, LoadErrors> {
    let mut errors: Vec<String> = Vec::new();

    if file.schema_version != SCHEMA_VERSION {
        errors.push(format!(
            "schema_version {} unsupported (expected {SCHEMA_VERSION})",
            file.schema_version
        ));
    }
    if !(file.radius > 0.0) {
        errors.push(format!("radius must be positive, got {}", file.radius));
    }
    if file.agents.len() < 2 {
        errors.push(format!("need at least 2 agents, got {}", file.agents.len()));
    }

    // Agent id map: external -> internal index, sorted by external id.
    let mut ids: Vec<usize> = file.agents.iter().map(|a| a.id).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != file.agents.len() {
        errors.push("agent ids are not unique".into());
    }
    let internal = |ext: usize| -> Option<usize> { ids.binary_search(&ext).ok() };

    let dim = file.agents.first().map_or(2, |a| a.position.len());
    let mut agents: Vec<Option<AgentState>> = vec![None; ids.len()];
    for a in &file.agents {
        if a.position.len() != dim {
            errors.push(format!(
                "agent {}: position has {} entries, expected {dim}",
                a.id,
                a.position.len()
            ));
            continue;
        }
        if let Some(k) = internal(a.id) {
            agents[k] = Some(AgentState::at(k, DVector::from_row_slice(&a.position)));
        }
    }

    let tokens: Option<BTreeSet<Edge>> = file.comm_edges.as_ref().map(|edges| {
        let mut set = BTreeSet::new();
        for (n, e) in edges.iter().enumerate() {
            match (internal(e[0]), internal(e[1])) {
                (Some(i), Some(j)) if i != j => {
                    set.insert(canonical(i, j));
                }
                _ => errors.push(format!(
                    "comm_edges[{n}]: ({}, {}) does not reference two distinct known agents",
                    e[0], e[1]
                )),
            }
        }
        set
    });

    let mut tasks: Vec<TaskSpec> = Vec::new();
    for (n, t) in file.tasks.iter().enumerate() {
        let loc = format!("tasks[{n}]");
        let [a, b] = t.interval;
        let interval = match TimeInterval::new(a, b) {
            Ok(iv) => Some(iv),
            Err(e) => {
                errors.push(format!("{loc}: {e}"));
                None
            }
        };
        let binding = match &t.binding {
            BindingSpec::Agent(ext) => match internal(*ext) {
                Some(i) => Some(Binding::Agent(i)),
                None => {
                    errors.push(format!("{loc}: unknown agent {ext}"));
                    None
                }
            },
            BindingSpec::Edge(e) => match (internal(e[0]), internal(e[1])) {
                (Some(i), Some(j)) if i != j => Some(Binding::EdgePair { i, j }),
                _ => {
                    errors.push(format!(
                        "{loc}: edge ({}, {}) does not reference two distinct known agents",
                        e[0], e[1]
                    ));
                    None
                }
            },
        };
        let set = build_set(&t.set, &loc, &mut errors);

        let expanded: Vec<(TemporalOp, TimeInterval, Polytope)> = match t.operator.as_str() {
            "always" | "eventually" => {
                let op = if t.operator == "always" {
                    TemporalOp::Always
                } else {
                    TemporalOp::Eventually
                };
                match (interval, set) {
                    (Some(iv), Some(s)) => vec![(op, iv, s)],
                    _ => continue,
                }
            }
            "until" => {
                // mu1 U[a,b] mu2  ==  Always[a, tau] mu1 AND Eventually[tau,
                // tau] mu2 for a chosen tau in [a, b].
                let tau = match t.tau {
                    Some(tau) if interval.is_some_and(|iv| iv.contains(tau)) => tau,
                    Some(tau) => {
                        errors.push(format!("{loc}: tau {tau} outside [{a}, {b}]"));
                        continue;
                    }
                    None => {
                        errors.push(format!("{loc}: until requires an explicit tau"));
                        continue;
                    }
                };
                let set2 = match &t.set2 {
                    Some(s2) => build_set(s2, &format!("{loc}.set2"), &mut errors),
                    None => {
                        errors.push(format!("{loc}: until requires set2"));
                        None
                    }
                };
                match (set, set2) {
                    (Some(s1), Some(s2)) => vec![
                        (TemporalOp::Always, TimeInterval::new(a, tau).unwrap(), s1),
                        (TemporalOp::Eventually, TimeInterval::instant(tau).unwrap(), s2),
                    ],
                    _ => continue,
                }
            }
            "recurrence" => {
                let period = match t.period {
                    Some(p) if p > 0.0 => p,
                    _ => {
                        errors.push(format!("{loc}: recurrence requires a positive period"));
                        continue;
                    }
                };
                let reps = match t.repetitions {
                    Some(k) if k > 0 => k,
                    _ => {
                        errors.push(format!(
                            "{loc}: recurrence requires a positive repetition count"
                        ));
                        continue;
                    }
                };
                match (interval, set) {
                    (Some(_), Some(s)) => (0..reps)
                        .map(|k| {
                            let shift = period * k as f64;
                            (
                                TemporalOp::Always,
                                TimeInterval::new(a + shift, b + shift).unwrap(),
                                s.clone(),
                            )
                        })
                        .collect(),
                    _ => continue,
                }
            }
            other => {
                errors.push(format!("{loc}: unknown operator {other:?}"));
                continue;
            }
        };

        let Some(binding) = binding else { continue };
        for (op, iv, s) in expanded {
            if s.dim() != dim {
                errors.push(format!(
                    "{loc}: truth set dimension {} does not match agent dimension {dim}",
                    s.dim()
                ));
                continue;
            }
            match TaskSpec::fixed(op, iv, binding, &s) {
                Ok(mut task) => {
                    if let Some(sync) = t.sync_time {
                        if op == TemporalOp::Eventually && !iv.contains(sync) {
                            errors.push(format!("{loc}: sync_time {sync} outside [{a}, {b}]"));
                            continue;
                        }
                        task.sync_time = Some(sync);
                    }
                    tasks.push(task);
                }
                Err(e) => errors.push(format!("{loc}: {e}")),
            }
        }
    }

    if !errors.is_empty() {
        return Err(LoadErrors(errors));
    }
    Ok(Scenario {
        name: file.name.clone(),
        radius: file.radius,
        seed: file.seed,
        agents: agents.into_iter().map(Option::unwrap).collect(),
        tokens,
        tasks,
        solver: file.solver.clone(),
        external_ids: ids,
    })
}
