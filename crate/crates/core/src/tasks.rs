//! STL task model and quantitative robust semantics.
//!
//! The supported fragment is conjunctions of `Always_[a,b] mu` and
//! `Eventually_[a,b] mu` where the predicate `mu` holds on a polytopic truth
//! set over either one agent's state (independent task) or a relative state
//! `e_ij = x_j - x_i` (collaborative task). Robustness follows the usual
//! min/max semantics: `Eventually` takes the max of the predicate margin over
//! the window, `Always` the min, conjunction the min over members; a task is
//! satisfied iff its robustness is nonnegative.
//!
//! Signals are piecewise-linear in time. Against polytopic predicates the
//! per-row margins are piecewise-linear too, so `Always` (a min) is exact on
//! the breakpoint grid; a configurable refinement grid guards the `Eventually`
//! case (a max of a piecewise-linear function can peak between breakpoints
//! only at predicate-row crossings, which refinement brackets).

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{Polytope, SimilarityParam};

/// Closed-interval comparison tolerance: touching intervals intersect.
pub const INTERVAL_TOL: f64 = 1e-9;
/// Default refinement points per evaluation interval.
pub const DEFAULT_REFINE: usize = 100;

/// Temporal operator of the fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalOp {
    Always,
    Eventually,
}

/// What state a task's predicate reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binding {
    /// Independent task on agent `i`'s own state.
    Agent(usize),
    /// Collaborative task on the relative state `e_ij = x_j - x_i`.
    /// Direction matters.
    EdgePair { i: usize, j: usize },
}

impl Binding {
    /// Agents referenced by this binding.
    pub fn agents(&self) -> (usize, Option<usize>) {
        match *self {
            Binding::Agent(i) => (i, None),
            Binding::EdgePair { i, j } => (i, Some(j)),
        }
    }
}

/// Closed time interval `[a, b]` in hours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeInterval {
    a: f64,
    b: f64,
}

impl TimeInterval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(0.0 <= a && a <= b) {
            return Err(Error::Contract(format!(
                "time interval needs 0 <= a <= b, got [{a}, {b}]"
            )));
        }
        Ok(Self { a, b })
    }

    /// Degenerate single-instant interval `[t, t]`.
    pub fn instant(t: f64) -> Result<Self> {
        Self::new(t, t)
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn length(&self) -> f64 {
        self.b - self.a
    }
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
    pub fn contains(&self, t: f64) -> bool {
        self.a - INTERVAL_TOL <= t && t <= self.b + INTERVAL_TOL
    }

    /// Closed-interval intersection (touching counts).
    pub fn intersect(&self, other: &TimeInterval) -> Option<TimeInterval> {
        let a = self.a.max(other.a);
        let b = self.b.min(other.b);
        if a <= b + INTERVAL_TOL {
            Some(TimeInterval { a, b: b.max(a) })
        } else {
            None
        }
    }

    /// Intersection of many intervals; `None` when empty or the list is empty.
    pub fn intersect_many<'a>(mut iter: impl Iterator<Item = &'a TimeInterval>) -> Option<TimeInterval> {
        let mut acc = *iter.next()?;
        for iv in iter {
            acc = acc.intersect(iv)?;
        }
        Some(acc)
    }

    /// Whether this interval is contained in `other` (with tolerance).
    pub fn within(&self, other: &TimeInterval) -> bool {
        other.a <= self.a + INTERVAL_TOL && self.b <= other.b + INTERVAL_TOL
    }

    /// Whether `intervals` covers `target`: every member overlaps the target
    /// and their merged union contains it (no interior gap).
    pub fn union_cover(intervals: &[TimeInterval], target: &TimeInterval) -> bool {
        if intervals.is_empty() {
            return false;
        }
        if intervals.iter().any(|iv| iv.intersect(target).is_none()) {
            return false;
        }
        let mut sorted: Vec<&TimeInterval> = intervals.iter().collect();
        sorted.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());
        let mut reach = target.a;
        for iv in sorted {
            if iv.a > reach + INTERVAL_TOL {
                return false; // gap before the next member starts
            }
            reach = reach.max(iv.b);
            if reach >= target.b - INTERVAL_TOL {
                return true;
            }
        }
        reach >= target.b - INTERVAL_TOL
    }
}

/// Where a decomposed task came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Origin {
    /// The inconsistent task edge being decomposed (directed as bound).
    pub edge: (usize, usize),
    /// Index of the task within that edge's task list.
    pub task_idx: usize,
}

/// One STL task of the fragment.
///
/// The truth set is stored in similarity form: a base shape `P(A, 0, z)` plus
/// a parameter `eta = [center; scale]`. Fixed tasks carry the identity
/// parameter `[c, 1]`; parametric tasks (created by decomposition) leave the
/// parameter to the optimizer.
#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub operator: TemporalOp,
    pub interval: TimeInterval,
    pub binding: Binding,
    /// Base shape `P(A, 0, z)`.
    pub base: Polytope,
    /// Similarity parameter; decision variable when `parametric`.
    pub param: SimilarityParam,
    pub parametric: bool,
    /// Set when this task results from decomposing an inconsistent edge.
    pub origin: Option<Origin>,
    /// Synchronized witness time for decomposed `Eventually` tasks.
    pub sync_time: Option<f64>,
}

impl TaskSpec {
    /// Fixed task with concrete truth set `P(A, c, z)`.
    pub fn fixed(
        operator: TemporalOp,
        interval: TimeInterval,
        binding: Binding,
        truth_set: &Polytope,
    ) -> Result<Self> {
        let base = Polytope::new(
            truth_set.a().clone(),
            DVector::zeros(truth_set.dim()),
            truth_set.z().clone(),
        )?;
        Ok(Self {
            operator,
            interval,
            binding,
            base,
            param: SimilarityParam::identity_of(truth_set),
            parametric: false,
            origin: None,
            sync_time: None,
        })
    }

    /// Parametric task (decomposition output placeholder). The parameter is
    /// initialized degenerate (`[0, 0]`) and replaced by the optimizer.
    pub fn parametric(
        operator: TemporalOp,
        interval: TimeInterval,
        binding: Binding,
        base: Polytope,
        origin: Origin,
        sync_time: Option<f64>,
    ) -> Result<Self> {
        if base.c().amax() > 1e-12 {
            return Err(Error::Contract(
                "parametric task base shape must be centered at 0".into(),
            ));
        }
        if operator == TemporalOp::Eventually && interval.length() > INTERVAL_TOL {
            return Err(Error::Contract(
                "decomposed Eventually tasks must be pinned to a single instant".into(),
            ));
        }
        let param = SimilarityParam::new(DVector::zeros(base.dim()), 0.0)?;
        Ok(Self {
            operator,
            interval,
            binding,
            base,
            param,
            parametric: true,
            origin: Some(origin),
            sync_time,
        })
    }

    /// The concrete truth set `P(A, param.center, param.scale * z)`.
    pub fn effective_set(&self) -> Result<Polytope> {
        Polytope::new(
            self.base.a().clone(),
            self.param.center().clone(),
            self.param.scale() * self.base.z(),
        )
    }

    /// Sign relating this task's frame to the canonical frame of its edge
    /// (relative state pointing from the lower to the higher agent id):
    /// `+1.0` when the binding already points that way, `-1.0` otherwise.
    pub fn frame_sign(&self) -> f64 {
        match self.binding {
            Binding::Agent(_) => 1.0,
            Binding::EdgePair { i, j } => {
                if i < j {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// The concrete truth set expressed in the canonical frame of the
    /// task's edge (reflected through the origin for opposing bindings).
    pub fn oriented_set(&self) -> Result<Polytope> {
        let set = self.effective_set()?;
        if self.frame_sign() > 0.0 {
            Ok(set)
        } else {
            Polytope::new(-set.a().clone(), -set.c(), set.z().clone())
        }
    }

    /// Replace the similarity parameter (used when instantiating a solved
    /// parametric task); clears the `parametric` flag.
    pub fn instantiated(&self, param: SimilarityParam) -> Result<Self> {
        if param.center().len() != self.base.dim() {
            return Err(Error::Dimension {
                context: "TaskSpec::instantiated",
                expected: self.base.dim(),
                got: param.center().len(),
            });
        }
        let mut out = self.clone();
        out.param = param;
        out.parametric = false;
        Ok(out)
    }
}

/// Piecewise-linear signal of stacked agent states.
#[derive(Debug, Clone)]
pub struct Signal {
    times: Vec<f64>,
    states: Vec<DVector<f64>>,
    n_agents: usize,
    state_dim: usize,
}

impl Signal {
    /// `states[k]` is the stacked state of all agents at `times[k]`
    /// (agent `i` occupies rows `i*state_dim .. (i+1)*state_dim`).
    pub fn new(times: Vec<f64>, states: Vec<DVector<f64>>, n_agents: usize) -> Result<Self> {
        if times.len() != states.len() || times.is_empty() {
            return Err(Error::Contract(format!(
                "signal needs matching nonempty times/states, got {}/{}",
                times.len(),
                states.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) && times.len() > 1 {
            return Err(Error::Contract("signal times must be strictly increasing".into()));
        }
        let total = states[0].len();
        if n_agents == 0 || total % n_agents != 0 {
            return Err(Error::Contract(format!(
                "stacked state length {total} is not a multiple of {n_agents} agents"
            )));
        }
        if states.iter().any(|s| s.len() != total) {
            return Err(Error::Contract("all signal states must share one dimension".into()));
        }
        Ok(Self {
            times,
            states,
            n_agents,
            state_dim: total / n_agents,
        })
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }
    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn n_agents(&self) -> usize {
        self.n_agents
    }
    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    /// Linear interpolation of the stacked state (clamped to the horizon).
    pub fn value_at(&self, t: f64) -> DVector<f64> {
        if t <= self.start() {
            return self.states[0].clone();
        }
        if t >= self.end() {
            return self.states.last().unwrap().clone();
        }
        let k = match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(k) => return self.states[k].clone(),
            Err(k) => k, // first index with time > t; k >= 1 here
        };
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        (1.0 - w) * &self.states[k - 1] + w * &self.states[k]
    }

    /// State of one agent at time `t`.
    pub fn agent_state(&self, i: usize, t: f64) -> Result<DVector<f64>> {
        if i >= self.n_agents {
            return Err(Error::Contract(format!(
                "agent {i} out of range ({} agents)",
                self.n_agents
            )));
        }
        let full = self.value_at(t);
        Ok(full.rows(i * self.state_dim, self.state_dim).into_owned())
    }

    /// Relative state `e_ij(t) = x_j(t) - x_i(t)`.
    pub fn relative_state(&self, i: usize, j: usize, t: f64) -> Result<DVector<f64>> {
        Ok(self.agent_state(j, t)? - self.agent_state(i, t)?)
    }

    /// The signal value a binding reads at time `t`.
    pub fn bound_state(&self, binding: &Binding, t: f64) -> Result<DVector<f64>> {
        match *binding {
            Binding::Agent(i) => self.agent_state(i, t),
            Binding::EdgePair { i, j } => self.relative_state(i, j, t),
        }
    }
}

/// Robustness of one task evaluated from start time `t0`, with the default
/// refinement grid.
pub fn robustness(sig: &Signal, task: &TaskSpec, t0: f64) -> Result<f64> {
    robustness_with_grid(sig, task, t0, DEFAULT_REFINE)
}

/// Robustness with an explicit refinement grid density.
///
/// The sampling grid is the union of the (shifted) interval endpoints, every
/// signal breakpoint inside the window, and `refine` evenly spaced points.
pub fn robustness_with_grid(sig: &Signal, task: &TaskSpec, t0: f64, refine: usize) -> Result<f64> {
    let a = t0 + task.interval.a();
    let b = t0 + task.interval.b();
    if a < sig.start() - INTERVAL_TOL || b > sig.end() + INTERVAL_TOL {
        return Err(Error::Horizon {
            sig_start: sig.start(),
            sig_end: sig.end(),
            a,
            b,
        });
    }
    let set = task.effective_set()?;
    let mut grid = vec![a, b];
    for &t in sig.times() {
        if t > a && t < b {
            grid.push(t);
        }
    }
    if refine > 0 && b > a {
        for k in 1..refine {
            grid.push(a + (b - a) * (k as f64) / (refine as f64));
        }
    }
    grid.sort_by(|p, q| p.partial_cmp(q).unwrap());
    grid.dedup_by(|p, q| (*p - *q).abs() < 1e-12);

    let mut best = match task.operator {
        TemporalOp::Eventually => f64::NEG_INFINITY,
        TemporalOp::Always => f64::INFINITY,
    };
    for &t in &grid {
        let x = sig.bound_state(&task.binding, t)?;
        let h = set.h_value(&x)?;
        best = match task.operator {
            TemporalOp::Eventually => best.max(h),
            TemporalOp::Always => best.min(h),
        };
    }
    Ok(best)
}

/// Robustness of a conjunction: the minimum over member robustness values.
pub fn robustness_conjunction(sig: &Signal, tasks: &[TaskSpec], t0: f64) -> Result<f64> {
    if tasks.is_empty() {
        return Err(Error::Contract("robustness of an empty conjunction".into()));
    }
    let mut worst = f64::INFINITY;
    for task in tasks {
        worst = worst.min(robustness(sig, task, t0)?);
    }
    Ok(worst)
}
