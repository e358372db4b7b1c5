//! Conflict families over a conjunction of tasks on one edge, their
//! maximal/minimal representatives, the potential-conflict index `Q` used by
//! the optimizer, and standalone detectors for the five conflict types
//! (including the cycle conditions).
//!
//! Family predicates are purely interval-based:
//! - `L`: nonempty subsets of the Always indices whose intervals all overlap.
//! - `C(d)`: subsets of Always indices whose interval union covers the
//!   Eventually interval of `d`, each member overlapping it.
//! - `D(d)`: subsets of Always indices whose interval intersection contains
//!   the Eventually interval of `d`.
//!
//! A conjunction is conflicting when one family member additionally has the
//! matching truth-set emptiness (intersection over `L` empty; each member of
//! `C` disjoint from `d`'s set; `d`'s set disjoint from the intersection over
//! `D`). It suffices to test maximal `L`/`D` and minimal `C` representatives.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{intersection_feasible_many, Polytope};
use crate::lp;
use crate::tasks::{Binding, TaskSpec, TemporalOp, TimeInterval};

/// Power-set enumeration cap on Always tasks per edge.
pub const ENUM_CAP: usize = 15;

/// Cap on accumulated vertex-sum points during cycle checks.
const CYCLE_POINT_CAP: usize = 200_000;

/// Indices of Always / Eventually tasks within one edge's task list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorPartition {
    pub i_g: Vec<usize>,
    pub i_f: Vec<usize>,
}

/// Classify each task of an edge by its temporal operator.
pub fn partition_operators(tasks: &[TaskSpec]) -> OperatorPartition {
    let mut i_g = Vec::new();
    let mut i_f = Vec::new();
    for (k, t) in tasks.iter().enumerate() {
        match t.operator {
            TemporalOp::Always => i_g.push(k),
            TemporalOp::Eventually => i_f.push(k),
        }
    }
    OperatorPartition { i_g, i_f }
}

/// Index set over one edge's task list.
pub type IndexSet = BTreeSet<usize>;

/// All conflict families of one edge, with representatives and the assembled
/// potential-conflict index `Q`.
#[derive(Debug, Clone)]
pub struct ConflictFamilies {
    /// Overlapping-Always family `L` (all members, singletons included).
    pub l_all: Vec<IndexSet>,
    /// Maximal members of `L`.
    pub l_max: Vec<IndexSet>,
    /// Cover family `C(d)` per Eventually index.
    pub c_all: BTreeMap<usize, Vec<IndexSet>>,
    /// Minimal members of `C(d)`.
    pub c_min: BTreeMap<usize, Vec<IndexSet>>,
    /// Containment family `D(d)` per Eventually index.
    pub d_all: BTreeMap<usize, Vec<IndexSet>>,
    /// Maximal members of `D(d)`.
    pub d_max: BTreeMap<usize, Vec<IndexSet>>,
    /// Potential-conflict sets, deduplicated, in deterministic order. Each
    /// gets one auxiliary witness variable.
    pub q: Vec<IndexSet>,
}

impl ConflictFamilies {
    /// Auxiliary-variable index of a potential-conflict set (`0`-based).
    pub fn y_q(&self, set: &IndexSet) -> Option<usize> {
        self.q.iter().position(|s| s == set)
    }

    /// Number of auxiliary witness variables.
    pub fn xi_count(&self) -> usize {
        self.q.len()
    }
}

fn nonempty_subsets(indices: &[usize]) -> Vec<IndexSet> {
    let n = indices.len();
    let mut out = Vec::with_capacity((1usize << n) - 1);
    for mask in 1u32..(1u32 << n) {
        let set: IndexSet = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| indices[i])
            .collect();
        out.push(set);
    }
    out
}

fn maximal(members: &[IndexSet]) -> Vec<IndexSet> {
    members
        .iter()
        .filter(|m| {
            !members
                .iter()
                .any(|other| *m != other && m.is_subset(other))
        })
        .cloned()
        .collect()
}

fn minimal(members: &[IndexSet]) -> Vec<IndexSet> {
    members
        .iter()
        .filter(|m| {
            !members
                .iter()
                .any(|other| *m != other && other.is_subset(m))
        })
        .cloned()
        .collect()
}

/// Enumerate the conflict families of one edge's task list and assemble the
/// potential-conflict index `Q`.
///
/// `parametric` holds the indices of tasks whose truth set is a decision
/// variable. Sets of `Q` touching no parametric index are dropped (the fixed
/// tasks are conflict-free by assumption), as are singletons (a parametric
/// set always contains its own center).
pub fn build_families(tasks: &[TaskSpec], parametric: &IndexSet) -> Result<ConflictFamilies> {
    let part = partition_operators(tasks);
    if part.i_g.len() > ENUM_CAP {
        return Err(Error::Capacity(part.i_g.len(), ENUM_CAP, 0, 0));
    }
    let interval = |k: usize| &tasks[k].interval;

    let mut l_all = Vec::new();
    for set in nonempty_subsets(&part.i_g) {
        if TimeInterval::intersect_many(set.iter().map(|&k| interval(k))).is_some() {
            l_all.push(set);
        }
    }
    let l_max = maximal(&l_all);

    let mut c_all = BTreeMap::new();
    let mut c_min = BTreeMap::new();
    let mut d_all = BTreeMap::new();
    let mut d_max = BTreeMap::new();
    for &d in &part.i_f {
        let target = interval(d);
        let mut covers = Vec::new();
        let mut contained = Vec::new();
        for set in nonempty_subsets(&part.i_g) {
            let ivs: Vec<TimeInterval> = set.iter().map(|&k| *interval(k)).collect();
            if TimeInterval::union_cover(&ivs, target) {
                covers.push(set.clone());
            }
            if let Some(common) = TimeInterval::intersect_many(set.iter().map(|&k| interval(k))) {
                if target.within(&common) {
                    contained.push(set);
                }
            }
        }
        c_min.insert(d, minimal(&covers));
        c_all.insert(d, covers);
        d_max.insert(d, maximal(&contained));
        d_all.insert(d, contained);
    }

    // Q: pair sets from minimal covers, {d} joined with each maximal
    // containment set, and the maximal Always sets. Dropped: sets touching no
    // parametric index, and singletons.
    let mut q_set: BTreeSet<IndexSet> = BTreeSet::new();
    for &d in &part.i_f {
        for c in &c_min[&d] {
            for &l in c {
                q_set.insert([d, l].into_iter().collect());
            }
        }
        for set in &d_max[&d] {
            let mut joined = set.clone();
            joined.insert(d);
            q_set.insert(joined);
        }
    }
    for set in &l_max {
        q_set.insert(set.clone());
    }
    let q: Vec<IndexSet> = q_set
        .into_iter()
        .filter(|s| s.len() >= 2 && s.iter().any(|k| parametric.contains(k)))
        .collect();

    Ok(ConflictFamilies {
        l_all,
        l_max,
        c_all,
        c_min,
        d_all,
        d_max,
        q,
    })
}

/// Which conflict condition fired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConflictKind {
    /// Overlapping Always tasks with empty common truth set.
    AlwaysIntersection,
    /// Eventually task blocked on a covering set of Always tasks.
    EventuallyCover,
    /// Eventually task blocked by a containing set of Always tasks.
    EventuallyContainment,
    /// Cycle of Always tasks whose set sum misses the origin.
    CycleAlways,
    /// Cycle with one Eventually task whose set sum misses the origin.
    CycleEventually,
}

/// One detected conflict, with the witnessing index set.
#[derive(Debug, Clone)]
pub struct ConflictReport {
    pub kind: ConflictKind,
    /// Indices of the Always tasks involved.
    pub indices: IndexSet,
    /// The Eventually index, when one is involved.
    pub eventually: Option<usize>,
}

/// Run the single-edge conflict checks over concrete truth sets.
///
/// Representatives suffice: an empty intersection over any overlapping-Always
/// set propagates to its maximal superset; a fully-blocked cover contains a
/// blocked minimal cover; a blocked containment set blocks its maximal
/// superset.
pub fn detect_conflicts_static(tasks: &[TaskSpec]) -> Result<Vec<ConflictReport>> {
    let all: IndexSet = (0..tasks.len()).collect();
    let fam = build_families(tasks, &all)?;
    // Tasks may bind the edge in either direction; compare truth sets in the
    // canonical edge frame.
    let sets: Vec<Polytope> = tasks
        .iter()
        .map(|t| t.oriented_set())
        .collect::<Result<_>>()?;

    let mut reports = Vec::new();
    for l in &fam.l_max {
        let members: Vec<&Polytope> = l.iter().map(|&k| &sets[k]).collect();
        if !intersection_feasible_many(&members).0 {
            reports.push(ConflictReport {
                kind: ConflictKind::AlwaysIntersection,
                indices: l.clone(),
                eventually: None,
            });
        }
    }
    for (&d, covers) in &fam.c_min {
        for c in covers {
            let all_disjoint = c.iter().all(|&l| {
                !intersection_feasible_many(&[&sets[d], &sets[l]]).0
            });
            if all_disjoint {
                reports.push(ConflictReport {
                    kind: ConflictKind::EventuallyCover,
                    indices: c.clone(),
                    eventually: Some(d),
                });
            }
        }
    }
    for (&d, containments) in &fam.d_max {
        for set in containments {
            let mut members: Vec<&Polytope> = vec![&sets[d]];
            members.extend(set.iter().map(|&k| &sets[k]));
            if !intersection_feasible_many(&members).0 {
                reports.push(ConflictReport {
                    kind: ConflictKind::EventuallyContainment,
                    indices: set.clone(),
                    eventually: Some(d),
                });
            }
        }
    }
    Ok(reports)
}

/// One edge of a cycle: the directed traversal pair and its task. The task's
/// binding must match the pair in either direction; an opposing binding flips
/// the truth set.
#[derive(Debug, Clone)]
pub struct CycleEdge {
    pub edge: (usize, usize),
    pub task: TaskSpec,
}

/// Run the cycle conflict checks: all-Always cycles need a common time point
/// and the origin inside the set sum; one-Eventually cycles need the Always
/// intervals to contain the Eventually interval and the same origin test.
pub fn detect_cycle_conflicts(cycle: &[CycleEdge]) -> Result<Option<ConflictReport>> {
    if cycle.len() < 2 {
        return Err(Error::Contract("a cycle needs at least two edges".into()));
    }
    for (a, b) in cycle.iter().zip(cycle.iter().cycle().skip(1)) {
        if a.edge.1 != b.edge.0 {
            return Err(Error::Contract(format!(
                "cycle edges ({}, {}) and ({}, {}) do not chain",
                a.edge.0, a.edge.1, b.edge.0, b.edge.1
            )));
        }
    }

    // Orient each truth set along the traversal direction.
    let mut oriented = Vec::with_capacity(cycle.len());
    for ce in cycle {
        let set = ce.task.effective_set()?;
        let (bi, bj) = match ce.task.binding {
            Binding::EdgePair { i, j } => (i, j),
            Binding::Agent(_) => {
                return Err(Error::Contract(
                    "cycle edges must carry collaborative tasks".into(),
                ))
            }
        };
        if (bi, bj) == ce.edge {
            oriented.push(set);
        } else if (bj, bi) == ce.edge {
            oriented.push(Polytope::new(-set.a().clone(), -set.c(), set.z().clone())?);
        } else {
            return Err(Error::Contract(format!(
                "task binding ({bi}, {bj}) does not match cycle edge ({}, {})",
                ce.edge.0, ce.edge.1
            )));
        }
    }

    let eventually: Vec<usize> = cycle
        .iter()
        .enumerate()
        .filter(|(_, ce)| ce.task.operator == TemporalOp::Eventually)
        .map(|(k, _)| k)
        .collect();
    let (kind, interval_ok) = match eventually.len() {
        0 => {
            let ok = TimeInterval::intersect_many(cycle.iter().map(|ce| &ce.task.interval))
                .is_some();
            (ConflictKind::CycleAlways, ok)
        }
        1 => {
            let d = eventually[0];
            let common = TimeInterval::intersect_many(
                cycle
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != d)
                    .map(|(_, ce)| &ce.task.interval),
            );
            let ok = match common {
                Some(c) => cycle[d].task.interval.within(&c),
                None => false,
            };
            (ConflictKind::CycleEventually, ok)
        }
        _ => {
            return Err(Error::Contract(
                "cycle check supports at most one Eventually task".into(),
            ))
        }
    };
    if !interval_ok {
        return Ok(None);
    }

    // Origin-in-sum test: 0 in conv of the pairwise vertex sums.
    let n = oriented[0].dim();
    let mut points: Vec<DVector<f64>> = vec![DVector::zeros(n)];
    for set in &oriented {
        let verts = set.vertices()?;
        if points.len() * verts.len() > CYCLE_POINT_CAP {
            return Err(Error::Capacity(points.len() * verts.len(), CYCLE_POINT_CAP, 0, 0));
        }
        points = points
            .iter()
            .flat_map(|p| verts.iter().map(move |v| p + v))
            .collect();
    }
    if origin_in_hull(&points, n) {
        return Ok(None);
    }
    Ok(Some(ConflictReport {
        kind,
        indices: (0..cycle.len()).collect(),
        eventually: eventually.first().copied(),
    }))
}

/// Feasibility of convex weights over `points` reaching the origin.
fn origin_in_hull(points: &[DVector<f64>], n: usize) -> bool {
    let m = points.len();
    let mut a_eq = DMatrix::<f64>::zeros(n + 1, m);
    let mut b_eq = DVector::<f64>::zeros(n + 1);
    for (k, p) in points.iter().enumerate() {
        for i in 0..n {
            a_eq[(i, k)] = p[i];
        }
        a_eq[(n, k)] = 1.0;
    }
    b_eq[n] = 1.0;
    // Nonnegativity of the weights.
    let a_ub = -DMatrix::<f64>::identity(m, m);
    let b_ub = DVector::<f64>::zeros(m);
    lp::feasible_point(&a_ub, &b_ub, &a_eq, &b_eq).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::regular_polytope;
    use crate::tasks::Binding;

    fn boxt(
        op: TemporalOp,
        a: f64,
        b: f64,
        cx: f64,
        cy: f64,
        r: f64,
    ) -> TaskSpec {
        let set = regular_polytope(4, r, &DVector::from_row_slice(&[cx, cy])).unwrap();
        TaskSpec::fixed(
            op,
            TimeInterval::new(a, b).unwrap(),
            Binding::EdgePair { i: 0, j: 1 },
            &set,
        )
        .unwrap()
    }

    fn sets(v: &[&[usize]]) -> Vec<IndexSet> {
        v.iter().map(|s| s.iter().cloned().collect()).collect()
    }

    #[test]
    fn operator_partition() {
        let tasks = vec![
            boxt(TemporalOp::Always, 0.0, 1.0, 0.0, 0.0, 1.0),
            boxt(TemporalOp::Eventually, 0.0, 1.0, 0.0, 0.0, 1.0),
            boxt(TemporalOp::Always, 0.0, 1.0, 0.0, 0.0, 1.0),
        ];
        let p = partition_operators(&tasks);
        assert_eq!(p.i_g, vec![0, 2]);
        assert_eq!(p.i_f, vec![1]);
    }

    // Three Always tasks with intervals [2,6], [0,3], [5,8] and an
    // Eventually task on [1,7]; sets placed so every family check passes.
    fn overlap_panel() -> Vec<TaskSpec> {
        vec![
            boxt(TemporalOp::Always, 2.0, 6.0, 0.0, 0.0, 1.0), // l1
            boxt(TemporalOp::Always, 0.0, 3.0, 1.5, 0.0, 1.0), // l2
            boxt(TemporalOp::Always, 5.0, 8.0, -1.5, 0.0, 1.0), // l3
            boxt(TemporalOp::Eventually, 1.0, 7.0, 0.0, 1.5, 1.0), // d
        ]
    }

    #[test]
    fn overlap_panel_families() {
        let tasks = overlap_panel();
        let all: IndexSet = (0..4).collect();
        let fam = build_families(&tasks, &all).unwrap();

        let mut l = fam.l_all.clone();
        l.sort();
        let mut expect = sets(&[&[0, 1], &[0, 2], &[0], &[1], &[2]]);
        expect.sort();
        assert_eq!(l, expect);

        assert_eq!(fam.c_all[&3], sets(&[&[0, 1, 2]]));
        assert!(fam.d_all[&3].is_empty());
    }

    #[test]
    fn overlap_panel_has_no_conflict() {
        let reports = detect_conflicts_static(&overlap_panel()).unwrap();
        assert!(reports.is_empty(), "unexpected: {reports:?}");
    }

    // Two nested Always intervals [0,10], [2,8] and an Eventually on [3,6].
    fn containment_panel() -> Vec<TaskSpec> {
        vec![
            boxt(TemporalOp::Always, 0.0, 10.0, 0.0, 0.0, 1.0), // l1
            boxt(TemporalOp::Always, 2.0, 8.0, 0.5, 0.0, 1.0),  // l2
            boxt(TemporalOp::Eventually, 3.0, 6.0, 0.0, 0.5, 1.0), // d
        ]
    }

    #[test]
    fn containment_panel_families() {
        let tasks = containment_panel();
        let all: IndexSet = (0..3).collect();
        let fam = build_families(&tasks, &all).unwrap();
        let mut d = fam.d_all[&2].clone();
        d.sort();
        let mut expect = sets(&[&[0], &[1], &[0, 1]]);
        expect.sort();
        assert_eq!(d, expect);
        assert_eq!(fam.d_max[&2], sets(&[&[0, 1]]));
        assert!(detect_conflicts_static(&tasks).unwrap().is_empty());
    }

    #[test]
    fn single_always_task() {
        let tasks = vec![boxt(TemporalOp::Always, 0.0, 1.0, 0.0, 0.0, 1.0)];
        let all: IndexSet = [0].into_iter().collect();
        let fam = build_families(&tasks, &all).unwrap();
        assert_eq!(fam.l_max, sets(&[&[0]]));
        // A lone parametric set always holds its own center: no constraint.
        assert!(fam.q.is_empty());
    }

    #[test]
    fn q_assembly_and_bijection() {
        // Two overlapping parametric Always tasks plus an Eventually inside
        // both intervals.
        let tasks = vec![
            boxt(TemporalOp::Always, 0.0, 10.0, 0.0, 0.0, 1.0),
            boxt(TemporalOp::Always, 2.0, 8.0, 0.5, 0.0, 1.0),
            boxt(TemporalOp::Eventually, 3.0, 6.0, 0.0, 0.5, 1.0),
        ];
        let all: IndexSet = (0..3).collect();
        let fam = build_families(&tasks, &all).unwrap();
        let mut q = fam.q.clone();
        q.sort();
        let mut expect = sets(&[&[0, 1], &[0, 1, 2], &[0, 2], &[1, 2]]);
        expect.sort();
        assert_eq!(q, expect);
        // y_q is a bijection onto 0..|Q|.
        let mut hits: Vec<usize> = fam.q.iter().map(|s| fam.y_q(s).unwrap()).collect();
        hits.sort_unstable();
        assert_eq!(hits, (0..fam.q.len()).collect::<Vec<_>>());
    }

    #[test]
    fn q_drops_fixed_only_sets() {
        let tasks = vec![
            boxt(TemporalOp::Always, 0.0, 10.0, 0.0, 0.0, 1.0),
            boxt(TemporalOp::Always, 2.0, 8.0, 0.5, 0.0, 1.0),
        ];
        // Neither task parametric: everything filtered out.
        let fam = build_families(&tasks, &IndexSet::new()).unwrap();
        assert!(fam.q.is_empty());
        // One parametric index keeps the pair.
        let fam = build_families(&tasks, &[1].into_iter().collect()).unwrap();
        assert_eq!(fam.q, sets(&[&[0, 1]]));
    }

    #[test]
    fn enumeration_cap() {
        let tasks: Vec<TaskSpec> = (0..16)
            .map(|_| boxt(TemporalOp::Always, 0.0, 1.0, 0.0, 0.0, 1.0))
            .collect();
        let all: IndexSet = (0..16).collect();
        assert!(matches!(
            build_families(&tasks, &all),
            Err(Error::Capacity(16, ENUM_CAP, _, _))
        ));
    }

    #[test]
    fn disjoint_always_boxes_conflict() {
        let tasks = vec![
            boxt(TemporalOp::Always, 0.0, 5.0, 0.0, 0.0, 1.0),
            boxt(TemporalOp::Always, 3.0, 8.0, 10.0, 0.0, 1.0),
        ];
        let reports = detect_conflicts_static(&tasks).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].kind, ConflictKind::AlwaysIntersection);
        assert_eq!(reports[0].indices, [0, 1].into_iter().collect());
    }

    #[test]
    fn covered_eventually_conflict() {
        // Eventually on [2,4] fully covered (and contained) by an Always on
        // [0,5] with a disjoint set: both the cover and containment checks
        // fire.
        let tasks = vec![
            boxt(TemporalOp::Always, 0.0, 5.0, 0.0, 0.0, 1.0),
            boxt(TemporalOp::Eventually, 2.0, 4.0, 10.0, 0.0, 1.0),
        ];
        let reports = detect_conflicts_static(&tasks).unwrap();
        let kinds: Vec<&ConflictKind> = reports.iter().map(|r| &r.kind).collect();
        assert!(kinds.contains(&&ConflictKind::EventuallyCover));
        assert!(kinds.contains(&&ConflictKind::EventuallyContainment));
    }

    fn cycle_edge(i: usize, j: usize, op: TemporalOp, cx: f64, cy: f64, r: f64) -> CycleEdge {
        let set = regular_polytope(4, r, &DVector::from_row_slice(&[cx, cy])).unwrap();
        CycleEdge {
            edge: (i, j),
            task: TaskSpec::fixed(
                op,
                TimeInterval::new(0.0, 5.0).unwrap(),
                Binding::EdgePair { i, j },
                &set,
            )
            .unwrap(),
        }
    }

    #[test]
    fn centered_triangle_has_no_cycle_conflict() {
        let cycle = vec![
            cycle_edge(0, 1, TemporalOp::Always, 0.0, 0.0, 1.0),
            cycle_edge(1, 2, TemporalOp::Always, 0.0, 0.0, 1.0),
            cycle_edge(2, 0, TemporalOp::Always, 0.0, 0.0, 1.0),
        ];
        assert!(detect_cycle_conflicts(&cycle).unwrap().is_none());
    }

    #[test]
    fn displaced_triangle_conflicts() {
        // Centers sum to (10, 0) while the extents sum to 3: the set sum
        // cannot reach the origin.
        let cycle = vec![
            cycle_edge(0, 1, TemporalOp::Always, 4.0, 0.0, 1.0),
            cycle_edge(1, 2, TemporalOp::Always, 4.0, 0.0, 1.0),
            cycle_edge(2, 0, TemporalOp::Always, 2.0, 0.0, 1.0),
        ];
        let report = detect_cycle_conflicts(&cycle).unwrap().unwrap();
        assert_eq!(report.kind, ConflictKind::CycleAlways);
    }

    #[test]
    fn cycle_orientation_flips_opposing_bindings() {
        // Same displaced triangle, but the last task binds (0, 2) while the
        // cycle traverses (2, 0): its set is reflected, moving the sum by
        // (-4, 0) instead of (+2, 0). Still short of the origin.
        let mut cycle = vec![
            cycle_edge(0, 1, TemporalOp::Always, 4.0, 0.0, 1.0),
            cycle_edge(1, 2, TemporalOp::Always, 4.0, 0.0, 1.0),
            cycle_edge(2, 0, TemporalOp::Always, 2.0, 0.0, 1.0),
        ];
        cycle[2].task.binding = Binding::EdgePair { i: 0, j: 2 };
        let report = detect_cycle_conflicts(&cycle).unwrap().unwrap();
        assert_eq!(report.kind, ConflictKind::CycleAlways);

        // With the reflected set at (-8, 0) the sum spans the origin.
        let mut balanced = vec![
            cycle_edge(0, 1, TemporalOp::Always, 4.0, 0.0, 1.0),
            cycle_edge(1, 2, TemporalOp::Always, 4.0, 0.0, 1.0),
            cycle_edge(2, 0, TemporalOp::Always, 8.0, 0.0, 1.0),
        ];
        balanced[2].task.binding = Binding::EdgePair { i: 0, j: 2 };
        assert!(detect_cycle_conflicts(&balanced).unwrap().is_none());
    }

    #[test]
    fn eventually_cycle_conflict() {
        // One Eventually whose interval sits inside all Always intervals;
        // displaced sets conflict, centered sets do not.
        let mut cycle = vec![
            cycle_edge(0, 1, TemporalOp::Eventually, 4.0, 0.0, 1.0),
            cycle_edge(1, 2, TemporalOp::Always, 4.0, 0.0, 1.0),
            cycle_edge(2, 0, TemporalOp::Always, 2.0, 0.0, 1.0),
        ];
        cycle[0].task.interval = TimeInterval::new(1.0, 2.0).unwrap();
        let report = detect_cycle_conflicts(&cycle).unwrap().unwrap();
        assert_eq!(report.kind, ConflictKind::CycleEventually);
        assert_eq!(report.eventually, Some(0));

        // Interval condition broken: the Eventually interval pokes outside
        // the Always intersection, so no conflict is claimed.
        cycle[0].task.interval = TimeInterval::new(1.0, 9.0).unwrap();
        assert!(detect_cycle_conflicts(&cycle).unwrap().is_none());
    }

    #[test]
    fn malformed_cycles_rejected() {
        let open = vec![
            cycle_edge(0, 1, TemporalOp::Always, 0.0, 0.0, 1.0),
            cycle_edge(1, 2, TemporalOp::Always, 0.0, 0.0, 1.0),
            cycle_edge(2, 3, TemporalOp::Always, 0.0, 0.0, 1.0),
        ];
        assert!(matches!(
            detect_cycle_conflicts(&open),
            Err(Error::Contract(_))
        ));
    }
}
