//! H-representation polytope kernel.
//!
//! A polytope is stored as `P(A, c, z) = {x | A(x - c) <= z}` with the
//! associated functional form
//!
//! ```text
//! h(x) = min_i -(a_i'(x - c) - z_i),      x in P  <=>  h(x) >= 0.
//! ```
//!
//! On top of that sit the similarity machinery (`eta = [center; scale]`
//! parameterizing `P(A, center, scale * z)` against a base shape), generator
//! matrices `G_k = [I | v_k]` mapping `eta` to vertices, Minkowski sums of
//! similar polytopes, and inclusion / intersection certificates.
//!
//! Vertex enumeration is exhaustive over all `n`-subsets of hyperplanes with
//! a feasibility filter — exact and fast at desk scale (dimension 2–3, facet
//! counts <= ~10).

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lp::{self, LpOutcome};

/// Absolute coordinate tolerance for vertex deduplication.
pub const VERTEX_TOL: f64 = 1e-9;
/// Tolerance for inclusion / feasibility certificates.
pub const FEAS_TOL: f64 = 1e-7;

/// Bounded convex polytope in H-representation `{x | A(x - c) <= z}`.
#[derive(Debug, Clone)]
pub struct Polytope {
    a: DMatrix<f64>,
    c: DVector<f64>,
    z: DVector<f64>,
    empty: bool,
    vertices: OnceLock<Vec<DVector<f64>>>,
}

impl Polytope {
    /// Build a polytope, verifying dimensions and boundedness.
    ///
    /// Emptiness is legal (an empty polytope is a detectable state used by
    /// conflict detection); unboundedness is not.
    pub fn new(a: DMatrix<f64>, c: DVector<f64>, z: DVector<f64>) -> Result<Self> {
        if a.ncols() != c.len() {
            return Err(Error::Dimension {
                context: "Polytope normals vs center",
                expected: a.ncols(),
                got: c.len(),
            });
        }
        if a.nrows() != z.len() {
            return Err(Error::Dimension {
                context: "Polytope normals vs offsets",
                expected: a.nrows(),
                got: z.len(),
            });
        }
        if a.nrows() == 0 {
            return Err(Error::Contract("polytope needs at least one facet".into()));
        }
        let empty = Self::h_rep_empty(&a, &c, &z);
        if !empty {
            // Rule out every recession direction: max/min of each coordinate
            // must be finite.
            for k in 0..a.ncols() {
                for sign in [1.0, -1.0] {
                    let mut obj = DVector::zeros(a.ncols());
                    obj[k] = sign;
                    let b = &z + &a * &c;
                    if matches!(
                        lp::solve_lp(&obj, &a, &b, &DMatrix::zeros(0, 0), &DVector::zeros(0)),
                        LpOutcome::Unbounded
                    ) {
                        return Err(Error::Unbounded);
                    }
                }
            }
        }
        Ok(Self {
            a,
            c,
            z,
            empty,
            vertices: OnceLock::new(),
        })
    }

    fn h_rep_empty(a: &DMatrix<f64>, c: &DVector<f64>, z: &DVector<f64>) -> bool {
        let b = z + a * c;
        lp::feasible_point(a, &b, &DMatrix::zeros(0, 0), &DVector::zeros(0)).is_none()
    }

    /// Hyperplane normal matrix `A`.
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    /// Center `c`.
    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }
    /// Offset vector `z`.
    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }
    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.a.ncols()
    }
    /// Number of facet rows `m`.
    pub fn num_rows(&self) -> usize {
        self.a.nrows()
    }
    /// Whether the H-representation is infeasible.
    pub fn is_empty(&self) -> bool {
        self.empty
    }

    /// Functional form `h(x) = min_i -(a_i'(x - c) - z_i)`; `>= 0` iff `x` is
    /// in the set.
    pub fn h_value(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                context: "h_value point",
                expected: self.dim(),
                got: x.len(),
            });
        }
        let lhs = &self.a * (x - &self.c);
        let mut h = f64::INFINITY;
        for i in 0..self.num_rows() {
            h = h.min(self.z[i] - lhs[i]);
        }
        Ok(h)
    }

    /// Membership test (closed set, exact zero boundary).
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.h_value(x).map(|h| h >= 0.0).unwrap_or(false)
    }

    /// Minimal vertex set, deduplicated within [`VERTEX_TOL`].
    ///
    /// Computed once and cached; the polytope must be nonempty and of
    /// dimension <= 3.
    pub fn vertices(&self) -> Result<&[DVector<f64>]> {
        if self.empty {
            return Err(Error::EmptySet);
        }
        if self.dim() > 3 {
            return Err(Error::Contract(format!(
                "vertex enumeration supports dimension <= 3, got {}",
                self.dim()
            )));
        }
        if let Some(v) = self.vertices.get() {
            return Ok(v);
        }
        let verts = self.enumerate_vertices()?;
        let _ = self.vertices.set(verts);
        Ok(self.vertices.get().expect("just set"))
    }

    /// Exhaustive `n`-subset hyperplane intersection with feasibility filter.
    fn enumerate_vertices(&self) -> Result<Vec<DVector<f64>>> {
        let n = self.dim();
        let m = self.num_rows();
        let mut found: Vec<DVector<f64>> = Vec::new();
        let mut subset = vec![0usize; n];
        let mut push_candidate = |x: &DVector<f64>| {
            if !found
                .iter()
                .any(|v| (v - x).amax() <= VERTEX_TOL)
            {
                found.push(x.clone());
            }
        };

        // Iterate all strictly increasing index tuples of length n.
        let mut stack: Vec<usize> = vec![];
        fn for_each_subset(
            m: usize,
            n: usize,
            start: usize,
            stack: &mut Vec<usize>,
            f: &mut impl FnMut(&[usize]),
        ) {
            if stack.len() == n {
                f(stack);
                return;
            }
            for i in start..m {
                stack.push(i);
                for_each_subset(m, n, i + 1, stack, f);
                stack.pop();
            }
        }

        let _ = &mut subset;
        for_each_subset(m, n, 0, &mut stack, &mut |rows: &[usize]| {
            let mut sub = DMatrix::<f64>::zeros(n, n);
            let mut rhs = DVector::<f64>::zeros(n);
            for (r, &row) in rows.iter().enumerate() {
                for j in 0..n {
                    sub[(r, j)] = self.a[(row, j)];
                }
                rhs[r] = self.z[row];
            }
            let lu = sub.clone().full_piv_lu();
            // Skip near-singular subsets (parallel facets).
            let diag_min = (0..n)
                .map(|i| lu.u()[(i, i)].abs())
                .fold(f64::INFINITY, f64::min);
            if diag_min < 1e-10 {
                return;
            }
            if let Some(y) = lu.solve(&rhs) {
                // Feasibility filter in shifted coordinates.
                let slack = &self.z - &self.a * &y;
                if (0..m).all(|i| slack[i] >= -FEAS_TOL) {
                    let x = &y + &self.c;
                    push_candidate(&x);
                }
            }
        });

        if found.is_empty() {
            return Err(Error::Internal(
                "nonempty bounded polytope produced no vertices".into(),
            ));
        }
        Ok(found)
    }

    /// Axis-aligned bounding box of the vertex set: `(lower, upper)`.
    pub fn bounding_box(&self) -> Result<(DVector<f64>, DVector<f64>)> {
        let verts = self.vertices()?;
        let n = self.dim();
        let mut lo = DVector::from_element(n, f64::INFINITY);
        let mut hi = DVector::from_element(n, f64::NEG_INFINITY);
        for v in verts {
            for k in 0..n {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Ok((lo, hi))
    }
}

/// Similarity parameter `eta = [center; scale]` describing `P(A, center,
/// scale * z)` against a base shape `P(A, 0, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityParam {
    center: DVector<f64>,
    scale: f64,
}

impl SimilarityParam {
    pub fn new(center: DVector<f64>, scale: f64) -> Result<Self> {
        if scale < 0.0 {
            return Err(Error::Contract(format!(
                "similarity scale must be nonnegative, got {scale}"
            )));
        }
        Ok(Self { center, scale })
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The stacked `(n+1)`-vector `[center; scale]`.
    pub fn as_vector(&self) -> DVector<f64> {
        let n = self.center.len();
        let mut v = DVector::zeros(n + 1);
        v.rows_mut(0, n).copy_from(&self.center);
        v[n] = self.scale;
        v
    }

    /// Inverse of [`Self::as_vector`].
    pub fn from_vector(v: &DVector<f64>) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::Contract("eta vector needs at least 2 entries".into()));
        }
        let n = v.len() - 1;
        Self::new(v.rows(0, n).into_owned(), v[n])
    }

    /// The identity parameter `[c, 1]` of a concrete polytope.
    pub fn identity_of(p: &Polytope) -> Self {
        Self {
            center: p.c().clone(),
            scale: 1.0,
        }
    }
}

/// Generator matrices `G_k = [I_n | v_k]`, one per base vertex, so that
/// `G_k eta = scale * v_k + center` is the corresponding vertex of the
/// similar polytope.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    blocks: Vec<DMatrix<f64>>,
    dim: usize,
}

impl GeneratorMatrix {
    /// Build from the vertex set of a base polytope (typically `P(A, 0, z)`).
    pub fn from_base(base: &Polytope) -> Result<Self> {
        let n = base.dim();
        let verts = base.vertices()?;
        let blocks = verts
            .iter()
            .map(|v| {
                let mut g = DMatrix::<f64>::zeros(n, n + 1);
                for i in 0..n {
                    g[(i, i)] = 1.0;
                    g[(i, n)] = v[i];
                }
                g
            })
            .collect();
        Ok(Self { blocks, dim: n })
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }
    pub fn len(&self) -> usize {
        self.blocks.len()
    }
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Map a similarity parameter to the vertex set `{G_k eta}` of the
    /// similar polytope.
    pub fn apply(&self, eta: &SimilarityParam) -> Result<Vec<DVector<f64>>> {
        if eta.center().len() != self.dim {
            return Err(Error::Dimension {
                context: "apply_similarity center",
                expected: self.dim,
                got: eta.center().len(),
            });
        }
        let v = eta.as_vector();
        Ok(self.blocks.iter().map(|g| g * &v).collect())
    }
}

/// A polytope similar to a base shape: `P(base.A, eta.center, eta.scale * base.z)`.
#[derive(Debug, Clone)]
pub struct SimilarPolytope {
    base: Polytope,
    param: SimilarityParam,
}

impl SimilarPolytope {
    /// `base` must be centered at the origin (`c = 0`).
    pub fn new(base: Polytope, param: SimilarityParam) -> Result<Self> {
        if base.c().amax() > VERTEX_TOL {
            return Err(Error::Contract(
                "similar-polytope base must have center 0".into(),
            ));
        }
        if base.dim() != param.center().len() {
            return Err(Error::Dimension {
                context: "SimilarPolytope base vs param",
                expected: base.dim(),
                got: param.center().len(),
            });
        }
        Ok(Self { base, param })
    }

    /// Wrap a concrete polytope as the identity similarity of its own shape.
    pub fn from_concrete(p: &Polytope) -> Result<Self> {
        let base = Polytope::new(p.a().clone(), DVector::zeros(p.dim()), p.z().clone())?;
        let param = SimilarityParam::new(p.c().clone(), 1.0)?;
        Self::new(base, param)
    }

    pub fn base(&self) -> &Polytope {
        &self.base
    }
    pub fn param(&self) -> &SimilarityParam {
        &self.param
    }

    /// Instantiate the concrete polytope `P(A, center, scale * z)`.
    pub fn concrete(&self) -> Result<Polytope> {
        Polytope::new(
            self.base.a().clone(),
            self.param.center().clone(),
            self.param.scale() * self.base.z(),
        )
    }
}

/// Result of an inclusion test between similar polytopes.
#[derive(Debug, Clone)]
pub struct InclusionCert {
    /// Whether the inclusion holds within [`FEAS_TOL`].
    pub holds: bool,
    /// Full left-hand-side residual vector (all entries `<= 0` on success).
    pub residual: DVector<f64>,
}

/// Check `P(A1, c1, a1*z1) ⊆ P(A2, c2, a2*z2)` by testing every vertex of the
/// first set against the second: the stacked condition is
/// `M2 eta1 - Z2 eta2 <= 0` with `M2` stacking `A2 G_k` over the base-1
/// vertices and `Z2 = 1 ⊗ [A2 | z2]`.
pub fn inclusion_check(p1: &SimilarPolytope, p2: &SimilarPolytope) -> Result<InclusionCert> {
    let n = p1.base.dim();
    if p2.base.dim() != n {
        return Err(Error::Dimension {
            context: "inclusion_check dimensions",
            expected: n,
            got: p2.base.dim(),
        });
    }
    let g1 = GeneratorMatrix::from_base(&p1.base)?;
    let a2 = p2.base.a();
    let z2 = p2.base.z();
    let m2 = a2.nrows();
    let eta1 = p1.param.as_vector();
    let eta2 = p2.param.as_vector();

    let mut residual = DVector::<f64>::zeros(m2 * g1.len());
    for (k, gk) in g1.blocks().iter().enumerate() {
        // [A2 | z2] eta2 = A2 c2 + a2-scale * z2
        let a2gk = a2 * gk;
        let lhs = &a2gk * &eta1;
        let rhs = a2 * eta2.rows(0, n) + eta2[n] * z2;
        for i in 0..m2 {
            residual[k * m2 + i] = lhs[i] - rhs[i];
        }
    }
    let holds = residual.max() <= FEAS_TOL;
    Ok(InclusionCert { holds, residual })
}

/// Minkowski sum of polytopes similar to a common base `P(A, 0, z)`:
/// the sum is `P(A, sum centers, (sum scales) * z)`.
pub fn minkowski_sum_similar(base: &Polytope, etas: &[SimilarityParam]) -> Result<Polytope> {
    if etas.is_empty() {
        return Err(Error::EmptySum);
    }
    if base.c().amax() > VERTEX_TOL {
        return Err(Error::Contract("Minkowski base must have center 0".into()));
    }
    let n = base.dim();
    let mut center = DVector::<f64>::zeros(n);
    let mut scale = 0.0;
    for eta in etas {
        if eta.center().len() != n {
            return Err(Error::Dimension {
                context: "minkowski_sum_similar eta",
                expected: n,
                got: eta.center().len(),
            });
        }
        center += eta.center();
        scale += eta.scale();
    }
    Polytope::new(base.a().clone(), center, scale * base.z())
}

/// Feasibility of `P1 ∩ P2` by linear programming; returns a witness point
/// in both sets when nonempty.
pub fn intersection_feasible(p1: &Polytope, p2: &Polytope) -> (bool, Option<DVector<f64>>) {
    let n = p1.dim();
    let m1 = p1.num_rows();
    let m2 = p2.num_rows();
    let mut a = DMatrix::<f64>::zeros(m1 + m2, n);
    let mut b = DVector::<f64>::zeros(m1 + m2);
    a.rows_mut(0, m1).copy_from(p1.a());
    a.rows_mut(m1, m2).copy_from(p2.a());
    b.rows_mut(0, m1).copy_from(&(p1.z() + p1.a() * p1.c()));
    b.rows_mut(m1, m2).copy_from(&(p2.z() + p2.a() * p2.c()));
    match lp::feasible_point(&a, &b, &DMatrix::zeros(0, 0), &DVector::zeros(0)) {
        Some(x) => (true, Some(x)),
        None => (false, None),
    }
}

/// Feasibility of the intersection of many polytopes; witness on success.
pub fn intersection_feasible_many(ps: &[&Polytope]) -> (bool, Option<DVector<f64>>) {
    assert!(!ps.is_empty());
    let n = ps[0].dim();
    let rows: usize = ps.iter().map(|p| p.num_rows()).sum();
    let mut a = DMatrix::<f64>::zeros(rows, n);
    let mut b = DVector::<f64>::zeros(rows);
    let mut at = 0;
    for p in ps {
        let m = p.num_rows();
        a.rows_mut(at, m).copy_from(p.a());
        b.rows_mut(at, m).copy_from(&(p.z() + p.a() * p.c()));
        at += m;
    }
    match lp::feasible_point(&a, &b, &DMatrix::zeros(0, 0), &DVector::zeros(0)) {
        Some(x) => (true, Some(x)),
        None => (false, None),
    }
}

/// Regular polygon with `n_sides` facets, each at distance `beta` from
/// `center` (dimension 2).
pub fn regular_polytope(n_sides: usize, beta: f64, center: &DVector<f64>) -> Result<Polytope> {
    if n_sides < 3 {
        return Err(Error::Contract(format!(
            "a regular polytope needs at least 3 sides, got {n_sides}"
        )));
    }
    if beta <= 0.0 {
        return Err(Error::Contract(format!(
            "regular polytope distance must be positive, got {beta}"
        )));
    }
    if center.len() != 2 {
        return Err(Error::Dimension {
            context: "regular_polytope center",
            expected: 2,
            got: center.len(),
        });
    }
    let mut a = DMatrix::<f64>::zeros(n_sides, 2);
    for k in 0..n_sides {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n_sides as f64);
        a[(k, 0)] = theta.cos();
        a[(k, 1)] = theta.sin();
    }
    let z = DVector::from_element(n_sides, beta);
    Polytope::new(a, center.clone(), z)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unit_box() -> Polytope {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        Polytope::new(a, DVector::zeros(2), DVector::from_element(4, 1.0)).unwrap()
    }

    fn v2(x: f64, y: f64) -> DVector<f64> {
        DVector::from_row_slice(&[x, y])
    }

    #[test]
    fn h_value_box_examples() {
        let p = unit_box();
        assert_eq!(p.h_value(&v2(0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(p.h_value(&v2(1.0, 0.0)).unwrap(), 0.0);
        assert_eq!(p.h_value(&v2(2.0, 0.0)).unwrap(), -1.0);
    }

    #[test]
    fn h_value_dimension_mismatch() {
        let p = unit_box();
        assert!(matches!(
            p.h_value(&DVector::zeros(3)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn unit_box_vertices() {
        let p = unit_box();
        let verts = p.vertices().unwrap();
        assert_eq!(verts.len(), 4);
        for (x, y) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            assert!(
                verts.iter().any(|v| (v - v2(x, y)).amax() < 1e-12),
                "missing vertex ({x},{y})"
            );
        }
    }

    #[test]
    fn hexagon_vertices_at_expected_radius() {
        // Regular hexagon at facet distance 0.4: vertices sit at radius
        // 0.4 / cos(pi/6).
        let p = regular_polytope(6, 0.4, &v2(0.0, 0.0)).unwrap();
        let verts = p.vertices().unwrap();
        assert_eq!(verts.len(), 6);
        let r = 0.4 / (std::f64::consts::PI / 6.0).cos();
        for v in verts {
            assert!((v.norm() - r).abs() < 1e-9, "vertex {v:?} not at radius {r}");
        }
    }

    #[test]
    fn triangle_vertices() {
        let a = DMatrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 1.0, 1.0]);
        let p = Polytope::new(a, DVector::zeros(2), DVector::from_row_slice(&[0.0, 0.0, 1.0]))
            .unwrap();
        let verts = p.vertices().unwrap();
        assert_eq!(verts.len(), 3);
        for (x, y) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)] {
            assert!(verts.iter().any(|v| (v - v2(x, y)).amax() < 1e-9));
        }
    }

    #[test]
    fn unbounded_rejected() {
        // Half-plane only.
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let r = Polytope::new(a, DVector::zeros(2), DVector::from_element(1, 1.0));
        assert!(matches!(r, Err(Error::Unbounded)));
    }

    #[test]
    fn empty_polytope_detected() {
        // x <= -1 and x >= 1 with y boxed.
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let z = DVector::from_row_slice(&[-1.0, -1.0, 1.0, 1.0]);
        let p = Polytope::new(a, DVector::zeros(2), z).unwrap();
        assert!(p.is_empty());
        assert!(matches!(p.vertices(), Err(Error::EmptySet)));
    }

    #[test]
    fn apply_similarity_examples() {
        let base = unit_box();
        let g = GeneratorMatrix::from_base(&base).unwrap();

        // Identity leaves vertices unchanged.
        let id = SimilarityParam::new(DVector::zeros(2), 1.0).unwrap();
        let vs = g.apply(&id).unwrap();
        for v in &vs {
            assert!(base.vertices().unwrap().iter().any(|w| (w - v).amax() < 1e-12));
        }

        // eta = [(1,2), 2] maps vertex (1,1) to (3,4).
        let eta = SimilarityParam::new(v2(1.0, 2.0), 2.0).unwrap();
        let vs = g.apply(&eta).unwrap();
        assert!(vs.iter().any(|v| (v - v2(3.0, 4.0)).amax() < 1e-12));

        // alpha = 0 collapses everything to the center.
        let eta0 = SimilarityParam::new(v2(5.0, -3.0), 0.0).unwrap();
        for v in g.apply(&eta0).unwrap() {
            assert!((v - v2(5.0, -3.0)).amax() < 1e-12);
        }
    }

    #[test]
    fn similarity_vertices_commute() {
        // ν(P(A, c, αz)) equals {G_k η} as sets for α > 0.
        let base = regular_polytope(5, 0.7, &v2(0.0, 0.0)).unwrap();
        let g = GeneratorMatrix::from_base(&base).unwrap();
        let eta = SimilarityParam::new(v2(2.0, -1.0), 1.7).unwrap();
        let mapped = g.apply(&eta).unwrap();
        let concrete = SimilarPolytope::new(base, eta).unwrap().concrete().unwrap();
        let direct = concrete.vertices().unwrap();
        assert_eq!(mapped.len(), direct.len());
        for v in &mapped {
            assert!(direct.iter().any(|w| (w - v).amax() < 1e-8));
        }
    }

    #[test]
    fn minkowski_sum_formula() {
        let base = unit_box();
        let e1 = SimilarityParam::new(v2(1.0, 0.0), 1.0).unwrap();
        let e2 = SimilarityParam::new(v2(-1.0, 0.0), 1.0).unwrap();
        let s = minkowski_sum_similar(&base, &[e1, e2]).unwrap();
        assert!((s.c() - v2(0.0, 0.0)).amax() < 1e-12);
        assert!((s.z() - DVector::from_element(4, 2.0)).amax() < 1e-12);

        // Single summand is the summand itself.
        let e = SimilarityParam::new(v2(3.0, 4.0), 0.5).unwrap();
        let s = minkowski_sum_similar(&base, &[e.clone()]).unwrap();
        assert!((s.c() - e.center()).amax() < 1e-12);
        assert!((s.z() - DVector::from_element(4, 0.5)).amax() < 1e-12);

        assert!(matches!(
            minkowski_sum_similar(&base, &[]),
            Err(Error::EmptySum)
        ));
    }

    #[test]
    fn inclusion_reflexive_and_scaled() {
        let base = unit_box();
        let p = SimilarPolytope::new(base.clone(), SimilarityParam::new(v2(0.3, -0.2), 1.0).unwrap())
            .unwrap();
        let cert = inclusion_check(&p, &p).unwrap();
        assert!(cert.holds);
        assert!(cert.residual.max() <= 1e-12);

        // Half-scale box centered inside the unit box is included.
        let small =
            SimilarPolytope::new(base.clone(), SimilarityParam::new(v2(0.0, 0.0), 0.5).unwrap())
                .unwrap();
        let big = SimilarPolytope::new(base, SimilarityParam::new(v2(0.0, 0.0), 1.0).unwrap())
            .unwrap();
        assert!(inclusion_check(&small, &big).unwrap().holds);
        assert!(!inclusion_check(&big, &small).unwrap().holds);
    }

    #[test]
    fn intersection_examples() {
        let p = unit_box();
        let (ok, w) = intersection_feasible(&p, &p);
        assert!(ok);
        assert!(p.contains(&w.unwrap()));

        // Two unit boxes centered 3 apart are disjoint.
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let q = Polytope::new(a, v2(3.0, 0.0), DVector::from_element(4, 1.0)).unwrap();
        let (ok, w) = intersection_feasible(&p, &q);
        assert!(!ok);
        assert!(w.is_none());
    }

    #[test]
    fn regular_polytope_examples() {
        // n=4, beta=1: diamond with vertices at distance sqrt(2) on axes-rotated corners.
        let d = regular_polytope(4, 1.0, &v2(0.0, 0.0)).unwrap();
        assert_eq!(d.vertices().unwrap().len(), 4);

        // Table-style shapes construct fine and are centered right.
        let hex = regular_polytope(6, 0.4, &v2(10.0, 4.0)).unwrap();
        assert!(hex.contains(&v2(10.0, 4.0)));
        assert_eq!(hex.h_value(&v2(10.0, 4.0)).unwrap(), 0.4);

        let pent = regular_polytope(5, 0.3, &v2(0.0, 3.0)).unwrap();
        assert!(pent.contains(&v2(0.0, 3.0)));

        assert!(regular_polytope(2, 1.0, &v2(0.0, 0.0)).is_err());
    }
}
