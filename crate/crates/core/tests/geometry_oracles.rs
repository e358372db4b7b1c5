//! Randomized oracle tests for the polytope kernel: every certificate is
//! cross-checked against an independent route (vertex membership, dense grid
//! sampling, rejection sampling, or a feasibility LP).

mod common;

use common::{random_polytope, sample_point};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stldecomp::geometry::{
    inclusion_check, intersection_feasible, minkowski_sum_similar, Polytope, SimilarPolytope,
    SimilarityParam,
};
use stldecomp::lp;

fn as_similar(p: &Polytope) -> SimilarPolytope {
    SimilarPolytope::from_concrete(p).unwrap()
}

#[test]
fn inclusion_agrees_with_vertex_membership_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let p1 = random_polytope(&mut rng, 1.0);
        let p2 = random_polytope(&mut rng, 1.0);
        let cert = inclusion_check(&as_similar(&p1), &as_similar(&p2)).unwrap();
        // Oracle: P1 ⊆ P2 iff every vertex of P1 satisfies h_value of P2.
        let oracle = p1
            .vertices()
            .unwrap()
            .iter()
            .all(|v| p2.h_value(v).unwrap() >= -1e-7);
        assert_eq!(cert.holds, oracle, "inclusion certificate disagrees with oracle");
    }
}

#[test]
fn intersection_agrees_with_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let p1 = random_polytope(&mut rng, 2.0);
        let p2 = random_polytope(&mut rng, 2.0);
        let (feasible, witness) = intersection_feasible(&p1, &p2);

        if feasible {
            // The LP witness must genuinely lie in both sets.
            let w = witness.unwrap();
            assert!(p1.h_value(&w).unwrap() >= -1e-7);
            assert!(p2.h_value(&w).unwrap() >= -1e-7);
        }

        // Grid oracle at step 0.01 over the joint bounding box: any grid hit
        // implies feasibility; on infeasible reports, no grid point may lie
        // in both sets.
        let (lo1, hi1) = p1.bounding_box().unwrap();
        let (lo2, hi2) = p2.bounding_box().unwrap();
        let lo = [lo1[0].max(lo2[0]), lo1[1].max(lo2[1])];
        let hi = [hi1[0].min(hi2[0]), hi1[1].min(hi2[1])];
        if lo[0] > hi[0] || lo[1] > hi[1] {
            continue; // bounding boxes disjoint; grid is empty
        }
        let step = 0.01;
        let mut grid_hit = false;
        let mut x = lo[0];
        'outer: while x <= hi[0] {
            let mut y = lo[1];
            while y <= hi[1] {
                let p = DVector::from_row_slice(&[x, y]);
                if p1.contains(&p) && p2.contains(&p) {
                    grid_hit = true;
                    break 'outer;
                }
                y += step;
            }
            x += step;
        }
        if grid_hit {
            assert!(feasible, "grid found a common point the LP missed");
        }
    }
}

#[test]
fn minkowski_sum_agrees_with_rejection_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let base = random_polytope(&mut rng, 0.0);
    // Re-center the base exactly at the origin.
    let base = Polytope::new(base.a().clone(), DVector::zeros(2), base.z().clone()).unwrap();

    let e1 = SimilarityParam::new(DVector::from_row_slice(&[1.0, -0.5]), 0.8).unwrap();
    let e2 = SimilarityParam::new(DVector::from_row_slice(&[-0.3, 0.7]), 1.3).unwrap();
    let sum = minkowski_sum_similar(&base, &[e1.clone(), e2.clone()]).unwrap();

    let p1 = SimilarPolytope::new(base.clone(), e1).unwrap().concrete().unwrap();
    let p2 = SimilarPolytope::new(base.clone(), e2).unwrap().concrete().unwrap();

    // Forward: 10^3 random sums of members land inside the formula polytope.
    for _ in 0..1000 {
        let x = sample_point(&mut rng, &p1);
        let y = sample_point(&mut rng, &p2);
        assert!(
            sum.h_value(&(x + y)).unwrap() >= -1e-9,
            "sum of members escaped the Minkowski polytope"
        );
    }

    // Backward: points strictly outside the formula polytope are not
    // expressible as member sums (checked by feasibility LP over (x, y)).
    let (lo, hi) = sum.bounding_box().unwrap();
    let mut checked = 0;
    while checked < 1000 {
        let w = DVector::from_fn(2, |i, _| {
            let pad = 0.5 * (hi[i] - lo[i]);
            rand::Rng::gen_range(&mut rng, (lo[i] - pad)..(hi[i] + pad))
        });
        if sum.h_value(&w).unwrap() > -1e-6 {
            continue; // inside or on the boundary; skip
        }
        checked += 1;
        // Feasibility of {x in P1, y in P2, x + y = w}.
        let m1 = p1.num_rows();
        let m2 = p2.num_rows();
        let mut a_ub = DMatrix::<f64>::zeros(m1 + m2, 4);
        let mut b_ub = DVector::<f64>::zeros(m1 + m2);
        a_ub.view_mut((0, 0), (m1, 2)).copy_from(p1.a());
        a_ub.view_mut((m1, 2), (m2, 2)).copy_from(p2.a());
        b_ub.rows_mut(0, m1).copy_from(&(p1.z() + p1.a() * p1.c()));
        b_ub.rows_mut(m1, m2).copy_from(&(p2.z() + p2.a() * p2.c()));
        let mut a_eq = DMatrix::<f64>::zeros(2, 4);
        a_eq[(0, 0)] = 1.0;
        a_eq[(0, 2)] = 1.0;
        a_eq[(1, 1)] = 1.0;
        a_eq[(1, 3)] = 1.0;
        assert!(
            lp::feasible_point(&a_ub, &b_ub, &a_eq, &w).is_none(),
            "outside point {w:?} was expressible as a member sum"
        );
    }
}

#[test]
fn minkowski_sum_matches_vertex_sum_hull() {
    // The formula polytope equals the convex hull of pairwise vertex sums:
    // check both directions by membership.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let raw = random_polytope(&mut rng, 0.0);
        let base = Polytope::new(raw.a().clone(), DVector::zeros(2), raw.z().clone()).unwrap();
        let etas: Vec<SimilarityParam> = (0..rand::Rng::gen_range(&mut rng, 1..4usize))
            .map(|_| {
                SimilarityParam::new(
                    DVector::from_fn(2, |_, _| rand::Rng::gen_range(&mut rng, -1.0..1.0)),
                    rand::Rng::gen_range(&mut rng, 0.1..1.5),
                )
                .unwrap()
            })
            .collect();
        let sum = minkowski_sum_similar(&base, &etas).unwrap();

        // All pairwise vertex sums are inside the formula polytope...
        let mut vertex_sums: Vec<DVector<f64>> = vec![DVector::zeros(2)];
        for eta in &etas {
            let member = SimilarPolytope::new(base.clone(), eta.clone())
                .unwrap()
                .concrete()
                .unwrap();
            let mut next = Vec::new();
            for s in &vertex_sums {
                for v in member.vertices().unwrap() {
                    next.push(s + v);
                }
            }
            vertex_sums = next;
        }
        for s in &vertex_sums {
            assert!(sum.h_value(s).unwrap() >= -1e-9);
        }

        // ...and every vertex of the formula polytope lies in their hull.
        let k = vertex_sums.len();
        let mut a_eq = DMatrix::<f64>::zeros(3, k);
        for (j, s) in vertex_sums.iter().enumerate() {
            a_eq[(0, j)] = s[0];
            a_eq[(1, j)] = s[1];
            a_eq[(2, j)] = 1.0;
        }
        let a_ub = -DMatrix::<f64>::identity(k, k);
        let b_ub = DVector::<f64>::zeros(k);
        for v in sum.vertices().unwrap() {
            let b_eq = DVector::from_row_slice(&[v[0], v[1], 1.0]);
            assert!(
                lp::feasible_point(&a_ub, &b_ub, &a_eq, &b_eq).is_some(),
                "formula vertex {v:?} outside the vertex-sum hull"
            );
        }
    }
}

#[test]
fn h_value_sign_matches_hull_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..100 {
        let p = random_polytope(&mut rng, 1.0);
        let verts = p.vertices().unwrap();
        let k = verts.len();
        let (lo, hi) = p.bounding_box().unwrap();
        for _ in 0..20 {
            let x = DVector::from_fn(2, |i, _| {
                let pad = 0.3 * (hi[i] - lo[i]).max(0.1);
                rand::Rng::gen_range(&mut rng, (lo[i] - pad)..(hi[i] + pad))
            });
            let h = p.h_value(&x).unwrap();
            if h.abs() <= 1e-7 {
                continue; // boundary: both answers acceptable
            }
            // Membership LP in the convex hull of the vertex set.
            let mut a_eq = DMatrix::<f64>::zeros(3, k);
            for (j, v) in verts.iter().enumerate() {
                a_eq[(0, j)] = v[0];
                a_eq[(1, j)] = v[1];
                a_eq[(2, j)] = 1.0;
            }
            let a_ub = -DMatrix::<f64>::identity(k, k);
            let b_ub = DVector::<f64>::zeros(k);
            let b_eq = DVector::from_row_slice(&[x[0], x[1], 1.0]);
            let in_hull = lp::feasible_point(&a_ub, &b_ub, &a_eq, &b_eq).is_some();
            assert_eq!(h >= 0.0, in_hull, "h_value sign disagrees with hull membership");
        }
    }
}

#[test]
fn scale_sum_bounds_inclusion() {
    // Minkowski sums of similar polytopes fit inside the unit-scale shape
    // exactly when the scales sum to at most one (centers summing to the
    // target's center).
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let raw = random_polytope(&mut rng, 0.0);
        let base = Polytope::new(raw.a().clone(), DVector::zeros(2), raw.z().clone()).unwrap();
        let total: f64 = rand::Rng::gen_range(&mut rng, 0.2..1.8);
        let split: f64 = rand::Rng::gen_range(&mut rng, 0.1..0.9);
        let etas = [
            SimilarityParam::new(DVector::zeros(2), total * split).unwrap(),
            SimilarityParam::new(DVector::zeros(2), total * (1.0 - split)).unwrap(),
        ];
        let sum = minkowski_sum_similar(&base, &etas).unwrap();
        let target = SimilarPolytope::new(base.clone(), SimilarityParam::new(DVector::zeros(2), 1.0).unwrap()).unwrap();
        let cert = inclusion_check(&SimilarPolytope::from_concrete(&sum).unwrap(), &target).unwrap();
        if total <= 1.0 - 1e-9 {
            assert!(cert.holds, "sum with scale total {total} should be included");
        }
        if total >= 1.0 + 1e-6 {
            assert!(!cert.holds, "sum with scale total {total} should overflow");
        }
    }
}
