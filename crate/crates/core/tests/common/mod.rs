//! Shared helpers for randomized integration tests.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use stldecomp::geometry::Polytope;

/// Random bounded 2-D polytope with `3..=8` facets.
///
/// Built as a perturbed regular polygon: normals stay angularly spread (every
/// gap < pi), so the facets positively span the plane and the set is bounded;
/// all offsets are positive, so the set contains its center.
pub fn random_polytope<R: Rng>(rng: &mut R, center_spread: f64) -> Polytope {
    let sides = rng.gen_range(3..=8usize);
    let mut a = DMatrix::<f64>::zeros(sides, 2);
    for k in 0..sides {
        let jitter = rng.gen_range(-0.4..0.4) * std::f64::consts::PI / sides as f64;
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (sides as f64) + jitter;
        a[(k, 0)] = theta.cos();
        a[(k, 1)] = theta.sin();
    }
    let z = DVector::from_fn(sides, |_, _| rng.gen_range(0.3..1.5));
    let c = DVector::from_fn(2, |_, _| {
        if center_spread > 0.0 {
            rng.gen_range(-center_spread..center_spread)
        } else {
            0.0
        }
    });
    Polytope::new(a, c, z).expect("construction keeps the set bounded and nonempty")
}

/// Uniform sample from a polytope by rejection over its bounding box.
pub fn sample_point<R: Rng>(rng: &mut R, p: &Polytope) -> DVector<f64> {
    let (lo, hi) = p.bounding_box().unwrap();
    for _ in 0..100_000 {
        let x = DVector::from_fn(p.dim(), |i, _| {
            if hi[i] - lo[i] < 1e-12 {
                lo[i]
            } else {
                rng.gen_range(lo[i]..hi[i])
            }
        });
        if p.contains(&x) {
            return x;
        }
    }
    // Thin set: fall back to the center, always a member for z >= 0.
    p.c().clone()
}
