//! Contract library for the embedded conic solver: twenty hand-built
//! instances with known optima. Every solve must report a certified duality
//! gap at most 1e-7 and land within 1e-7 of the known value.

use nalgebra::{DMatrix, DVector};
use stldecomp::lp::{self, LpOutcome};
use stldecomp::solver::ipm::{solve, BallConstraint, ConicProblem, IpmStatus, SolveOptions};

fn box_rows(n: usize, lo: f64, hi: f64) -> (DMatrix<f64>, DVector<f64>) {
    let mut a = DMatrix::<f64>::zeros(2 * n, n);
    let mut b = DVector::<f64>::zeros(2 * n);
    for i in 0..n {
        a[(2 * i, i)] = 1.0;
        b[2 * i] = hi;
        a[(2 * i + 1, i)] = -1.0;
        b[2 * i + 1] = -lo;
    }
    (a, b)
}

fn ball(center: &[f64], radius: f64) -> BallConstraint {
    let n = center.len();
    BallConstraint {
        f: DMatrix::identity(n, n),
        g: -DVector::from_row_slice(center),
        radius,
    }
}

struct Instance {
    name: &'static str,
    problem: ConicProblem,
    optimum: f64,
}

fn instances() -> Vec<Instance> {
    let mut out = Vec::new();

    // 1-5: box LPs in dimensions 1..=5; optimum -sum |c_i| on [-1,1]^n.
    for n in 1..=5usize {
        let c = DVector::from_fn(n, |i, _| ((i as f64) - 1.3) * 0.7 + 0.9);
        let (a, b) = box_rows(n, -1.0, 1.0);
        let optimum = -c.iter().map(|v| v.abs()).sum::<f64>();
        out.push(Instance {
            name: "box-lp",
            problem: ConicProblem {
                objective: c,
                lin_a: a,
                lin_b: b,
                balls: vec![],
            },
            optimum,
        });
    }

    // 6-9: centered balls; optimum -r ||c||.
    for (n, r) in [(2usize, 1.0), (2, 8.5), (3, 0.3), (4, 2.5)] {
        let c = DVector::from_fn(n, |i, _| (i as f64) * 0.5 - 1.0);
        let optimum = -r * c.norm();
        out.push(Instance {
            name: "centered-ball",
            problem: ConicProblem {
                objective: c,
                lin_a: DMatrix::zeros(0, n),
                lin_b: DVector::zeros(0),
                balls: vec![ball(&vec![0.0; n], r)],
            },
            optimum,
        });
    }

    // 10-12: shifted balls; optimum c'x0 - r ||c||.
    for (x0, r) in [
        (vec![2.0, -1.0], 0.7),
        (vec![-3.0, 0.5, 1.0], 1.2),
        (vec![10.0, 4.0], 0.4),
    ] {
        let n = x0.len();
        let c = DVector::from_fn(n, |i, _| 1.0 - 0.8 * (i as f64));
        let optimum = c.dot(&DVector::from_row_slice(&x0)) - r * c.norm();
        out.push(Instance {
            name: "shifted-ball",
            problem: ConicProblem {
                objective: c,
                lin_a: DMatrix::zeros(0, n),
                lin_b: DVector::zeros(0),
                balls: vec![ball(&x0, r)],
            },
            optimum,
        });
    }

    // 13: half-disk; min x1 + x2 over unit ball with x2 >= 0 -> -1 at (-1, 0).
    out.push(Instance {
        name: "half-disk",
        problem: ConicProblem {
            objective: DVector::from_row_slice(&[1.0, 1.0]),
            lin_a: DMatrix::from_row_slice(1, 2, &[0.0, -1.0]),
            lin_b: DVector::zeros(1),
            balls: vec![ball(&[0.0, 0.0], 1.0)],
        },
        optimum: -1.0,
    });

    // 14: ball clipped by a floor; min x2 with ||x|| <= 1, x2 >= -0.5.
    out.push(Instance {
        name: "clipped-ball",
        problem: ConicProblem {
            objective: DVector::from_row_slice(&[0.0, 1.0]),
            lin_a: DMatrix::from_row_slice(1, 2, &[0.0, -1.0]),
            lin_b: DVector::from_row_slice(&[0.5]),
            balls: vec![ball(&[0.0, 0.0], 1.0)],
        },
        optimum: -0.5,
    });

    // 15: box clipping dominates the ball; min x1 with ||x|| <= 2, x1 >= -1.
    out.push(Instance {
        name: "box-dominates",
        problem: ConicProblem {
            objective: DVector::from_row_slice(&[1.0, 0.0]),
            lin_a: DMatrix::from_row_slice(1, 2, &[-1.0, 0.0]),
            lin_b: DVector::from_row_slice(&[1.0]),
            balls: vec![ball(&[0.0, 0.0], 2.0)],
        },
        optimum: -1.0,
    });

    // 16: lens of two balls; min x1 over balls at (+-1, 0) radius 1.5 -> -0.5.
    out.push(Instance {
        name: "two-ball-lens",
        problem: ConicProblem {
            objective: DVector::from_row_slice(&[1.0, 0.0]),
            lin_a: DMatrix::zeros(0, 2),
            lin_b: DVector::zeros(0),
            balls: vec![ball(&[1.0, 0.0], 1.5), ball(&[-1.0, 0.0], 1.5)],
        },
        optimum: -0.5,
    });

    // 17: communication-cone shape: eta = (cx, cy, alpha); maximize alpha
    // subject to ||alpha v_k + c|| <= r over the unit-box vertices and
    // alpha >= 0. Optimum alpha = r / sqrt(2) at c = 0.
    {
        let r: f64 = 8.5;
        let verts = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]];
        let balls = verts
            .iter()
            .map(|v| BallConstraint {
                f: DMatrix::from_row_slice(2, 3, &[1.0, 0.0, v[0], 0.0, 1.0, v[1]]),
                g: DVector::zeros(2),
                radius: r,
            })
            .collect();
        out.push(Instance {
            name: "comm-cone",
            problem: ConicProblem {
                objective: DVector::from_row_slice(&[0.0, 0.0, -1.0]),
                lin_a: DMatrix::from_row_slice(1, 3, &[0.0, 0.0, -1.0]),
                lin_b: DVector::zeros(1),
                balls,
            },
            optimum: -r / 2.0_f64.sqrt(),
        });
    }

    // 18: a skewed LP cross-checked against the simplex kernel.
    {
        let c = DVector::from_row_slice(&[2.0, -1.0, 0.5]);
        let a = DMatrix::from_row_slice(
            5,
            3,
            &[
                1.0, 1.0, 1.0, //
                -1.0, 2.0, 0.0, //
                0.0, -1.0, 1.0, //
                -1.0, 0.0, -1.0, //
                0.5, -0.5, -1.0,
            ],
        );
        let b = DVector::from_row_slice(&[4.0, 3.0, 2.0, 5.0, 1.0]);
        let optimum = match lp::solve_lp(&c, &a, &b, &DMatrix::zeros(0, 3), &DVector::zeros(0)) {
            LpOutcome::Optimal { value, .. } => value,
            other => panic!("oracle LP failed: {other:?}"),
        };
        out.push(Instance {
            name: "skewed-lp",
            problem: ConicProblem {
                objective: c,
                lin_a: a,
                lin_b: b,
                balls: vec![],
            },
            optimum,
        });
    }

    // 19: anisotropic ball ||F x|| <= 1, F = diag(1, 2); min x1 + x2.
    // Optimum -sqrt(1 + 1/4) = -sqrt(5)/2 by scaling y = F x.
    out.push(Instance {
        name: "anisotropic-ball",
        problem: ConicProblem {
            objective: DVector::from_row_slice(&[1.0, 1.0]),
            lin_a: DMatrix::zeros(0, 2),
            lin_b: DVector::zeros(0),
            balls: vec![BallConstraint {
                f: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]),
                g: DVector::zeros(2),
                radius: 1.0,
            }],
        },
        optimum: -(5.0_f64).sqrt() / 2.0,
    });

    // 20: five-dimensional ball; min sum x_i with ||x|| <= 3 -> -3 sqrt(5).
    out.push(Instance {
        name: "dim-5-ball",
        problem: ConicProblem {
            objective: DVector::from_element(5, 1.0),
            lin_a: DMatrix::zeros(0, 5),
            lin_b: DVector::zeros(0),
            balls: vec![ball(&[0.0; 5], 3.0)],
        },
        optimum: -3.0 * (5.0_f64).sqrt(),
    });

    out
}

#[test]
fn contract_library_hits_known_optima() {
    let instances = instances();
    assert_eq!(instances.len(), 20);
    for (k, inst) in instances.iter().enumerate() {
        let sol = solve(&inst.problem, &SolveOptions::default())
            .unwrap_or_else(|e| panic!("instance {k} ({}) failed: {e}", inst.name));
        assert_eq!(
            sol.status,
            IpmStatus::Optimal,
            "instance {k} ({}) not optimal",
            inst.name
        );
        assert!(
            sol.certified_gap <= 1e-7,
            "instance {k} ({}): gap {}",
            inst.name,
            sol.certified_gap
        );
        assert!(
            (sol.objective - inst.optimum).abs() <= 1e-7,
            "instance {k} ({}): got {}, want {}",
            inst.name,
            sol.objective,
            inst.optimum
        );
    }
}
