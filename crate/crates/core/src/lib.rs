//! Decomposition of collaborative signal-temporal-logic (STL) tasks between
//! non-communicating agents into equivalent-or-stronger conjunctions of tasks
//! along multi-hop communication paths.
//!
//! The pipeline, bottom to top:
//!
//! * [`geometry`] — H-representation polytopes `P(A, c, z) = {x | A(x - c) <= z}`,
//!   vertex enumeration, similarity transforms `eta = [center; scale]`,
//!   Minkowski sums of similar polytopes, inclusion / intersection certificates.
//! * [`tasks`] — the STL fragment (`Always`/`Eventually` over polytopic
//!   predicates on agent or relative states), quantitative robust semantics on
//!   piecewise-linear signals, and interval algebra.
//! * [`graphs`] — agents, communication graph (radius + spanning-tree tokens),
//!   task graph, consistency classification, decomposition paths, and the
//!   edge-computing graph.
//! * [`conflicts`] — conflict families over per-edge task sets (overlap,
//!   cover, containment, and cycle conditions) and the constraint index `Q`.
//! * [`assembly`] — parametric task attachment along paths and assembly of the
//!   coupled convex program: per-edge variable blocks `chi_rs`, local
//!   constraint sets, and shared matrices `(T_rs, t_rs)`.
//! * [`solver`] — an embedded interior-point method for the assembled conic
//!   programs, the centralized solve, and the decentralized per-edge dual
//!   algorithm with simulated synchronous message rounds.
//!
//! Everything is plain `f64` + [`nalgebra`] dense linear algebra; problem
//! sizes are desk-scale (state dimension 2–3, tens of agents).

pub mod assembly;
pub mod conflicts;
pub mod error;
pub mod geometry;
pub mod graphs;
pub mod lp;
pub mod solver;
pub mod tasks;

pub use error::{Error, Result};
