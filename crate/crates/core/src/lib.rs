//! Block-iterative solver for common fixed point problems over families of
//! cutter operators in R^n, with dynamic weights and extrapolated relaxation.
//!
//! The solver repeatedly forms a weighted convex combination of the operator
//! displacements over the current block (the support of the iteration's
//! weight vector) and steps along it with a relaxation parameter that may
//! exceed the classical interval by the extrapolation gain. Every structural
//! inequality the convergence theory rests on (the cutter inequality, the
//! Fejer decreases, the half-space inclusions, the weight conditions) is
//! exposed as a checkable property; `verify::run_all` runs the whole battery.
//!
//! Modules:
//! * [`linalg`] - dense vectors and the weighted product-space inner product;
//! * [`operators`] - the cutter library (half-spaces, hyperplanes, balls,
//!   boxes, affine subspaces, subgradient projections);
//! * [`combine`] - the weighted operator, relaxation, and extrapolation gain;
//! * [`productspace`] - the product-space route, used as an independent
//!   oracle for the gain and the inclusion lemmas;
//! * [`weights`] - weight vectors, dynamic schedules, condition verifiers;
//! * [`solver`] - the iteration loop, stopping rules, and Fejer audit;
//! * [`io`] - problem/config JSON formats and the trace CSV;
//! * [`generate`] - seeded random feasible instances;
//! * [`verify`] - the acceptance battery behind the `verify` CLI command.

// Indexed loops follow the summation notation of the formulas; the negated
// comparisons in validators double as NaN rejections.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod combine;
pub mod error;
pub mod generate;
pub mod io;
pub mod linalg;
pub mod operators;
pub mod productspace;
pub mod solver;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use linalg::{inner, product_inner, ProductPoint, Vector};
pub use operators::Cutter;
pub use solver::{run, LambdaPolicy, SolveResult, SolveStatus, SolverConfig};
pub use weights::{WeightSchedule, WeightVector};
