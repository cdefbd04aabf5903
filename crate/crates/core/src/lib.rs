//! Exact threshold rules for minimizing `ν∫₀^τ ξ(s) ds` over random times
//! `τ ∈ [0, T]` under a linear budget constraint `μ[Aτ] = α` (or `≤ α`),
//! where each `ξ` is a nondecreasing right-continuous step process.
//!
//! The optimal rule stops each scenario the first time its density-weighted
//! cost rate `Y·ξ(t)` reaches `A·λ*`, mixing between the weak and strict
//! crossing times when the budget map jumps over `α`. Because every process is
//! a finite step function the multiplier search runs over a finite set of
//! critical levels and is exact.
//!
//! Modules:
//! - [`measure`]: scenarios, step processes and validation.
//! - [`solver`]: pseudo-inverse, budget map, equality/inequality/discrete
//!   solvers, certificates and the value curve.
//! - [`closed_form`]: analytic special cases (stationary excess, quadratic,
//!   Neyman-Pearson, renewal, separable, portfolio).
//! - [`ratio`]: two-phase ratio and welfare programs (clearing, storage,
//!   regulation).
//! - [`oracle`]: brute-force verifiers used by tests and `oracle-check`.
//! - [`io`]: file formats and run reports used by the CLI.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod exec;
pub mod io;
pub mod measure;
pub mod numeric;
pub mod oracle;
pub mod ratio;
pub mod solver;

pub use error::{Error, Result};
pub use measure::{Extended, Scenario, ScenarioSet, StepProcess, ValidationReport};
pub use solver::{RuleMode, Solution, StoppingRule};
