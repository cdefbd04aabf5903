//! Analytic special cases. Each either has a closed form or reduces to the
//! threshold solver on a purpose-built scenario set, and each is
//! cross-checked against the general solver in tests.

mod excess;
mod neyman_pearson;
mod portfolio;
mod quadratic;
mod renewal;
mod separable;

pub use excess::{stationary_excess_rule, EmpiricalHorizon, ExcessRule};
pub use neyman_pearson::{np_test, FiniteTest, NpMode};
pub use portfolio::{solve_portfolio, MarginalUtility, PortfolioPlan, PortfolioProblem};
pub use quadratic::{quadratic_budget, quadratic_tau, solve_quadratic, QuadScenario};
pub use renewal::{counting_process, renewal_exponential, renewal_expected_stop, RenewalRule, RenewalSpec};
pub use separable::separable_convex;
