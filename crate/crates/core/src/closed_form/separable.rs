use crate::error::{invalid, Result};
use crate::measure::{Extended, Scenario, ScenarioSet, StepProcess};
use crate::solver::solve_equality;

/// `min Σ fᵢ(xᵢ)` s.t. `xᵢ ∈ [0, tᵢ]`, `Σ aᵢxᵢ = α` for convex `fᵢ` given by
/// their right derivatives (nondecreasing step functions). Returns `x`.
pub fn separable_convex(
    derivatives: &[StepProcess],
    caps: &[Extended],
    rates: &[f64],
    alpha: f64,
) -> Result<Vec<f64>> {
    if derivatives.len() != caps.len() || derivatives.len() != rates.len() {
        return Err(invalid("derivatives, caps and rates must have equal length"));
    }
    let scenarios = derivatives
        .iter()
        .zip(caps)
        .zip(rates)
        .map(|((f, &cap), &a)| Scenario { weight: 1.0, density: 1.0, horizon: cap, rate: a, process: f.clone() })
        .collect();
    let set = ScenarioSet::new(scenarios)?;
    Ok(solve_equality(&set, alpha)?.rule.effective())
}
