use serde::{Deserialize, Serialize};

use super::outer_minimize;
use crate::closed_form::MarginalUtility;
use crate::error::{invalid, Result};
use crate::measure::{Extended, Scenario, ScenarioSet, StepProcess};
use crate::solver::{solve_equality, Solution};

/// Service-time regulation: customers arrive at rate `λ`, each values
/// service up to `s` at `V(s)` per unit time and the queue charges
/// `s·λ/(1 − λES)`. Maximize `E∫₀^S [V(s) − sλ/(1 − λα)] ds` with `ES = α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegulationProblem {
    pub arrival_rate: f64,
    /// Nonincreasing `V` per scenario.
    pub v_paths: Vec<MarginalUtility>,
    /// Scenario probabilities; normalized if they do not sum to 1.
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegulationResult {
    pub alpha: f64,
    pub welfare: f64,
    /// Service time per scenario.
    pub rule: Vec<f64>,
    pub multiplier: f64,
    /// `(α, welfare)` on the outer grid.
    pub grid: Vec<(f64, f64)>,
    pub multimodal: bool,
}

impl RegulationProblem {
    fn check(&self) -> Result<()> {
        if !(self.arrival_rate > 0.0 && self.arrival_rate.is_finite()) {
            return Err(invalid("arrival rate must be positive and finite"));
        }
        if self.v_paths.is_empty() || self.v_paths.len() != self.weights.len() {
            return Err(invalid("one weight per V path, at least one path"));
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid("weights must be positive and finite"));
        }
        for (i, v) in self.v_paths.iter().enumerate() {
            if !v.is_nonincreasing() {
                return Err(invalid(format!("V path {i} is not nonincreasing")));
            }
            let ok = !v.breakpoints.is_empty()
                && v.breakpoints.len() == v.values.len()
                && v.breakpoints[0] == 0.0
                && v.breakpoints.windows(2).all(|w| w[0] < w[1])
                && v.breakpoints.iter().chain(&v.values).all(|x| x.is_finite());
            if !ok {
                return Err(invalid(format!("V path {i} is not a valid step function")));
            }
        }
        Ok(())
    }

    fn stable(&self, alpha: f64) -> Result<f64> {
        if !(alpha >= 0.0 && alpha * self.arrival_rate < 1.0) {
            return Err(invalid(format!("alpha = {alpha} violates 0 <= alpha < 1/arrival_rate")));
        }
        Ok(self.arrival_rate / (1.0 - self.arrival_rate * alpha))
    }
}

/// Scenario set for `ξ_α(s) = c·s − V(s)`, `c = λ/(1 − λα)`, on cells of
/// width at most `delta` refined at the jumps of `V`. Each cell carries
/// `c·midpoint − V(start)`, so `∫ξ` is exact at cell ends. Horizons are
/// large enough that they never bind at budget `α`.
pub fn regulation_set(problem: &RegulationProblem, alpha: f64, delta: f64) -> Result<ScenarioSet> {
    problem.check()?;
    let c = problem.stable(alpha)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta must be positive"));
    }
    let tail_min = problem
        .v_paths
        .iter()
        .map(|v| *v.values.last().unwrap())
        .fold(f64::INFINITY, f64::min);
    let level_cap = c * alpha - tail_min;
    let total_weight: f64 = problem.weights.iter().sum();
    let scenarios = problem
        .v_paths
        .iter()
        .zip(&problem.weights)
        .map(|(v, &w)| {
            let reach = ((level_cap + v.values[0]) / c).max(0.0) + 3.0 * delta;
            let cells = (reach / delta).ceil() as usize;
            let end = cells as f64 * delta;
            let mut points: Vec<f64> = (0..cells).map(|k| k as f64 * delta).collect();
            points.extend(v.breakpoints.iter().copied().filter(|&b| b < end));
            points.sort_by(f64::total_cmp);
            points.dedup();
            let values = points
                .iter()
                .enumerate()
                .map(|(j, &a)| {
                    let b = points.get(j + 1).copied().unwrap_or(end);
                    c * 0.5 * (a + b) - v.value_at(a)
                })
                .collect();
            Scenario::unit(w / total_weight, Extended::Finite(end), StepProcess { breakpoints: points, values })
        })
        .collect();
    Ok(ScenarioSet::new(scenarios)?)
}

/// Welfare `E∫₀^S [V − c·s]` of the inner optimum at `α`, with the solution.
pub fn regulation_welfare(problem: &RegulationProblem, alpha: f64, delta: f64) -> Result<(f64, Solution)> {
    let set = regulation_set(problem, alpha, delta)?;
    let solution = solve_equality(&set, alpha)?;
    Ok((-solution.objective + 0.0, solution))
}

/// Grid of `points` budgets on `[0, 1/λ)`, then golden-section between the
/// neighbours of the best grid point.
pub fn regulation_optimal(problem: &RegulationProblem, points: usize, delta: f64) -> Result<RegulationResult> {
    problem.check()?;
    if points == 0 {
        return Err(crate::error::Error::EmptyGrid);
    }
    let hi = (1.0 - 1.0 / points as f64) / problem.arrival_rate;
    let neg = |a: f64| regulation_welfare(problem, a, delta).map(|(w, _)| -w);
    let outer = outer_minimize(neg, 0.0, hi, points, 1e-10)?;
    let (welfare, solution) = regulation_welfare(problem, outer.arg, delta)?;
    let rule = solution.rule.effective();
    let grid = outer.grid.iter().map(|&(a, v)| (a, -v + 0.0)).collect();
    Ok(RegulationResult {
        alpha: outer.arg,
        welfare,
        rule,
        multiplier: solution.multiplier,
        grid,
        multimodal: outer.multimodal,
    })
}
