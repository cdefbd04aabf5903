use serde::{Deserialize, Serialize};

use super::{outer_minimize, OUTER_GRID};
use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::measure::{Extended, Scenario, ScenarioSet, StepProcess};
use crate::numeric::compensated_sum;
use crate::solver::{budget_map, critical_levels, objective, solve_equality, tau_pair, StoppingRule};

/// Nondecreasing holding cost `g` applied to the state `ξ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum HoldingCost {
    Identity,
    /// `g(x) = values[#{j : jumps[j] ≤ x}]`; `values` has one more entry
    /// than `jumps`.
    Step { jumps: Vec<f64>, values: Vec<f64> },
}

impl HoldingCost {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            HoldingCost::Identity => x,
            HoldingCost::Step { jumps, values } => values[jumps.partition_point(|&j| j <= x)],
        }
    }

    fn check(&self) -> Result<()> {
        if let HoldingCost::Step { jumps, values } = self {
            if values.len() != jumps.len() + 1 {
                return Err(invalid("holding cost needs one more value than jumps"));
            }
            if jumps.windows(2).any(|w| !(w[0] < w[1])) || values.windows(2).any(|w| !(w[0] <= w[1])) {
                return Err(invalid("holding cost must be nondecreasing with increasing jumps"));
            }
            if jumps.iter().chain(values).any(|x| !x.is_finite()) {
                return Err(invalid("holding cost must be finite"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ClearingProblem {
    /// `K`, paid at every clearing.
    pub setup_cost: f64,
    pub holding: HoldingCost,
    /// Raw state paths; density and rate must be 1.
    pub scenarios: ScenarioSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClearingResult {
    /// Minimizing level of the scan.
    pub lambda: f64,
    /// Whether the strict crossing `τ_λ+` attained the minimum.
    pub strict: bool,
    pub rule: Vec<f64>,
    pub ratio: f64,
    pub expected_cycle: f64,
    /// Minimum of `(K + f(α))/α` from the outer search over `α`.
    pub two_phase_alpha: f64,
    pub two_phase_ratio: f64,
    pub relative_gap: f64,
    pub multimodal: bool,
}

/// `g∘ξ` per scenario, with equal neighbouring values merged.
pub fn compose_holding(problem: &ClearingProblem) -> Result<ScenarioSet> {
    problem.holding.check()?;
    if !(problem.setup_cost > 0.0 && problem.setup_cost.is_finite()) {
        return Err(invalid("setup cost must be positive and finite"));
    }
    let scenarios = problem
        .scenarios
        .scenarios()
        .iter()
        .enumerate()
        .map(|(i, sc)| {
            if sc.density != 1.0 || sc.rate != 1.0 {
                return Err(invalid(format!("clearing scenario {i}: density and rate must be 1")));
            }
            let mut breakpoints = Vec::with_capacity(sc.process.len());
            let mut values: Vec<f64> = Vec::with_capacity(sc.process.len());
            for (&b, &v) in sc.process.breakpoints.iter().zip(&sc.process.values) {
                let g = problem.holding.eval(v);
                if values.last() != Some(&g) {
                    breakpoints.push(b);
                    values.push(g);
                }
            }
            Ok(Scenario { process: StepProcess { breakpoints, values }, ..sc.clone() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioSet::new(scenarios)?)
}

/// Minimizes the long-run cost rate `(K + E∫₀^τ g(ξ)) / Eτ` of a clearing
/// cycle. The minimum is searched over threshold rules directly, then
/// recomputed through the outer search over `α = Eτ` and the two are
/// compared.
pub fn clearing_optimal(problem: &ClearingProblem) -> Result<ClearingResult> {
    let set = compose_holding(problem)?;
    let k = problem.setup_cost;
    let levels = critical_levels(&set);

    // Level scan.
    let candidates = exec::map_heavy(levels.len() * 2, |idx| {
        let (level, strict) = (levels[idx / 2], idx % 2 == 1);
        let times: Option<Vec<f64>> = set
            .scenarios()
            .iter()
            .map(|sc| {
                let pair = tau_pair(sc, level);
                if strict { pair.1 } else { pair.0 }.finite()
            })
            .collect();
        let times = times?;
        let cycle = compensated_sum(set.scenarios().iter().zip(&times).map(|(sc, &t)| sc.weight * t));
        if !(cycle > 0.0) {
            return None;
        }
        let cost = objective(&set, &StoppingRule::pure(times.clone())).ok()?;
        Some(((k + cost) / cycle, level, strict, times, cycle))
    });
    let best = candidates
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<(f64, f64, bool, Vec<f64>, f64)>, c| match acc {
            Some(a) if a.0 <= c.0 => Some(a),
            _ => Some(c),
        })
        .ok_or(Error::NoPositiveRule)?;
    let (ratio, lambda, strict, rule, expected_cycle) = best;

    // Two-phase search over α ∈ (0, α_max].
    let alpha_max = match set.total_budget() {
        Extended::Finite(t) => t,
        Extended::Infinite => levels
            .iter()
            .flat_map(|&l| {
                let (lo, up) = budget_map(&set, l);
                [lo.finite(), up.finite()]
            })
            .flatten()
            .fold(0.0, f64::max),
    };
    let h = |alpha: f64| -> Result<f64> { Ok((k + solve_equality(&set, alpha)?.objective) / alpha) };
    let floor = alpha_max * 1e-9;
    let outer = outer_minimize(|a| h(a.max(floor)), 0.0, alpha_max, OUTER_GRID, 1e-13)?;
    let two_phase_ratio = outer.value;
    let denom = ratio.abs().max(two_phase_ratio.abs());
    let relative_gap = if denom == 0.0 { 0.0 } else { (ratio - two_phase_ratio).abs() / denom };
    Ok(ClearingResult {
        lambda,
        strict,
        rule,
        ratio,
        expected_cycle,
        two_phase_alpha: outer.arg.max(floor),
        two_phase_ratio,
        relative_gap,
        multimodal: outer.multimodal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(process: StepProcess, horizon: Extended) -> ScenarioSet {
        ScenarioSet::new(vec![Scenario::unit(1.0, horizon, process)]).unwrap()
    }

    #[test]
    fn linear_state_identity_holding() {
        let h = 1e-3;
        let xi = StepProcess::affine_staircase(1.0, 0.0, 6.0, 6000);
        let problem = ClearingProblem {
            setup_cost: 1.0,
            holding: HoldingCost::Identity,
            scenarios: single(xi, Extended::Infinite),
        };
        let r = clearing_optimal(&problem).unwrap();
        let root2 = 2f64.sqrt();
        assert!((r.ratio - root2).abs() <= h, "ratio {}", r.ratio);
        assert!((r.rule[0] - root2).abs() <= 2.0 * h);
        assert!(r.relative_gap <= 1e-6, "gap {}", r.relative_gap);
    }

    #[test]
    fn constant_holding_runs_to_horizon() {
        let problem = ClearingProblem {
            setup_cost: 2.0,
            holding: HoldingCost::Step { jumps: vec![], values: vec![3.0] },
            scenarios: ScenarioSet::new(vec![
                Scenario::unit(0.5, Extended::Finite(4.0), StepProcess { breakpoints: vec![0.0, 1.0], values: vec![0.0, 1.0] }),
                Scenario::unit(0.5, Extended::Finite(2.0), StepProcess::constant(5.0)),
            ])
            .unwrap(),
        };
        let r = clearing_optimal(&problem).unwrap();
        assert_eq!(r.rule, vec![4.0, 2.0]);
        assert!((r.ratio - (3.0 + 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_horizons_have_no_positive_rule() {
        let problem = ClearingProblem {
            setup_cost: 1.0,
            holding: HoldingCost::Identity,
            scenarios: single(StepProcess::constant(1.0), Extended::Finite(0.0)),
        };
        assert_eq!(clearing_optimal(&problem).unwrap_err(), Error::NoPositiveRule);
    }

    #[test]
    fn step_holding_composition() {
        let g = HoldingCost::Step { jumps: vec![1.0, 2.0], values: vec![0.0, 1.0, 4.0] };
        assert_eq!((g.eval(0.5), g.eval(1.0), g.eval(7.0)), (0.0, 1.0, 4.0));
        let problem = ClearingProblem {
            setup_cost: 1.0,
            holding: g,
            scenarios: single(
                StepProcess { breakpoints: vec![0.0, 1.0, 2.0, 3.0], values: vec![0.0, 0.5, 1.5, 2.5] },
                Extended::Finite(5.0),
            ),
        };
        let set = compose_holding(&problem).unwrap();
        let p = &set.scenarios()[0].process;
        assert_eq!(p.breakpoints, vec![0.0, 2.0, 3.0]);
        assert_eq!(p.values, vec![0.0, 1.0, 4.0]);
    }
}
