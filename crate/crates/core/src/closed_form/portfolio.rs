use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measure::{Extended, Scenario, ScenarioSet, StepProcess};
use crate::solver::solve_inequality;

/// Nonincreasing right-continuous step function of wealth or consumption.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalUtility {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl MarginalUtility {
    pub fn constant(value: f64) -> Self {
        MarginalUtility { breakpoints: vec![0.0], values: vec![value] }
    }

    /// `u'(x) ≈ 1/x` sampled at cell midpoints of `[0, end]`.
    pub fn reciprocal_staircase(end: f64, cells: usize) -> Self {
        let h = end / cells as f64;
        MarginalUtility {
            breakpoints: (0..cells).map(|k| k as f64 * h).collect(),
            values: (0..cells).map(|k| 1.0 / ((k as f64 + 0.5) * h)).collect(),
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn value_at(&self, x: f64) -> f64 {
        -self.negated().value_at(x)
    }

    pub fn value_before(&self, x: f64) -> f64 {
        -self.negated().value_before(x)
    }

    fn negated(&self) -> StepProcess {
        StepProcess {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// `−u'` as a nondecreasing process; rejects increasing marginals.
    fn to_process(&self) -> Result<StepProcess> {
        if !self.is_nonincreasing() {
            return Err(invalid("marginal utility must be nonincreasing"));
        }
        StepProcess::new(self.breakpoints.clone(), self.values.iter().map(|v| -v).collect())
    }
}

/// Discretized consumption/terminal-wealth problem under a static budget
/// `E[Σ_k H_k c_k Δ_k + H_T X] ≤ x0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioProblem {
    pub probabilities: Vec<f64>,
    /// Widths of the consumption time cells.
    #[serde(default)]
    pub cell_widths: Vec<f64>,
    /// `H` per scenario and cell.
    #[serde(default)]
    pub prices: Vec<Vec<f64>>,
    pub terminal_prices: Vec<f64>,
    /// Marginal utility of consumption per cell; `None` means no consumption.
    #[serde(default)]
    pub consumption_marginal: Option<Vec<MarginalUtility>>,
    /// `None` means terminal wealth carries no utility.
    #[serde(default)]
    pub terminal_marginal: Option<MarginalUtility>,
    pub x0: f64,
    #[serde(default)]
    pub consumption_caps: Vec<Vec<Extended>>,
    pub terminal_caps: Vec<Extended>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PortfolioPlan {
    /// `c[s][k]`; empty rows when there is no consumption.
    pub consumption: Vec<Vec<f64>>,
    pub terminal: Vec<f64>,
    pub spent: f64,
    pub utility_gain: f64,
    /// Shadow price of initial wealth.
    pub multiplier: f64,
}

impl PortfolioProblem {
    fn scenario_count(&self) -> usize {
        self.probabilities.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.scenario_count();
        if n == 0 {
            return Err(invalid("portfolio needs at least one scenario"));
        }
        if self.terminal_prices.len() != n || self.terminal_caps.len() != n {
            return Err(invalid("terminal prices and caps need one entry per scenario"));
        }
        if !(self.x0 > 0.0 && self.x0.is_finite()) {
            return Err(invalid("x0 must be positive and finite"));
        }
        if let Some(m) = &self.consumption_marginal {
            let k = self.cell_widths.len();
            if m.len() != k {
                return Err(invalid("one consumption marginal per time cell"));
            }
            if self.prices.len() != n || self.prices.iter().any(|r| r.len() != k) {
                return Err(invalid("prices must be scenarios × cells"));
            }
            if self.consumption_caps.len() != n || self.consumption_caps.iter().any(|r| r.len() != k) {
                return Err(invalid("consumption caps must be scenarios × cells"));
            }
            if self.cell_widths.iter().any(|&w| !(w > 0.0)) {
                return Err(invalid("cell widths must be positive"));
            }
        }
        Ok(())
    }

    /// One atom per (scenario, cell) for consumption, then one per scenario
    /// for terminal wealth. Marginal `−u'` is the process, `H` the rate.
    pub fn scenario_set(&self) -> Result<ScenarioSet> {
        self.check()?;
        let mut atoms = Vec::new();
        if let Some(marginals) = &self.consumption_marginal {
            let processes = marginals.iter().map(MarginalUtility::to_process).collect::<Result<Vec<_>>>()?;
            for (s, &p) in self.probabilities.iter().enumerate() {
                for (k, process) in processes.iter().enumerate() {
                    atoms.push(Scenario {
                        weight: p * self.cell_widths[k],
                        density: 1.0,
                        horizon: self.consumption_caps[s][k],
                        rate: self.prices[s][k],
                        process: process.clone(),
                    });
                }
            }
        }
        let terminal = match &self.terminal_marginal {
            Some(m) => m.to_process()?,
            None => StepProcess::constant(0.0),
        };
        for (s, &p) in self.probabilities.iter().enumerate() {
            atoms.push(Scenario {
                weight: p,
                density: 1.0,
                horizon: self.terminal_caps[s],
                rate: self.terminal_prices[s],
                process: terminal.clone(),
            });
        }
        Ok(ScenarioSet::new(atoms)?)
    }
}

/// Maximizes expected utility of consumption and terminal wealth subject to
/// the static budget.
pub fn solve_portfolio(problem: &PortfolioProblem) -> Result<PortfolioPlan> {
    let set = problem.scenario_set()?;
    let solution = solve_inequality(&set, problem.x0)?;
    let times = solution.rule.effective();
    let n = problem.scenario_count();
    let cells = if problem.consumption_marginal.is_some() { problem.cell_widths.len() } else { 0 };
    let consumption = (0..n).map(|s| times[s * cells..(s + 1) * cells].to_vec()).collect();
    let terminal = times[n * cells..].to_vec();
    Ok(PortfolioPlan {
        consumption,
        terminal,
        spent: solution.budget,
        utility_gain: -solution.objective,
        multiplier: -solution.multiplier,
    })
}
