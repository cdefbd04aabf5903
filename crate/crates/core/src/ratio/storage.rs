use serde::{Deserialize, Serialize};

use super::{outer_minimize, OUTER_GRID};
use crate::closed_form::{quadratic_tau, solve_quadratic, QuadScenario};
use crate::error::{invalid, Error, Result};
use crate::measure::Extended;
use crate::solver::Solution;

/// Output-rate problem: choose a random rate `X ≥ 0` to minimize
/// `(K₁ + K₂EX + h·E(VX/2 + μρX²/V)) / (K₃ + EX)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageProblem {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// The product `μρ`.
    pub mu_rho: f64,
    pub h: f64,
    pub v_samples: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StorageResult {
    pub alpha: f64,
    pub cost: f64,
    /// Optimal `X` per sample of `V`.
    pub rule: Vec<f64>,
    pub multiplier: f64,
    /// `E(VX/2 + μρX²/V)` at the optimum.
    pub inner: f64,
    pub multimodal: bool,
}

const MAX_DOUBLINGS: usize = 200;

impl StorageProblem {
    fn check(&self) -> Result<()> {
        let constants = [self.k1, self.k2, self.k3, self.mu_rho, self.h];
        if constants.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(invalid("storage constants must be positive and finite"));
        }
        if self.v_samples.is_empty() || self.v_samples.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("v_samples must be nonempty, positive and finite"));
        }
        Ok(())
    }

    fn atoms(&self) -> Vec<QuadScenario> {
        let w = 1.0 / self.v_samples.len() as f64;
        self.v_samples
            .iter()
            .map(|&v| QuadScenario { a: self.mu_rho / v, b: v / 2.0, c: 0.0, d: 1.0, t_cap: Extended::Infinite, weight: w })
            .collect()
    }
}

/// Inner problem `min E(VX/2 + μρX²/V)` s.t. `EX = α`, uncapped.
pub fn storage_inner(problem: &StorageProblem, alpha: f64) -> Result<Solution> {
    problem.check()?;
    solve_quadratic(&problem.atoms(), alpha)
}

/// Outer objective at `α`.
pub fn storage_cost(problem: &StorageProblem, alpha: f64) -> Result<f64> {
    let inner = storage_inner(problem, alpha)?.objective;
    Ok((problem.k1 + problem.k2 * alpha + problem.h * inner) / (problem.k3 + alpha))
}

/// Two-phase minimization over `α = EX ≥ 0`. The search interval is doubled
/// until the cost turns upward, then scanned and refined.
pub fn storage_rate(problem: &StorageProblem) -> Result<StorageResult> {
    problem.check()?;
    let cost = |a: f64| storage_cost(problem, a);
    let mean_v = problem.v_samples.iter().sum::<f64>() / problem.v_samples.len() as f64;
    let mut hi = mean_v / problem.mu_rho;
    let mut doublings = 0;
    while cost(2.0 * hi)? <= cost(hi)? {
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::BracketExpansion { reached: hi });
        }
    }
    let outer = outer_minimize(cost, 0.0, 2.0 * hi, OUTER_GRID, 1e-8)?;
    let inner = storage_inner(problem, outer.arg)?;
    let atoms = problem.atoms();
    Ok(StorageResult {
        alpha: outer.arg,
        cost: outer.value,
        rule: atoms.iter().map(|s| quadratic_tau(s, inner.multiplier)).collect(),
        multiplier: inner.multiplier,
        inner: inner.objective,
        multimodal: outer.multimodal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_v(v: f64) -> StorageProblem {
        StorageProblem { k1: 5.0, k2: 0.5, k3: 1.0, mu_rho: 0.8, h: 1.5, v_samples: vec![v; 3] }
    }

    #[test]
    fn constant_v_matches_scalar_scan() {
        let p = constant_v(2.0);
        let r = storage_rate(&p).unwrap();
        let f = |a: f64| (p.k1 + p.k2 * a + p.h * (2.0 * a / 2.0 + p.mu_rho * a * a / 2.0)) / (p.k3 + a);
        let scan = (0..=200_000).map(|k| f(k as f64 * 1e-4)).fold(f64::INFINITY, f64::min);
        assert!(r.cost <= scan + 1e-12);
        assert!(scan - r.cost < 1e-7);
        assert!(r.rule.iter().all(|&x| (x - r.alpha).abs() < 1e-9 * r.alpha.max(1.0)));
    }

    #[test]
    fn heavy_linear_penalty_pushes_rate_to_zero() {
        let mut p = constant_v(2.0);
        p.k2 = 1e6;
        let r = storage_rate(&p).unwrap();
        assert!(r.alpha < 1e-6, "alpha {}", r.alpha);
    }

    #[test]
    fn inner_map_is_convex() {
        let p = StorageProblem { v_samples: vec![0.5, 1.0, 3.0, 7.0], ..constant_v(1.0) };
        let f: Vec<f64> = (0..40).map(|k| storage_inner(&p, k as f64 * 0.25).unwrap().objective).collect();
        for w in f.windows(3) {
            assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-9 * w[1].abs().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_constants() {
        let mut p = constant_v(1.0);
        p.k3 = 0.0;
        assert!(storage_rate(&p).is_err());
    }
}
