use serde::Serialize;

use crate::error::{invalid, Result};
use crate::numeric::{compensated_sum, CompensatedSum};

/// Empirical law of the horizon `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalHorizon {
    sorted: Vec<f64>,
    mean: f64,
}

impl EmpiricalHorizon {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("no horizon samples"));
        }
        if samples.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(invalid("horizon samples must be finite and nonnegative"));
        }
        let mut sorted = samples;
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = compensated_sum(sorted.iter().copied()) / sorted.len() as f64;
        if mean <= 0.0 {
            return Err(invalid("horizon mean must be positive"));
        }
        Ok(EmpiricalHorizon { sorted, mean })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Stationary excess distribution `F_e(t) = (1/ET)∫₀ᵗ (1 − F(s)) ds`,
    /// i.e. `E[t ∧ T] / ET`.
    pub fn stationary_excess_cdf(&self, t: f64) -> f64 {
        let n = self.sorted.len() as f64;
        compensated_sum(self.sorted.iter().map(|&s| s.min(t))) / n / self.mean
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExcessRule {
    /// `t* = F_e⁻¹(p)`.
    pub threshold: f64,
    /// `t* ∧ Tⱼ` per sample, in the order the samples were given sorted.
    pub rule: Vec<f64>,
    /// Sample mean of the rule; equals `p·ET`.
    pub mean_stop: f64,
}

impl ExcessRule {
    /// `E ψ(τ)` for a convex `ψ` supplied by the caller. The rule itself does
    /// not depend on `ψ`.
    pub fn expected_cost(&self, psi: impl Fn(f64) -> f64) -> f64 {
        compensated_sum(self.rule.iter().map(|&t| psi(t))) / self.rule.len() as f64
    }
}

/// Optimal rule `F_e⁻¹(p) ∧ T` for minimizing `Eψ(τ)` with `Eτ = p·ET`,
/// for any convex `ψ`.
///
/// `F_e` is piecewise linear with knots at the sorted samples; on
/// `[s₍ₖ₎, s₍ₖ₊₁₎]` the equation `Σ min(t, sⱼ) = p·Σ sⱼ` reads
/// `prefixₖ + (n − k)·t = p·Σ sⱼ` and is solved directly.
pub fn stationary_excess_rule(horizon: &EmpiricalHorizon, p: f64) -> Result<ExcessRule> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("p = {p} outside (0, 1)")));
    }
    let s = &horizon.sorted;
    let n = s.len();
    let target = p * compensated_sum(s.iter().copied());
    let mut prefix = CompensatedSum::new();
    let mut threshold = *s.last().unwrap();
    for (k, &knot) in s.iter().enumerate() {
        let t = (target - prefix.value()) / (n - k) as f64;
        if t <= knot {
            threshold = t;
            break;
        }
        prefix.add(knot);
    }
    let rule: Vec<f64> = s.iter().map(|&x| x.min(threshold)).collect();
    let mean_stop = compensated_sum(rule.iter().copied()) / n as f64;
    Ok(ExcessRule { threshold, rule, mean_stop })
}
