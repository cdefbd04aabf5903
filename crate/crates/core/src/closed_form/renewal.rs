use serde::Serialize;

use crate::error::{invalid, Result};
use crate::measure::StepProcess;

/// Exponential horizon `T ~ exp(θ)` independent of a renewal counting
/// process with inter-renewal law `X`; `lst = E e^{−θX}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenewalSpec {
    pub theta: f64,
    pub lst: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RenewalRule {
    /// `λ_α`: stop at renewal `λ_α` (lower) or `λ_α + 1` (upper).
    pub lambda_alpha: u64,
    pub q: f64,
    pub lower_budget: f64,
    pub upper_budget: f64,
    /// `(1 − q)·Eτ_lower + q·Eτ_upper`; equals `α`.
    pub expected_budget: f64,
}

/// `E[T ∧ S_k] = (1 − lst^k)/θ`.
pub fn renewal_expected_stop(spec: RenewalSpec, k: u64) -> f64 {
    let k = i32::try_from(k).unwrap_or(i32::MAX);
    (1.0 - spec.lst.powi(k)) / spec.theta
}

/// Closed-form rule: `λ_α = ⌊log(1 − θα) / log lst⌋` and the mixture weight
/// between the `λ_α`-th and `(λ_α + 1)`-th renewal.
pub fn renewal_exponential(spec: RenewalSpec, alpha: f64) -> Result<RenewalRule> {
    if !(spec.theta > 0.0 && spec.theta.is_finite()) {
        return Err(invalid("theta must be positive and finite"));
    }
    if !(spec.lst > 0.0 && spec.lst < 1.0) {
        return Err(invalid("lst must lie in (0, 1)"));
    }
    if !(alpha > 0.0 && alpha < 1.0 / spec.theta) {
        return Err(invalid(format!("alpha = {alpha} outside (0, 1/theta)")));
    }
    let ratio = (-spec.theta * alpha).ln_1p() / spec.lst.ln();
    let mut k = ratio.floor().max(0.0) as u64;
    // Guard the floor against rounding: E(k) ≤ α < E(k + 1).
    while k > 0 && renewal_expected_stop(spec, k) > alpha {
        k -= 1;
    }
    while renewal_expected_stop(spec, k + 1) <= alpha {
        k += 1;
    }
    let lower_budget = renewal_expected_stop(spec, k);
    let upper_budget = renewal_expected_stop(spec, k + 1);
    let q = if lower_budget == alpha {
        0.0
    } else {
        (alpha - lower_budget) / (upper_budget - lower_budget)
    };
    Ok(RenewalRule {
        lambda_alpha: k,
        q,
        lower_budget,
        upper_budget,
        expected_budget: (1.0 - q) * lower_budget + q * upper_budget,
    })
}

/// Counting process `N(t) = #{renewal epochs ≤ t}` from sorted epochs,
/// truncated after the last epoch not exceeding `horizon`.
pub fn counting_process(epochs: &[f64], horizon: f64) -> StepProcess {
    let mut breakpoints = vec![0.0];
    let mut values = vec![0.0];
    let mut count = 0.0;
    for &e in epochs.iter().take_while(|&&e| e <= horizon) {
        count += 1.0;
        if e == *breakpoints.last().unwrap() {
            *values.last_mut().unwrap() = count;
        } else {
            breakpoints.push(e);
            values.push(count);
        }
    }
    StepProcess { breakpoints, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: RenewalSpec = RenewalSpec { theta: 1.0, lst: 0.367_879_441_171_442_33 };

    #[test]
    fn deterministic_unit_renewals() {
        let r = renewal_exponential(UNIT, 0.5).unwrap();
        assert_eq!(r.lambda_alpha, 0);
        assert_eq!(r.lower_budget, 0.0);
        assert!((r.upper_budget - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert!((r.q - 0.5 / (1.0 - (-1f64).exp())).abs() < 1e-12);
        assert!((r.q - 0.790_988_353_4).abs() < 1e-9);
        assert!((r.expected_budget - 0.5).abs() < 1e-12);
    }

    #[test]
    fn small_alpha_has_small_q() {
        let r = renewal_exponential(UNIT, 1e-9).unwrap();
        assert_eq!(r.lambda_alpha, 0);
        assert!(r.q < 1e-8);
    }

    #[test]
    fn exact_hit_is_pure() {
        let spec = RenewalSpec { theta: 2.0, lst: 0.5 };
        // E τ at k = 2 is (1 − 0.25)/2.
        let r = renewal_exponential(spec, 0.375).unwrap();
        assert_eq!((r.lambda_alpha, r.q), (2, 0.0));
        assert!(renewal_exponential(spec, 0.5).is_err());
        assert!(renewal_exponential(RenewalSpec { theta: 1.0, lst: 1.0 }, 0.5).is_err());
    }

    #[test]
    fn counting_process_merges_ties() {
        let p = counting_process(&[0.0, 1.0, 1.0, 2.5, 9.0], 3.0);
        assert_eq!(p.breakpoints, vec![0.0, 1.0, 2.5]);
        assert_eq!(p.values, vec![1.0, 3.0, 4.0]);
    }
}
