use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::Extended;
use crate::numeric::compensated_sum;
use crate::solver::{Solution, StoppingRule};

/// One atom of `min E(Aτ² + Bτ + C)` s.t. `τ ∈ [0, T]`, `E[Dτ] = α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadScenario {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub t_cap: Extended,
    pub weight: f64,
}

impl QuadScenario {
    fn check(&self, i: usize) -> Result<()> {
        let finite = [self.a, self.b, self.c, self.d, self.weight].iter().all(|x| x.is_finite());
        let cap_ok = self.t_cap.finite().is_none_or(|t| t >= 0.0 && t.is_finite());
        if !finite || self.a <= 0.0 || self.d <= 0.0 || self.weight <= 0.0 || !cap_ok {
            return Err(invalid(format!(
                "quadratic scenario {i}: need finite coefficients, a > 0, d > 0, weight > 0, t_cap >= 0"
            )));
        }
        Ok(())
    }

    fn cap(&self) -> f64 {
        self.t_cap.to_f64()
    }

    pub fn cost(&self, tau: f64) -> f64 {
        self.a * tau * tau + self.b * tau + self.c
    }
}

/// `τ_λ = (Dλ − B)⁺ / (2A) ∧ T`.
pub fn quadratic_tau(s: &QuadScenario, level: f64) -> f64 {
    ((s.d * level - s.b).max(0.0) / (2.0 * s.a)).min(s.cap())
}

/// `Σ w·D·τ_λ`, continuous and nondecreasing in `level`.
pub fn quadratic_budget(scenarios: &[QuadScenario], level: f64) -> f64 {
    compensated_sum(scenarios.iter().map(|s| s.weight * s.d * quadratic_tau(s, level)))
}

const MAX_ITER: usize = 500;
const REL_TOL: f64 = 1e-10;

/// Multiplier by monotone bisection on the continuous budget map, followed by
/// an exact solve of the linear piece that contains the root.
fn find_level(scenarios: &[QuadScenario], alpha: f64) -> Result<f64> {
    let mut lo = scenarios.iter().map(|s| s.b / s.d).fold(f64::INFINITY, f64::min) - 1.0;
    let mut hi = scenarios
        .iter()
        .map(|s| (s.b + 2.0 * s.a * s.cap()) / s.d)
        .fold(f64::NEG_INFINITY, f64::max)
        + 1.0;
    if !hi.is_finite() {
        // Uncapped atoms: expand until the budget is covered.
        hi = scenarios.iter().map(|s| s.b / s.d).fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let mut expansions = 0;
        while quadratic_budget(scenarios, hi) < alpha {
            hi += 2.0 * (hi - lo);
            expansions += 1;
            if expansions > MAX_ITER || !hi.is_finite() {
                return Err(Error::BisectionFailed { iterations: expansions });
            }
        }
    }
    let mut converged = false;
    for _ in 0..MAX_ITER {
        if hi - lo <= REL_TOL * 1f64.max(lo.abs()).max(hi.abs()) {
            converged = true;
            break;
        }
        let mid = 0.5 * (lo + hi);
        if quadratic_budget(scenarios, mid) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !converged {
        return Err(Error::BisectionFailed { iterations: MAX_ITER });
    }
    let mid = 0.5 * (lo + hi);
    let mut fixed = 0.0;
    let mut slope = 0.0;
    let mut offset = 0.0;
    for s in scenarios {
        let free = (s.d * mid - s.b) / (2.0 * s.a);
        if free >= s.cap() {
            fixed += s.weight * s.d * s.cap();
        } else if free > 0.0 {
            slope += s.weight * s.d * s.d / (2.0 * s.a);
            offset += s.weight * s.d * s.b / (2.0 * s.a);
        }
    }
    let mut candidates = vec![lo, hi];
    if slope > 0.0 {
        candidates.push((alpha - fixed + offset) / slope);
    }
    let miss = |l: f64| (quadratic_budget(scenarios, l) - alpha).abs();
    Ok(candidates
        .into_iter()
        .filter(|l| l.is_finite())
        .fold((f64::NAN, f64::INFINITY), |best, l| {
            let m = miss(l);
            if m < best.1 { (l, m) } else { best }
        })
        .0)
}

/// Quadratic cost with random coefficients under `E[Dτ] = α`. The budget map
/// is continuous, so the rule is always pure.
pub fn solve_quadratic(scenarios: &[QuadScenario], alpha: f64) -> Result<Solution> {
    if scenarios.is_empty() {
        return Err(invalid("no quadratic scenarios"));
    }
    for (i, s) in scenarios.iter().enumerate() {
        s.check(i)?;
    }
    let total: Extended = if scenarios.iter().all(|s| s.t_cap.is_finite()) {
        Extended::Finite(compensated_sum(scenarios.iter().map(|s| s.weight * s.d * s.cap())))
    } else {
        Extended::Infinite
    };
    if !(alpha >= 0.0) || total.cmp_f64(alpha).is_lt() {
        return Err(Error::InfeasibleAlpha { alpha, limit: total.to_f64() });
    }
    let level = if alpha == 0.0 {
        scenarios.iter().map(|s| s.b / s.d).fold(f64::INFINITY, f64::min)
    } else if total == Extended::Finite(alpha) {
        scenarios
            .iter()
            .map(|s| (s.b + 2.0 * s.a * s.cap()) / s.d)
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        find_level(scenarios, alpha)?
    };
    let times: Vec<f64> = scenarios.iter().map(|s| quadratic_tau(s, level)).collect();
    let objective = compensated_sum(scenarios.iter().zip(&times).map(|(s, &t)| s.weight * s.cost(t)));
    let budget = compensated_sum(scenarios.iter().zip(&times).map(|(s, &t)| s.weight * s.d * t));
    let margin = scenarios
        .iter()
        .zip(&times)
        .map(|(s, &tau)| {
            let g = |t: f64| s.a * t * t + s.b * t - level * s.d * t;
            let end = if s.t_cap.is_finite() { s.cap() } else { 2.0 * tau + 1.0 };
            let g_tau = g(tau);
            (0..=100)
                .map(|k| end * k as f64 / 100.0)
                .chain([0.0, end, tau])
                .map(|t| g(t) - g_tau)
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(Solution {
        rule: StoppingRule::pure(times),
        multiplier: level,
        objective,
        budget,
        certificate_margin: Some(margin),
        draws: Vec::new(),
    })
}
