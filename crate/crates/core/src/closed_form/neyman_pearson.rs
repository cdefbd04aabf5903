use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measure::{Extended, Scenario, ScenarioSet, StepProcess};
use crate::numeric::compensated_sum;
use crate::solver::{solve_equality, solve_inequality};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NpMode {
    /// Size exactly `α`.
    Equality,
    /// Size at most `α`.
    AtMost,
}

/// Simple-vs-simple hypotheses on `n` points and a randomized test
/// (`test[i]` is the rejection probability at point `i`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteTest {
    pub p0: Vec<f64>,
    pub p1: Vec<f64>,
    pub test: Vec<f64>,
}

impl FiniteTest {
    pub fn size(&self) -> f64 {
        compensated_sum(self.p0.iter().zip(&self.test).map(|(p, t)| p * t))
    }

    pub fn power(&self) -> f64 {
        compensated_sum(self.p1.iter().zip(&self.test).map(|(p, t)| p * t))
    }
}

fn check(p0: &[f64], p1: &[f64], alpha: f64) -> Result<()> {
    if p0.is_empty() || p0.len() != p1.len() {
        return Err(invalid("p0 and p1 must be nonempty and of equal length"));
    }
    if p0.iter().chain(p1).any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(invalid("probabilities must be finite and nonnegative"));
    }
    if (compensated_sum(p0.iter().copied()) - 1.0).abs() > 1e-9 {
        return Err(invalid("p0 must sum to 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha = {alpha} outside (0, 1)")));
    }
    Ok(())
}

/// Most powerful randomized test of size `α` (or at most `α`).
///
/// Each point with `p0 > 0` becomes an atom of weight `p0` with horizon 1 and
/// constant cost rate `−p1/p0`; the threshold rule rejects where the
/// likelihood ratio exceeds `−λ*` and randomizes on the boundary atoms.
/// Points with `p0 = 0 < p1` are rejected at no size cost.
pub fn np_test(p0: &[f64], p1: &[f64], alpha: f64, mode: NpMode) -> Result<FiniteTest> {
    check(p0, p1, alpha)?;
    let support: Vec<usize> = (0..p0.len()).filter(|&i| p0[i] > 0.0).collect();
    let scenarios = support
        .iter()
        .map(|&i| {
            Scenario::unit(p0[i], Extended::Finite(1.0), StepProcess::constant(-p1[i] / p0[i]))
        })
        .collect();
    let set = ScenarioSet::new(scenarios)?;
    let solution = match mode {
        NpMode::Equality => solve_equality(&set, alpha)?,
        NpMode::AtMost => solve_inequality(&set, alpha)?,
    };
    let mut test: Vec<f64> = p1.iter().map(|&p| if p > 0.0 { 1.0 } else { 0.0 }).collect();
    for (k, &i) in support.iter().enumerate() {
        test[i] = solution.rule.effective_time(k);
    }
    Ok(FiniteTest { p0: p0.to_vec(), p1: p1.to_vec(), test })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_threshold_test() {
        let t = np_test(&[0.5, 0.5], &[0.9, 0.1], 0.5, NpMode::Equality).unwrap();
        assert_eq!(t.test, vec![1.0, 0.0]);
        assert!((t.power() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn boundary_randomization() {
        let t = np_test(&[0.5, 0.5], &[0.9, 0.1], 0.75, NpMode::Equality).unwrap();
        assert_eq!(t.test, vec![1.0, 0.5]);
        assert!((t.power() - 0.95).abs() < 1e-15);
        assert!((t.size() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn identical_hypotheses() {
        let p = [0.2, 0.3, 0.5];
        for alpha in [0.1, 0.45, 0.9] {
            let t = np_test(&p, &p, alpha, NpMode::Equality).unwrap();
            assert!((t.size() - alpha).abs() < 1e-12);
            assert!((t.power() - alpha).abs() < 1e-12);
        }
    }

    #[test]
    fn at_most_mode_uses_free_power() {
        // Zero-ratio point can stay unrejected; rejecting the rest costs 0.6.
        let t = np_test(&[0.4, 0.6], &[0.0, 1.0], 0.7, NpMode::AtMost).unwrap();
        assert_eq!(t.test, vec![0.0, 1.0]);
        assert!(t.size() <= 0.7);
        let eq = np_test(&[0.4, 0.6], &[0.0, 1.0], 0.7, NpMode::Equality).unwrap();
        assert!((eq.size() - 0.7).abs() < 1e-12);
        assert!((eq.power() - t.power()).abs() < 1e-12);
    }

    #[test]
    fn zero_null_mass_rejected_for_free() {
        let t = np_test(&[0.5, 0.5, 0.0], &[0.2, 0.3, 0.5], 0.5, NpMode::Equality).unwrap();
        assert_eq!(t.test, vec![0.0, 1.0, 1.0]);
        assert!((t.power() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(np_test(&[0.5, 0.5], &[0.9, 0.1], 1.0, NpMode::Equality).is_err());
        assert!(np_test(&[0.5, 0.6], &[0.9, 0.1], 0.5, NpMode::Equality).is_err());
        assert!(np_test(&[0.5], &[0.9, 0.1], 0.5, NpMode::Equality).is_err());
    }
}
