//! Threshold solver for
//!
//! ```text
//! min ν∫₀^τ ξ(s) ds   s.t.  τ ∈ [0, T] μ-a.e.,  μ[Aτ] = α   (or ≤ α)
//! ```
//!
//! on a finite [`ScenarioSet`]. For a level `λ` each scenario stops at
//! `τ_λ = inf{t : Yξ(t) ≥ Aλ} ∧ T` (weak crossing) or
//! `τ_λ+ = inf{t : Yξ(t) > Aλ} ∧ T` (strict crossing). The budget map
//! `λ ↦ μ[Aτ_λ]` is a nondecreasing step function whose jumps sit on the
//! finite set of critical levels `Yᵢv_ij/Aᵢ`, so the multiplier is found by
//! binary search over that set with no root-finding tolerance. When the map
//! jumps over `α` the two crossings are mixed with weight
//! `q = (α − μ[Aτ_λ]) / μ[A(τ_λ+ − τ_λ)]`.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::measure::{Extended, Scenario, ScenarioSet};
use crate::numeric::CompensatedSum;

/// Relative feasibility tolerance on the attained budget.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Relative slack allowed on certificate margins.
pub const CERTIFICATE_SLACK: f64 = 1e-9;
/// Default number of equispaced certificate points per scenario.
pub const DEFAULT_CERTIFY_GRID: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleMode {
    /// Every scenario stops at `(1 − q)·lower + q·upper`.
    DeterministicCombination,
    /// With probability `q` every scenario stops at `upper`, otherwise at
    /// `lower`.
    MixedStrategy,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StoppingRule {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub mix: f64,
    pub mode: RuleMode,
}

impl StoppingRule {
    pub fn pure(times: Vec<f64>) -> Self {
        StoppingRule {
            upper: times.clone(),
            lower: times,
            mix: 0.0,
            mode: RuleMode::DeterministicCombination,
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn effective_time(&self, i: usize) -> f64 {
        let (lo, up) = (self.lower[i], self.upper[i]);
        if self.mix == 0.0 {
            lo
        } else if self.mix == 1.0 {
            up
        } else {
            ((1.0 - self.mix) * lo + self.mix * up).clamp(lo, up)
        }
    }

    /// Per-scenario `(1 − q)·lower + q·upper`.
    pub fn effective(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.effective_time(i)).collect()
    }

    fn check_against(&self, set: &ScenarioSet) -> Result<()> {
        if self.lower.len() != set.len() || self.upper.len() != set.len() {
            return Err(Error::RuleInfeasible {
                scenario: self.lower.len().min(self.upper.len()),
                reason: format!("rule has {} entries for {} scenarios", self.lower.len(), set.len()),
            });
        }
        if !(0.0..=1.0).contains(&self.mix) {
            return Err(Error::RuleInfeasible {
                scenario: 0,
                reason: format!("mixing weight {} outside [0, 1]", self.mix),
            });
        }
        for (i, sc) in set.scenarios().iter().enumerate() {
            let (lo, up) = (self.lower[i], self.upper[i]);
            let within = |t: f64| t.is_finite() && t >= 0.0 && sc.horizon.cmp_f64(t) != Ordering::Less;
            if !(within(lo) && within(up) && lo <= up) {
                return Err(Error::RuleInfeasible {
                    scenario: i,
                    reason: format!("times ({lo}, {up}) not ordered inside [0, {}]", sc.horizon),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    pub rule: StoppingRule,
    /// Lagrange multiplier `λ*`.
    pub multiplier: f64,
    /// Attained `ν∫₀^τ ξ`.
    pub objective: f64,
    /// Attained `μ[Aτ]`.
    pub budget: f64,
    /// Filled in by [`certify`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_margin: Option<f64>,
    /// Bernoulli(q) realizations for the mixed strategy (discrete solver
    /// with a seed only); `true` selects `upper`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub draws: Vec<bool>,
}

impl Solution {
    /// Objective scale used by the certificate and dominance slacks.
    pub fn scale(&self) -> f64 {
        1f64.max(self.objective.abs())
    }
}

/// `inf{t : Yξ(t) ≥ A·level}`; `Infinite` when the level is never reached.
pub fn pseudo_inverse(scenario: &Scenario, level: f64) -> Extended {
    let p = &scenario.process;
    let j = p.values.partition_point(|&v| scenario.level(v) < level);
    p.breakpoints.get(j).map_or(Extended::Infinite, |&t| Extended::Finite(t))
}

/// `inf{t : Yξ(t) > A·level}`.
pub fn strict_pseudo_inverse(scenario: &Scenario, level: f64) -> Extended {
    let p = &scenario.process;
    let j = p.values.partition_point(|&v| scenario.level(v) <= level);
    p.breakpoints.get(j).map_or(Extended::Infinite, |&t| Extended::Finite(t))
}

/// `(τ_λ, τ_λ+)`, both capped at the horizon.
pub fn tau_pair(scenario: &Scenario, level: f64) -> (Extended, Extended) {
    (
        pseudo_inverse(scenario, level).min(scenario.horizon),
        strict_pseudo_inverse(scenario, level).min(scenario.horizon),
    )
}

fn weighted_sum(parts: impl Iterator<Item = Extended>, set: &ScenarioSet) -> Extended {
    let mut acc = CompensatedSum::new();
    for (sc, t) in set.scenarios().iter().zip(parts) {
        match t {
            Extended::Finite(t) => acc.add(sc.budget_weight() * t),
            Extended::Infinite => return Extended::Infinite,
        }
    }
    Extended::Finite(acc.value())
}

/// `(μ[Aτ_λ], μ[Aτ_λ+])`. Both components are nondecreasing in `level`.
pub fn budget_map(set: &ScenarioSet, level: f64) -> (Extended, Extended) {
    let pairs = exec::map(set.scenarios(), |sc| tau_pair(sc, level));
    (
        weighted_sum(pairs.iter().map(|p| p.0), set),
        weighted_sum(pairs.iter().map(|p| p.1), set),
    )
}

fn lower_budget(set: &ScenarioSet, level: f64) -> Extended {
    let times = exec::map(set.scenarios(), |sc| pseudo_inverse(sc, level).min(sc.horizon));
    weighted_sum(times.into_iter(), set)
}

/// Sorted, deduplicated `{Yᵢ·v_ij / Aᵢ}`.
pub fn critical_levels(set: &ScenarioSet) -> Vec<f64> {
    let mut levels: Vec<f64> = set
        .scenarios()
        .iter()
        .flat_map(|sc| sc.process.values.iter().map(move |&v| sc.level(v)))
        .collect();
    levels.sort_by(|a, b| a.partial_cmp(b).expect("levels are finite"));
    levels.dedup();
    levels
}

fn times_at(set: &ScenarioSet, level: f64, strict: bool) -> Vec<f64> {
    exec::map(set.scenarios(), |sc| {
        let t = if strict { strict_pseudo_inverse(sc, level) } else { pseudo_inverse(sc, level) };
        t.min(sc.horizon).to_f64()
    })
}

fn horizons(set: &ScenarioSet) -> Vec<f64> {
    set.scenarios().iter().map(|sc| sc.horizon.to_f64()).collect()
}

fn weighted_times(set: &ScenarioSet, times: &[f64], weight: impl Fn(&Scenario) -> f64) -> f64 {
    set.scenarios()
        .iter()
        .zip(times)
        .map(|(sc, &t)| weight(sc) * t)
        .collect::<CompensatedSum>()
        .value()
}

fn cost_at(set: &ScenarioSet, times: &[f64]) -> f64 {
    let parts = exec::map_range(set.len(), |i| {
        let sc = &set.scenarios()[i];
        if sc.density == 0.0 {
            0.0
        } else {
            sc.cost_weight() * sc.process.phi(times[i])
        }
    });
    parts.into_iter().collect::<CompensatedSum>().value()
}

fn check_alpha(set: &ScenarioSet, alpha: f64) -> Result<Extended> {
    let total = set.total_budget();
    if !(alpha >= 0.0) || total.cmp_f64(alpha) == Ordering::Less {
        return Err(Error::InfeasibleAlpha { alpha, limit: total.to_f64() });
    }
    Ok(total)
}

fn finish(set: &ScenarioSet, rule: StoppingRule, multiplier: f64) -> Solution {
    let q = rule.mix;
    let objective = if q == 0.0 {
        cost_at(set, &rule.lower)
    } else {
        (1.0 - q) * cost_at(set, &rule.lower) + q * cost_at(set, &rule.upper)
    };
    let budget = set
        .scenarios()
        .iter()
        .enumerate()
        .map(|(i, sc)| sc.budget_weight() * ((1.0 - q) * rule.lower[i] + q * rule.upper[i]))
        .collect::<CompensatedSum>()
        .value();
    Solution { rule, multiplier, objective, budget, certificate_margin: None, draws: Vec::new() }
}

/// A level at which every scenario runs to its horizon: the largest level
/// seen strictly before the horizon.
fn saturating_level(set: &ScenarioSet, levels: &[f64]) -> f64 {
    set.scenarios()
        .iter()
        .filter_map(|sc| match sc.horizon {
            Extended::Finite(t) if t > 0.0 => Some(sc.level(sc.process.value_before(t))),
            _ => None,
        })
        .fold(levels[0], f64::max)
}

/// Solves the equality-constrained problem `μ[Aτ] = α`.
///
/// Ties between levels that meet `α` exactly resolve to the smallest level.
pub fn solve_equality(set: &ScenarioSet, alpha: f64) -> Result<Solution> {
    let total = check_alpha(set, alpha)?;
    let levels = critical_levels(set);
    if alpha == 0.0 {
        return Ok(finish(set, StoppingRule::pure(vec![0.0; set.len()]), levels[0]));
    }
    if total == Extended::Finite(alpha) {
        let level = saturating_level(set, &levels);
        return Ok(finish(set, StoppingRule::pure(horizons(set)), level));
    }

    // Smallest m with B(L_m) ≥ α, where B(L_0) = 0 < α.
    let (mut lo, mut hi) = (0usize, levels.len());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if lower_budget(set, levels[mid]).cmp_f64(alpha) == Ordering::Less {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let m = lo;
    if m < levels.len() && lower_budget(set, levels[m]) == Extended::Finite(alpha) {
        let rule = StoppingRule::pure(times_at(set, levels[m], false));
        return Ok(finish(set, rule, levels[m]));
    }

    let level = levels[m - 1];
    let lower = times_at(set, level, false);
    let upper = times_at(set, level, true);
    if upper.iter().any(|t| t.is_infinite()) {
        return Err(Error::UnboundedBudget { alpha, level });
    }
    let below = weighted_times(set, &lower, Scenario::budget_weight);
    let gap = set
        .scenarios()
        .iter()
        .enumerate()
        .map(|(i, sc)| sc.budget_weight() * (upper[i] - lower[i]))
        .collect::<CompensatedSum>()
        .value();
    let q = ((alpha - below) / gap).clamp(0.0, 1.0);
    let rule = StoppingRule { lower, upper, mix: q, mode: RuleMode::DeterministicCombination };
    Ok(finish(set, rule, level))
}

/// Solves `μ[Aτ] ≤ α`. When the zero-level rule fits the budget it is
/// optimal; the strict member `τ_0+` is preferred over `τ_0` when both fit.
pub fn solve_inequality(set: &ScenarioSet, alpha: f64) -> Result<Solution> {
    if !(alpha >= 0.0) {
        return Err(Error::InfeasibleAlpha { alpha, limit: set.total_budget().to_f64() });
    }
    let (weak, strict) = budget_map(set, 0.0);
    if strict.cmp_f64(alpha) != Ordering::Greater {
        return Ok(finish(set, StoppingRule::pure(times_at(set, 0.0, true)), 0.0));
    }
    if weak.cmp_f64(alpha) != Ordering::Greater {
        return Ok(finish(set, StoppingRule::pure(times_at(set, 0.0, false)), 0.0));
    }
    solve_equality(set, alpha)
}

/// Options for [`solve_discrete`].
#[derive(Clone, Copy, Debug, Default)]
pub struct DiscreteOptions {
    /// Seed for Bernoulli(q) draws; `None` draws nothing.
    pub seed: Option<u64>,
    pub draws: usize,
}

/// Discrete-time variant: integer breakpoints and horizons, integer-valued
/// stopping times, randomized between the two integer rules.
pub fn solve_discrete(set: &ScenarioSet, alpha: f64, options: DiscreteOptions) -> Result<Solution> {
    let integral = |x: f64| x >= 0.0 && x.fract() == 0.0;
    for (i, sc) in set.scenarios().iter().enumerate() {
        if !sc.process.breakpoints.iter().all(|&b| integral(b)) {
            return Err(Error::NonIntegerGrid { scenario: i, what: "breakpoint" });
        }
        if let Extended::Finite(t) = sc.horizon {
            if !integral(t) {
                return Err(Error::NonIntegerGrid { scenario: i, what: "horizon" });
            }
        }
    }
    // With integer breakpoints every crossing time is already an integer.
    let mut solution = solve_equality(set, alpha)?;
    solution.rule.mode = RuleMode::MixedStrategy;
    if let Some(seed) = options.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = solution.rule.mix;
        solution.draws = (0..options.draws).map(|_| rng.random::<f64>() < q).collect();
    }
    Ok(solution)
}

/// `ν∫₀^τ ξ` for a rule, in either mode.
pub fn objective(set: &ScenarioSet, rule: &StoppingRule) -> Result<f64> {
    rule.check_against(set)?;
    Ok(match rule.mode {
        RuleMode::DeterministicCombination => cost_at(set, &rule.effective()),
        RuleMode::MixedStrategy => {
            let q = rule.mix;
            (1.0 - q) * cost_at(set, &rule.lower) + q * cost_at(set, &rule.upper)
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateReport {
    /// `min g(t) − g(τ)` over all checked points and scenarios.
    pub margin: f64,
    pub worst_scenario: usize,
    pub worst_time: f64,
    /// `margin ≥ −slack·scale`.
    pub passed: bool,
}

/// Checks the supporting-line inequality `Yφ(t) − λ*At ≥ Yφ(τ) − λ*Aτ` per
/// scenario at every breakpoint, the horizon, both rule times and `grid`
/// equispaced points of `[0, T ∧ (t_last + 1)]`.
pub fn certify(set: &ScenarioSet, solution: &Solution, grid: usize) -> CertificateReport {
    let lambda = solution.multiplier;
    let rule = &solution.rule;
    let per_scenario = exec::map_range(set.len(), |i| {
        let sc = &set.scenarios()[i];
        let g = |t: f64| sc.density * sc.process.phi(t) - lambda * sc.rate * t;
        let refs: Vec<f64> = match rule.mode {
            RuleMode::DeterministicCombination => vec![rule.effective_time(i)],
            RuleMode::MixedStrategy => {
                let mut r = Vec::with_capacity(2);
                if rule.mix < 1.0 {
                    r.push(rule.lower[i]);
                }
                if rule.mix > 0.0 {
                    r.push(rule.upper[i]);
                }
                r
            }
        };
        let g_ref = refs.iter().map(|&t| g(t)).fold(f64::NEG_INFINITY, f64::max);
        let end = sc.horizon.min(Extended::Finite(sc.process.breakpoints.last().unwrap() + 1.0));
        let end = end.to_f64();
        let mut points: Vec<f64> = sc
            .process
            .breakpoints
            .iter()
            .copied()
            .filter(|&b| sc.horizon.cmp_f64(b) != Ordering::Less)
            .collect();
        if let Extended::Finite(t) = sc.horizon {
            points.push(t);
        }
        points.push(rule.lower[i]);
        points.push(rule.upper[i]);
        points.extend((0..=grid).map(|k| end * k as f64 / grid.max(1) as f64));
        points
            .into_iter()
            .map(|t| (g(t) - g_ref, t))
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
    });
    let (worst_scenario, &(margin, worst_time)) = per_scenario
        .iter()
        .enumerate()
        .fold(None::<(usize, &(f64, f64))>, |acc, (i, m)| match acc {
            Some((_, best)) if best.0 <= m.0 => acc,
            _ => Some((i, m)),
        })
        .expect("nonempty set");
    CertificateReport {
        margin,
        worst_scenario,
        worst_time,
        passed: margin >= -CERTIFICATE_SLACK * solution.scale(),
    }
}

/// Fills `solution.certificate_margin`.
pub fn attach_certificate(set: &ScenarioSet, solution: &mut Solution, grid: usize) -> CertificateReport {
    let report = certify(set, solution, grid);
    solution.certificate_margin = Some(report.margin);
    report
}

/// Optimal value `f(α)` at each requested budget. `f` is convex in `α`.
pub fn value_curve(set: &ScenarioSet, alphas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let total = set.total_budget().finite().ok_or(Error::InfiniteTotalBudget)?;
    if alphas.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidInput("alphas must be sorted ascending".into()));
    }
    for &a in alphas {
        if !(0.0..=total).contains(&a) {
            return Err(Error::InfeasibleAlpha { alpha: a, limit: total });
        }
    }
    exec::map_heavy(alphas.len(), |k| solve_equality(set, alphas[k]).map(|s| (alphas[k], s.objective)))
        .into_iter()
        .collect()
}

/// `n` equispaced budgets from `lo` to `hi` inclusive.
pub fn alpha_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::StepProcess;

    fn proc(bp: &[f64], v: &[f64]) -> StepProcess {
        StepProcess { breakpoints: bp.to_vec(), values: v.to_vec() }
    }

    fn one(bp: &[f64], v: &[f64], t: Extended) -> Scenario {
        Scenario::unit(1.0, t, proc(bp, v))
    }

    /// Two scenarios, w = 0.5, Y = A = 1, T = 10, jumps 0→5 at t = 1 and 3.
    pub(crate) fn two_jump_set() -> ScenarioSet {
        ScenarioSet::new(vec![
            Scenario::unit(0.5, Extended::Finite(10.0), proc(&[0.0, 1.0], &[0.0, 5.0])),
            Scenario::unit(0.5, Extended::Finite(10.0), proc(&[0.0, 3.0], &[0.0, 5.0])),
        ])
        .unwrap()
    }

    #[test]
    fn pseudo_inverse_examples() {
        let sc = one(&[0.0, 2.0], &[0.0, 3.0], Extended::Finite(10.0));
        assert_eq!(pseudo_inverse(&sc, 3.0), Extended::Finite(2.0));
        assert_eq!(pseudo_inverse(&sc, 0.0), Extended::Finite(0.0));
        assert_eq!(pseudo_inverse(&sc, 4.0), Extended::Infinite);
    }

    #[test]
    fn pseudo_inverse_uses_density_and_rate() {
        let mut sc = one(&[0.0, 2.0], &[1.0, 3.0], Extended::Finite(10.0));
        sc.density = 2.0;
        sc.rate = 4.0;
        // Yξ ≥ Aλ ⇔ ξ ≥ 2λ.
        assert_eq!(pseudo_inverse(&sc, 0.5), Extended::Finite(0.0));
        assert_eq!(pseudo_inverse(&sc, 0.75), Extended::Finite(2.0));
        sc.density = 0.0;
        assert_eq!(pseudo_inverse(&sc, 0.0), Extended::Finite(0.0));
        assert_eq!(pseudo_inverse(&sc, 1e-300), Extended::Infinite);
    }

    #[test]
    fn tau_pair_examples() {
        let sc = one(&[0.0, 1.0], &[0.0, 5.0], Extended::Finite(10.0));
        let f = Extended::Finite;
        assert_eq!(tau_pair(&sc, 5.0), (f(1.0), f(10.0)));
        assert_eq!(tau_pair(&sc, 2.0), (f(1.0), f(1.0)));
        assert_eq!(tau_pair(&sc, -1.0), (f(0.0), f(0.0)));
        assert_eq!(tau_pair(&sc, 7.0), (f(10.0), f(10.0)));
    }

    #[test]
    fn budget_map_examples() {
        let set = two_jump_set();
        let f = Extended::Finite;
        assert_eq!(budget_map(&set, 2.0), (f(2.0), f(2.0)));
        assert_eq!(budget_map(&set, 5.0), (f(2.0), f(10.0)));
        assert_eq!(budget_map(&set, 1e300), (f(10.0), f(10.0)));
        assert_eq!(set.total_budget(), f(10.0));
    }

    #[test]
    fn budget_map_infinite_horizon() {
        let set = ScenarioSet::new(vec![one(&[0.0, 1.0], &[0.0, 2.0], Extended::Infinite)]).unwrap();
        assert_eq!(budget_map(&set, 2.0), (Extended::Finite(1.0), Extended::Infinite));
        assert_eq!(budget_map(&set, 3.0).0, Extended::Infinite);
    }

    #[test]
    fn equality_pure_hit() {
        let s = solve_equality(&two_jump_set(), 2.0).unwrap();
        assert_eq!(s.rule.lower, vec![1.0, 3.0]);
        assert_eq!(s.rule.upper, vec![1.0, 3.0]);
        assert_eq!(s.rule.mix, 0.0);
        assert!(s.multiplier > 0.0 && s.multiplier <= 5.0);
        assert_eq!(s.objective, 0.0);
        assert_eq!(s.budget, 2.0);
    }

    #[test]
    fn equality_mixture() {
        let s = solve_equality(&two_jump_set(), 2.5).unwrap();
        assert_eq!(s.multiplier, 5.0);
        assert_eq!(s.rule.mix, 1.0 / 16.0);
        assert_eq!(s.rule.lower, vec![1.0, 3.0]);
        assert_eq!(s.rule.upper, vec![10.0, 10.0]);
        assert!((s.objective - 2.5).abs() < 1e-12);
        assert!((s.budget - 2.5).abs() < 1e-12);
    }

    #[test]
    fn equality_degenerate_budgets() {
        let set = two_jump_set();
        let zero = solve_equality(&set, 0.0).unwrap();
        assert_eq!(zero.rule.effective(), vec![0.0, 0.0]);
        assert_eq!(zero.objective, 0.0);
        let full = solve_equality(&set, 10.0).unwrap();
        assert_eq!(full.rule.effective(), vec![10.0, 10.0]);
        assert_eq!(full.objective, 0.5 * 45.0 + 0.5 * 35.0);
        assert!(certify(&set, &full, 100).passed);
        assert!(certify(&set, &zero, 100).passed);
    }

    #[test]
    fn equality_infeasible() {
        let set = two_jump_set();
        assert!(matches!(solve_equality(&set, 10.5), Err(Error::InfeasibleAlpha { .. })));
        assert!(matches!(solve_equality(&set, -0.1), Err(Error::InfeasibleAlpha { .. })));
        assert!(matches!(solve_equality(&set, f64::NAN), Err(Error::InfeasibleAlpha { .. })));
    }

    #[test]
    fn equality_unbounded_budget() {
        let set = ScenarioSet::new(vec![one(&[0.0, 1.0], &[0.0, 2.0], Extended::Infinite)]).unwrap();
        let s = solve_equality(&set, 0.5).unwrap();
        assert_eq!(s.rule.effective(), vec![0.5]);
        assert!(solve_equality(&set, 1.0).is_ok());
        assert!(matches!(solve_equality(&set, 1.5), Err(Error::UnboundedBudget { .. })));
    }

    #[test]
    fn inequality_examples() {
        let set = two_jump_set();
        // Zero-cost prefix: τ_0 = 0, τ_0+ = (1, 3) with budget 2.
        let s = solve_inequality(&set, 3.0).unwrap();
        assert_eq!(s.rule.effective(), vec![1.0, 3.0]);
        assert_eq!(s.objective, 0.0);
        let s = solve_inequality(&set, 1.0).unwrap();
        assert_eq!(s.rule.effective(), vec![0.0, 0.0]);

        let neg = ScenarioSet::new(vec![one(&[0.0], &[-1.0], Extended::Finite(10.0))]).unwrap();
        let s = solve_inequality(&neg, 4.0).unwrap();
        assert_eq!(s.rule.effective(), vec![4.0]);
        assert_eq!(s.objective, -4.0);
        let s = solve_inequality(&neg, 12.0).unwrap();
        assert_eq!(s.rule.effective(), vec![10.0]);
        assert_eq!(s.objective, -10.0);
        assert!(s.budget <= 12.0);
    }

    fn staircase_set() -> ScenarioSet {
        let bp: Vec<f64> = (0..10).map(f64::from).collect();
        ScenarioSet::new(vec![Scenario::unit(1.0, Extended::Finite(10.0), proc(&bp, &bp))]).unwrap()
    }

    #[test]
    fn discrete_mixture() {
        let set = staircase_set();
        let s = solve_discrete(&set, 2.5, DiscreteOptions::default()).unwrap();
        assert_eq!(s.rule.mode, RuleMode::MixedStrategy);
        assert_eq!(s.multiplier, 2.0);
        assert_eq!((s.rule.lower[0], s.rule.upper[0], s.rule.mix), (2.0, 3.0, 0.5));
        assert_eq!(s.budget, 2.5);
        assert!(s.draws.is_empty());
        // φ(2) = 1, φ(3) = 3.
        assert_eq!(s.objective, 2.0);

        let pure = solve_discrete(&set, 4.0, DiscreteOptions::default()).unwrap();
        assert_eq!(pure.rule.mix, 0.0);
        assert_eq!(pure.rule.lower, vec![4.0]);
        let zero = solve_discrete(&set, 0.0, DiscreteOptions::default()).unwrap();
        assert_eq!(zero.rule.lower, vec![0.0]);
    }

    #[test]
    fn discrete_draws_are_reproducible() {
        let set = staircase_set();
        let opts = DiscreteOptions { seed: Some(7), draws: 2000 };
        let a = solve_discrete(&set, 2.5, opts).unwrap();
        let b = solve_discrete(&set, 2.5, opts).unwrap();
        assert_eq!(a.draws, b.draws);
        let frac = a.draws.iter().filter(|&&d| d).count() as f64 / 2000.0;
        assert!((frac - 0.5).abs() < 0.05);
    }

    #[test]
    fn discrete_rejects_fractional_grid() {
        let set = ScenarioSet::new(vec![one(&[0.0, 1.5], &[0.0, 1.0], Extended::Finite(3.0))]).unwrap();
        assert!(matches!(
            solve_discrete(&set, 1.0, DiscreteOptions::default()),
            Err(Error::NonIntegerGrid { what: "breakpoint", .. })
        ));
        let set = ScenarioSet::new(vec![one(&[0.0], &[0.0], Extended::Finite(2.5))]).unwrap();
        assert!(matches!(
            solve_discrete(&set, 1.0, DiscreteOptions::default()),
            Err(Error::NonIntegerGrid { what: "horizon", .. })
        ));
    }

    #[test]
    fn objective_examples() {
        let set = two_jump_set();
        assert_eq!(objective(&set, &StoppingRule::pure(vec![0.0, 0.0])).unwrap(), 0.0);
        let s = solve_equality(&set, 2.5).unwrap();
        let det = objective(&set, &s.rule).unwrap();
        let mut mixed = s.rule.clone();
        mixed.mode = RuleMode::MixedStrategy;
        let mix = objective(&set, &mixed).unwrap();
        assert!((det - 2.5).abs() < 1e-12 && (mix - 2.5).abs() < 1e-12);

        let unit = ScenarioSet::new(vec![one(&[0.0], &[1.0], Extended::Finite(5.0))]).unwrap();
        assert_eq!(objective(&unit, &StoppingRule::pure(vec![3.0])).unwrap(), 3.0);
        assert!(matches!(
            objective(&unit, &StoppingRule::pure(vec![6.0])),
            Err(Error::RuleInfeasible { scenario: 0, .. })
        ));
    }

    #[test]
    fn certificate_detects_perturbation() {
        let set = two_jump_set();
        let mut s = solve_equality(&set, 2.0).unwrap();
        assert!(certify(&set, &s, 1000).margin >= -1e-12);
        // Stop scenario 0 at 0.5, before its jump: ξ = 0 < λ* = 5 there, so
        // g keeps decreasing past 0.5.
        s.rule.lower[0] = 0.5;
        s.rule.upper[0] = 0.5;
        let r = certify(&set, &s, 1000);
        assert!(r.margin < -1.0, "{r:?}");
        assert_eq!(r.worst_scenario, 0);
        assert!(!r.passed);
    }

    #[test]
    fn certificate_flat_segment_is_zero() {
        let set = ScenarioSet::new(vec![one(&[0.0, 1.0, 2.0], &[0.0, 2.0, 4.0], Extended::Finite(3.0))])
            .unwrap();
        let s = solve_equality(&set, 1.5).unwrap();
        assert_eq!(s.multiplier, 2.0);
        let r = certify(&set, &s, 1000);
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn value_curve_examples() {
        let set = two_jump_set();
        assert_eq!(value_curve(&set, &[0.0]).unwrap(), vec![(0.0, 0.0)]);
        let end = value_curve(&set, &[10.0]).unwrap();
        assert_eq!(end[0].1, set.full_horizon_cost().unwrap());
        let f = value_curve(&set, &[1.0, 2.0, 3.0]).unwrap();
        assert!(f[1].1 <= 0.5 * (f[0].1 + f[2].1) + 1e-12);
        assert!(value_curve(&set, &[2.0, 1.0]).is_err());
        assert!(value_curve(&set, &[11.0]).is_err());
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let scenarios: Vec<Scenario> = (0..3000)
            .map(|i| {
                let x = (i as f64 * 0.37).sin().abs();
                Scenario::unit(
                    1.0 + x,
                    Extended::Finite(1.0 + 3.0 * x),
                    proc(&[0.0, 0.5 + x], &[-x, 1.0 + x]),
                )
            })
            .collect();
        let set = ScenarioSet::new(scenarios).unwrap();
        let alpha = 0.4 * set.total_budget().to_f64();
        let par = solve_equality(&set, alpha).unwrap();
        let seq = exec::sequential(|| solve_equality(&set, alpha)).unwrap();
        assert_eq!(par, seq);
    }
}
