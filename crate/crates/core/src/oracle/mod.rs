//! Brute-force verifiers. Nothing here calls into [`crate::solver`]: the grid
//! oracle re-derives the threshold structure by sorting discretized cells by
//! marginal cost, and the enumerators walk finite vertex sets.

pub mod instances;

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{Extended, ScenarioSet, StepProcess};
use crate::numeric::{compensated_sum, CompensatedSum};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridOracleConfig {
    /// Cell width Δ.
    pub step: f64,
    /// Truncation point for infinite horizons.
    pub cap: f64,
}

impl Default for GridOracleConfig {
    fn default() -> Self {
        GridOracleConfig { step: 1e-3, cap: 100.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridOracleResult {
    pub objective: f64,
    /// A-priori bound on `|objective − exact optimum|`.
    pub error_bound: f64,
}

struct Cell {
    ratio: f64,
    cost: f64,
    budget: f64,
}

/// `∫ₐᵇ ξ` by walking the segments that overlap `[a, b]`, starting from the
/// segment hint `j`. Returns the integral and the updated hint.
fn cell_integral(p: &StepProcess, a: f64, b: f64, mut j: usize) -> (f64, usize) {
    let n = p.breakpoints.len();
    while j + 1 < n && p.breakpoints[j + 1] <= a {
        j += 1;
    }
    let mut total = 0.0;
    let mut k = j;
    let mut left = a;
    loop {
        let right = if k + 1 < n { p.breakpoints[k + 1].min(b) } else { b };
        total += p.values[k] * (right - left);
        if right >= b || k + 1 >= n {
            break;
        }
        left = right;
        k += 1;
    }
    (total, j)
}

/// Fills the budget with the cheapest cells (cost per unit budget
/// `Y·avg ξ / A`) of width Δ, splitting the boundary cell linearly.
///
/// The result is the exact optimum for the cell-averaged processes, which
/// differ from the true integrals by at most `Δ·(range of ξ on [0, T])` per
/// unit of `ν`-weight; that sum is the reported bound.
pub fn greedy_grid(set: &ScenarioSet, alpha: f64, config: GridOracleConfig) -> Result<GridOracleResult> {
    if !(config.step > 0.0 && config.cap > 0.0) {
        return Err(Error::InvalidInput("oracle step and cap must be positive".into()));
    }
    let mut cells = Vec::new();
    let mut capacity = CompensatedSum::new();
    let mut bound = CompensatedSum::new();
    let mut magnitude = 0.0f64;
    for sc in set.scenarios() {
        let end = match sc.horizon {
            Extended::Finite(t) => t,
            Extended::Infinite => config.cap,
        };
        if end <= 0.0 {
            continue;
        }
        let p = &sc.process;
        let count = (end / config.step).ceil() as usize;
        let mut hint = 0;
        let mut running_max = f64::NEG_INFINITY;
        for k in 0..count {
            let a = k as f64 * config.step;
            let b = if k + 1 == count { end } else { (k + 1) as f64 * config.step };
            if b <= a {
                continue;
            }
            let (integral, h) = cell_integral(p, a, b, hint);
            hint = h;
            // Averages of a nondecreasing function over consecutive cells are
            // nondecreasing; the running max absorbs rounding.
            running_max = running_max.max(sc.density * integral / (sc.rate * (b - a)));
            let cost = sc.cost_weight() * integral;
            magnitude = magnitude.max(cost.abs());
            cells.push(Cell { ratio: running_max, cost, budget: sc.budget_weight() * (b - a) });
            capacity.add(sc.budget_weight() * (b - a));
        }
        bound.add(sc.cost_weight() * config.step * (p.value_before(end) - p.values[0]));
    }
    let capacity = capacity.value();
    if !(alpha >= 0.0) || alpha > capacity * (1.0 + 1e-12) {
        return Err(Error::InfeasibleAlpha { alpha, limit: capacity });
    }
    // Stable: equal ratios keep scenario and time order.
    cells.sort_by(|x, y| x.ratio.partial_cmp(&y.ratio).unwrap_or(Ordering::Equal));
    let mut remaining = alpha;
    let mut cost = CompensatedSum::new();
    for c in &cells {
        if remaining <= 0.0 {
            break;
        }
        if c.budget <= remaining {
            cost.add(c.cost);
            remaining -= c.budget;
        } else {
            cost.add(c.cost * (remaining / c.budget));
            remaining = 0.0;
        }
    }
    let float_slack = 1e-12 * magnitude * cells.len() as f64;
    Ok(GridOracleResult { objective: cost.value(), error_bound: bound.value() + float_slack })
}

/// Random feasible rules `τᵢ = min(c·uᵢ·Tᵢ, Tᵢ)` with `uᵢ ~ U(0, 1]` and `c`
/// chosen by bisection so that `Σ wᵢAᵢτᵢ = α`.
pub fn feasible_sampler(set: &ScenarioSet, alpha: f64, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let horizons: Vec<f64> = set
        .scenarios()
        .iter()
        .map(|s| s.horizon.finite().ok_or(Error::InfiniteTotalBudget))
        .collect::<Result<_>>()?;
    let rates: Vec<f64> = set.scenarios().iter().map(|s| s.weight * s.rate).collect();
    let total = compensated_sum(rates.iter().zip(&horizons).map(|(r, t)| r * t));
    if !(alpha >= 0.0) || alpha > total {
        return Err(Error::InfeasibleAlpha { alpha, limit: total });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let u: Vec<f64> = (0..set.len()).map(|_| 1.0 - rng.random::<f64>()).collect();
        if alpha == 0.0 {
            out.push(vec![0.0; set.len()]);
            continue;
        }
        if alpha == total {
            out.push(horizons.clone());
            continue;
        }
        let times = |c: f64| -> Vec<f64> {
            u.iter().zip(&horizons).map(|(&u, &t)| (c * u * t).min(t)).collect()
        };
        let spend = |tau: &[f64]| compensated_sum(rates.iter().zip(tau).map(|(r, t)| r * t));
        let (mut lo, mut hi) = (0.0, 1.0 / u.iter().copied().fold(f64::INFINITY, f64::min));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if spend(&times(mid)) < alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (tl, th) = (times(lo), times(hi));
        let pick = if (spend(&tl) - alpha).abs() <= (spend(&th) - alpha).abs() { tl } else { th };
        out.push(pick);
    }
    Ok(out)
}

pub const NP_ENUMERATION_LIMIT: usize = 12;

/// Maximal power `Σ p1ᵢτᵢ` over the vertices of
/// `{τ ∈ [0,1]ⁿ : Σ p0ᵢτᵢ = α}`; every vertex has at most one fractional
/// coordinate.
pub fn np_lp_enumerate(p0: &[f64], p1: &[f64], alpha: f64) -> Result<(f64, Vec<f64>)> {
    let n = p0.len();
    if n > NP_ENUMERATION_LIMIT {
        return Err(Error::DimensionTooLarge { n, max: NP_ENUMERATION_LIMIT });
    }
    if p1.len() != n {
        return Err(Error::InvalidInput("p0 and p1 lengths differ".into()));
    }
    let tol = 1e-12;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |tau: Vec<f64>| {
        let power = compensated_sum(p1.iter().zip(&tau).map(|(a, b)| a * b));
        if best.as_ref().is_none_or(|(p, _)| power > *p) {
            best = Some((power, tau));
        }
    };
    for mask in 0u32..(1 << n) {
        let ones: Vec<f64> = (0..n).map(|i| f64::from(mask >> i & 1)).collect();
        let size = compensated_sum(p0.iter().zip(&ones).map(|(a, b)| a * b));
        if (size - alpha).abs() <= tol {
            consider(ones.clone());
        }
        for j in (0..n).filter(|&j| mask >> j & 1 == 0 && p0[j] > 0.0) {
            let frac = (alpha - size) / p0[j];
            if (0.0..=1.0).contains(&frac) {
                let mut tau = ones.clone();
                tau[j] = frac;
                consider(tau);
            }
        }
    }
    best.ok_or(Error::InfeasibleAlpha { alpha, limit: p0.iter().sum() })
}

/// Exhaustive optimum of the discrete-time problem: every integer rule vector
/// `τᵢ ∈ {0, …, Tᵢ}` and every two-point randomization between them whose
/// expected budget is `α`. Returns the optimal expected cost.
pub fn discrete_enumerate(set: &ScenarioSet, alpha: f64) -> Result<f64> {
    let mut horizons = Vec::new();
    for s in set.scenarios() {
        match s.horizon {
            Extended::Finite(t) if t.fract() == 0.0 && t <= 64.0 => horizons.push(t as usize),
            _ => return Err(Error::InvalidInput("discrete enumeration needs small integer horizons".into())),
        }
    }
    let rules: usize = horizons.iter().map(|t| t + 1).product();
    if rules > 200_000 {
        return Err(Error::DimensionTooLarge { n: rules, max: 200_000 });
    }
    // Per-scenario integer prefix sums Σ_{n<τ} ξ(n).
    let prefix: Vec<Vec<f64>> = set
        .scenarios()
        .iter()
        .zip(&horizons)
        .map(|(s, &t)| {
            let mut acc = vec![0.0];
            for n in 0..t {
                acc.push(acc[n] + s.process.value_at(n as f64));
            }
            acc
        })
        .collect();
    let mut points = Vec::with_capacity(rules);
    let mut idx = vec![0usize; horizons.len()];
    loop {
        let mut b = CompensatedSum::new();
        let mut c = CompensatedSum::new();
        for (i, s) in set.scenarios().iter().enumerate() {
            b.add(s.weight * s.rate * idx[i] as f64);
            c.add(s.weight * s.density * prefix[i][idx[i]]);
        }
        points.push((b.value(), c.value()));
        let mut k = 0;
        loop {
            if k == idx.len() {
                break;
            }
            idx[k] += 1;
            if idx[k] <= horizons[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    let tol = 1e-12 * 1f64.max(alpha);
    let below: Vec<_> = points.iter().filter(|p| p.0 <= alpha + tol).collect();
    let above: Vec<_> = points.iter().filter(|p| p.0 >= alpha - tol).collect();
    let mut best = f64::INFINITY;
    for &&(b1, c1) in &below {
        if (b1 - alpha).abs() <= tol {
            best = best.min(c1);
            continue;
        }
        for &&(b2, c2) in &above {
            if b2 > alpha + tol {
                let w = (alpha - b1) / (b2 - b1);
                best = best.min((1.0 - w) * c1 + w * c2);
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::InfeasibleAlpha { alpha, limit: points.iter().map(|p| p.0).fold(0.0, f64::max) })
    }
}
