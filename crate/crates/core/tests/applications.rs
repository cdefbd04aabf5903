use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stoch_thresh::closed_form::{
    np_test, quadratic_budget, separable_convex, solve_portfolio, stationary_excess_rule, EmpiricalHorizon,
    MarginalUtility, NpMode, PortfolioProblem, QuadScenario,
};
use stoch_thresh::oracle::instances::{random_set, SetShape};
use stoch_thresh::oracle::{feasible_sampler, greedy_grid, np_lp_enumerate, GridOracleConfig};
use stoch_thresh::ratio::{
    clearing_optimal, compose_holding, regulation_optimal, storage_cost, storage_rate, ClearingProblem, HoldingCost,
    RegulationProblem, StorageProblem,
};
use stoch_thresh::solver::{objective, solve_equality, StoppingRule};
use stoch_thresh::{Extended, Scenario, ScenarioSet, StepProcess};

fn simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

#[test]
fn np_test_is_a_likelihood_ratio_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let p0 = simplex(&mut rng, n);
        let p1: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let alpha = rng.random_range(0.01..0.99);
        let t = np_test(&p0, &p1, alpha, NpMode::Equality).unwrap();
        assert!((t.size() - alpha).abs() < 1e-12);
        // Some k separates rejected from accepted points.
        let ratio = |i: usize| p1[i] / p0[i];
        let min_reject = (0..n).filter(|&i| t.test[i] == 1.0).map(ratio).fold(f64::INFINITY, f64::min);
        let max_accept = (0..n).filter(|&i| t.test[i] == 0.0).map(ratio).fold(f64::NEG_INFINITY, f64::max);
        assert!(max_accept <= min_reject);
        for i in (0..n).filter(|&i| t.test[i] > 0.0 && t.test[i] < 1.0) {
            assert!(ratio(i) >= max_accept && ratio(i) <= min_reject);
        }
    }
}

#[test]
fn np_at_most_is_at_least_as_powerful() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let p0 = simplex(&mut rng, n);
        let p1: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..1.0) }).collect();
        let alpha = rng.random_range(0.01..0.99);
        let le = np_test(&p0, &p1, alpha, NpMode::AtMost).unwrap();
        let eq = np_test(&p0, &p1, alpha, NpMode::Equality).unwrap();
        assert!(le.size() <= alpha + 1e-12);
        assert!(le.power() >= eq.power() - 1e-12);
        // Best over a fine grid of smaller sizes.
        let best = (1..=100)
            .map(|k| np_lp_enumerate(&p0, &p1, alpha * k as f64 / 100.0).unwrap().0)
            .fold(0.0, f64::max);
        assert!(le.power() >= best - 1e-9);
    }
}

#[test]
fn excess_rule_matches_core_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let samples: Vec<f64> = (0..rng.random_range(2..12)).map(|_| rng.random_range(0.1..5.0)).collect();
        let p = rng.random_range(0.05..0.95);
        let closed = stationary_excess_rule(&EmpiricalHorizon::new(samples.clone()).unwrap(), p).unwrap();
        let cells = 20_000;
        let h = 5.0 / cells as f64;
        let xi = StepProcess::affine_staircase(1.0, 0.0, 5.0, cells);
        let w = 1.0 / samples.len() as f64;
        let set = ScenarioSet::new(
            samples.iter().map(|&t| Scenario::unit(w, Extended::Finite(t), xi.clone())).collect(),
        )
        .unwrap();
        let mean: f64 = samples.iter().sum::<f64>() * w;
        let sol = solve_equality(&set, p * mean).unwrap();
        for (i, &t) in samples.iter().enumerate() {
            let expect = t.min(closed.threshold);
            assert!((sol.rule.effective_time(i) - expect).abs() <= h, "{} vs {expect}", sol.rule.effective_time(i));
        }
    }
}

#[test]
fn separable_matches_simplex_grid_search() {
    let derivs = [
        StepProcess { breakpoints: vec![0.0, 0.25, 0.6], values: vec![0.5, 1.5, 4.0] },
        StepProcess { breakpoints: vec![0.0, 0.4], values: vec![1.0, 2.5] },
        StepProcess { breakpoints: vec![0.0, 0.1, 0.8], values: vec![-1.0, 2.0, 3.0] },
    ];
    let caps = [Extended::Finite(1.0); 3];
    let alpha = 1.3;
    let x = separable_convex(&derivs, &caps, &[1.0; 3], alpha).unwrap();
    let f = |x: &[f64]| -> f64 { derivs.iter().zip(x).map(|(d, &xi)| d.phi(xi)).sum() };
    let step = 1e-3;
    let n = 1000;
    let target = (alpha / step).round() as i64;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        for j in 0..=n {
            let k = target - i - j;
            if (0..=n).contains(&k) {
                let v = f(&[i as f64 * step, j as f64 * step, k as f64 * step]);
                best = best.min(v);
            }
        }
    }
    assert!((x.iter().sum::<f64>() - alpha).abs() < 1e-12);
    assert!((f(&x) - best).abs() < 1e-9, "{} vs grid {best}", f(&x));
}

#[test]
fn clearing_beats_sampled_rules() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let shape = SetShape { max_scenarios: 6, max_breakpoints: 5, horizon: (0.5, 3.0), zero_density: 0.0, random_density_rate: false };
    for seed in 0..5 {
        let problem = ClearingProblem {
            setup_cost: rng.random_range(0.2..3.0),
            holding: HoldingCost::Step { jumps: vec![0.0, 1.5], values: vec![-0.5, 0.5, 2.0] },
            scenarios: random_set(&mut rng, shape),
        };
        let r = clearing_optimal(&problem).unwrap();
        let set = compose_holding(&problem).unwrap();
        let total = set.total_budget().to_f64();
        for k in 0..100 {
            let alpha = total * rng.random_range(0.01..1.0);
            let times = feasible_sampler(&set, alpha, 1, seed * 1000 + k).unwrap().remove(0);
            let cost = objective(&set, &StoppingRule::pure(times)).unwrap();
            assert!(r.ratio <= (problem.setup_cost + cost) / alpha + 1e-9);
        }
    }
}

#[test]
fn storage_outer_cost_beats_probes() {
    let p = StorageProblem { k1: 3.0, k2: 0.4, k3: 0.5, mu_rho: 1.2, h: 0.8, v_samples: vec![0.3, 0.9, 1.4, 2.2, 5.0] };
    let r = storage_rate(&p).unwrap();
    for k in 0..200 {
        let a = k as f64 * 0.05;
        assert!(r.cost <= storage_cost(&p, a).unwrap() + 1e-12);
    }
    // Samples below the threshold multiplier get no rate.
    for (&v, &x) in p.v_samples.iter().zip(&r.rule) {
        assert_eq!(x == 0.0, r.multiplier <= v / 2.0);
    }
}

#[test]
fn regulation_grid_never_beats_result() {
    let v = |scale: f64| MarginalUtility {
        breakpoints: vec![0.0, 0.5, 1.0, 2.0],
        values: vec![2.0 * scale, 1.2 * scale, 0.4 * scale, 0.0],
    };
    let p = RegulationProblem { arrival_rate: 0.7, v_paths: vec![v(1.0), v(0.5), v(2.0)], weights: vec![0.2, 0.5, 0.3] };
    let r = regulation_optimal(&p, 31, 2e-3).unwrap();
    assert!(r.alpha > 0.0 && r.alpha < 1.0 / 0.7);
    assert!(r.grid.iter().all(|&(_, w)| w <= r.welfare + 1e-12));
    assert_eq!(r.grid[0], (0.0, 0.0));
}

#[test]
fn quadratic_budget_is_continuous_and_monotone() {
    let qs = [
        QuadScenario { a: 1.0, b: -1.0, c: 0.0, d: 2.0, t_cap: Extended::Finite(2.0), weight: 0.3 },
        QuadScenario { a: 0.5, b: 1.0, c: 1.0, d: 1.0, t_cap: Extended::Infinite, weight: 0.7 },
    ];
    let step = 1e-3;
    let mut prev = quadratic_budget(&qs, -3.0);
    for k in 1..10_000 {
        let b = quadratic_budget(&qs, -3.0 + k as f64 * step);
        assert!(b >= prev);
        // Slope is at most Σ w·d²/(2a) = 0.3·2 + 0.7·1.
        assert!(b - prev <= 1.3 * step + 1e-12);
        prev = b;
    }
}

#[test]
fn consumption_only_portfolio_matches_greedy_oracle() {
    let problem = PortfolioProblem {
        probabilities: vec![0.4, 0.6],
        cell_widths: vec![0.5, 0.5],
        prices: vec![vec![1.0, 0.8], vec![1.2, 0.9]],
        terminal_prices: vec![0.7, 1.1],
        consumption_marginal: Some(vec![
            MarginalUtility { breakpoints: vec![0.0, 0.5, 1.5], values: vec![3.0, 1.5, 0.5] },
            MarginalUtility { breakpoints: vec![0.0, 1.0], values: vec![2.0, 0.25] },
        ]),
        terminal_marginal: None,
        x0: 0.9,
        consumption_caps: vec![vec![Extended::Finite(4.0); 2]; 2],
        terminal_caps: vec![Extended::Finite(0.0); 2],
    };
    let plan = solve_portfolio(&problem).unwrap();
    assert!(plan.spent <= problem.x0 + 1e-12);
    let set = problem.scenario_set().unwrap();
    let oracle = greedy_grid(&set, plan.spent, GridOracleConfig { step: 1e-4, cap: 10.0 }).unwrap();
    assert!((-plan.utility_gain - oracle.objective).abs() <= oracle.error_bound);
}
