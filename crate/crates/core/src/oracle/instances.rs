//! Random instance generators for property tests, the acceptance suite and
//! benches.

use rand::Rng;

use crate::measure::{Extended, Scenario, ScenarioSet, StepProcess};

#[derive(Clone, Copy, Debug)]
pub struct SetShape {
    pub max_scenarios: usize,
    pub max_breakpoints: usize,
    pub horizon: (f64, f64),
    /// Fraction of scenarios with `Y = 0`.
    pub zero_density: f64,
    /// Draw `Y` and `A` at random instead of fixing them to 1.
    pub random_density_rate: bool,
}

impl Default for SetShape {
    fn default() -> Self {
        SetShape {
            max_scenarios: 50,
            max_breakpoints: 10,
            horizon: (0.5, 5.0),
            zero_density: 0.05,
            random_density_rate: true,
        }
    }
}

pub fn random_process<R: Rng>(rng: &mut R, breakpoints: usize, span: f64) -> StepProcess {
    let mut bp = vec![0.0];
    for _ in 1..breakpoints {
        let gap = rng.random_range(0.05..1.0) * span / breakpoints as f64;
        bp.push(bp.last().unwrap() + gap);
    }
    let mut values = vec![rng.random_range(-3.0..2.0)];
    for _ in 1..breakpoints {
        // Occasional flat steps exercise tied levels.
        let inc = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..2.0) };
        values.push(values.last().unwrap() + inc);
    }
    StepProcess { breakpoints: bp, values }
}

pub fn random_set<R: Rng>(rng: &mut R, shape: SetShape) -> ScenarioSet {
    let n = rng.random_range(1..=shape.max_scenarios);
    let scenarios = (0..n)
        .map(|_| {
            let horizon = rng.random_range(shape.horizon.0..=shape.horizon.1);
            let k = rng.random_range(1..=shape.max_breakpoints);
            let process = random_process(rng, k, horizon * 1.2);
            let (density, rate) = if shape.random_density_rate {
                let y = if rng.random_bool(shape.zero_density) { 0.0 } else { rng.random_range(0.2..2.0) };
                (y, rng.random_range(0.25..3.0))
            } else {
                (1.0, 1.0)
            };
            Scenario {
                weight: rng.random_range(0.05..1.0),
                density,
                horizon: Extended::Finite(horizon),
                rate,
                process,
            }
        })
        .collect();
    ScenarioSet::new(scenarios).expect("generated scenarios are valid")
}

/// Integer breakpoints and horizons for the discrete-time solver.
pub fn random_integer_set<R: Rng>(rng: &mut R, max_scenarios: usize, max_horizon: u32) -> ScenarioSet {
    let n = rng.random_range(1..=max_scenarios);
    let scenarios = (0..n)
        .map(|_| {
            let horizon = rng.random_range(1..=max_horizon);
            let mut bp = vec![0.0];
            let mut values = vec![rng.random_range(-4i32..=2) as f64];
            for t in 1..=horizon {
                if rng.random_bool(0.6) {
                    bp.push(f64::from(t));
                    values.push(values.last().unwrap() + rng.random_range(0i32..=3) as f64);
                }
            }
            Scenario {
                weight: [0.25, 0.5, 1.0, 2.0][rng.random_range(0..4)],
                density: [0.0, 0.5, 1.0, 2.0][rng.random_range(0..4)],
                horizon: Extended::Finite(f64::from(horizon)),
                rate: [0.5, 1.0, 2.0][rng.random_range(0..3)],
                process: StepProcess { breakpoints: bp, values },
            }
        })
        .collect();
    ScenarioSet::new(scenarios).expect("generated scenarios are valid")
}
