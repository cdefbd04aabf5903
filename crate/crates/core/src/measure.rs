//! Discretized measure space: weighted scenarios, each carrying a
//! nondecreasing right-continuous step process `ξ`, a density `Y = dν/dμ`,
//! a horizon `T` and a budget rate `A`.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::numeric::CompensatedSum;

/// A nonnegative quantity that may be `+∞`: horizons, pseudo-inverse times
/// and budgets. `Infinite` is a distinct variant, never a large float.
///
/// Ordering puts every `Finite` value below `Infinite`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub const ZERO: Extended = Extended::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    /// `f64` view with `Infinite` mapped to `f64::INFINITY`, for display.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn min(self, other: Extended) -> Extended {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a.min(b)),
            (Extended::Infinite, x) | (x, Extended::Infinite) => x,
        }
    }

    /// `c · self` for a strictly positive finite factor.
    pub fn scale(self, c: f64) -> Extended {
        match self {
            Extended::Finite(x) => Extended::Finite(c * x),
            Extended::Infinite => Extended::Infinite,
        }
    }

    pub fn cmp_f64(self, x: f64) -> Ordering {
        match self {
            Extended::Finite(a) => a.partial_cmp(&x).unwrap_or(Ordering::Greater),
            Extended::Infinite => Ordering::Greater,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(x) => s.serialize_f64(*x),
            Extended::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ExtVisitor;
        impl Visitor<'_> for ExtVisitor {
            type Value = Extended;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a finite number or the string \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> std::result::Result<Extended, E> {
                if x.is_finite() {
                    Ok(Extended::Finite(x))
                } else {
                    Err(E::custom("non-finite number; use \"inf\" for an infinite horizon"))
                }
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> std::result::Result<Extended, E> {
                Ok(Extended::Finite(x as f64))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> std::result::Result<Extended, E> {
                Ok(Extended::Finite(x as f64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<Extended, E> {
                match s {
                    "inf" | "+inf" | "infinity" => Ok(Extended::Infinite),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(ExtVisitor)
    }
}

/// `ξ(t) = values[j]` on `[breakpoints[j], breakpoints[j+1])` and
/// `values[last]` from the last breakpoint on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepProcess {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepProcess {
    /// Builds and checks a process.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let p = StepProcess { breakpoints, values };
        let mut problems = Vec::new();
        p.check(None, &mut problems);
        match problems.first() {
            None => Ok(p),
            Some(v) => Err(invalid(v.to_string())),
        }
    }

    pub fn constant(value: f64) -> Self {
        StepProcess { breakpoints: vec![0.0], values: vec![value] }
    }

    /// Midpoint staircase of the affine rate `slope·t + intercept` on
    /// `[0, end]` with `cells` equal cells. The staircase integral agrees
    /// with the affine integral at every cell boundary.
    pub fn affine_staircase(slope: f64, intercept: f64, end: f64, cells: usize) -> Self {
        let h = end / cells as f64;
        let breakpoints: Vec<f64> = (0..cells).map(|k| k as f64 * h).collect();
        let values = (0..cells)
            .map(|k| slope * (k as f64 + 0.5) * h + intercept)
            .collect();
        StepProcess { breakpoints, values }
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn last_value(&self) -> f64 {
        *self.values.last().expect("validated process is nonempty")
    }

    /// Index of the segment containing `t`.
    pub fn segment(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= t).saturating_sub(1)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.values[self.segment(t)]
    }

    /// Left limit `ξ(t−)`; equals `ξ(0)` at `t = 0`.
    pub fn value_before(&self, t: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|&b| b < t).saturating_sub(1)]
    }

    /// `φ(t) = ∫₀ᵗ ξ(s) ds`, exact for the step function.
    pub fn phi(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0 && t.is_finite(), "phi at {t}");
        let mut acc = CompensatedSum::new();
        for (j, (&start, &v)) in self.breakpoints.iter().zip(&self.values).enumerate() {
            if start >= t {
                break;
            }
            let end = self.breakpoints.get(j + 1).map_or(t, |&b| b.min(t));
            acc.add(v * (end - start));
        }
        acc.value()
    }

    /// `ξ(s + ·)`.
    pub fn shifted(&self, s: f64) -> StepProcess {
        let first = self.segment(s);
        let mut breakpoints = vec![0.0];
        let mut values = vec![self.values[first]];
        for (&b, &v) in self.breakpoints.iter().zip(&self.values).skip(first + 1) {
            breakpoints.push(b - s);
            values.push(v);
        }
        StepProcess { breakpoints, values }
    }

    fn check(&self, scenario: Option<usize>, out: &mut Vec<Violation>) {
        let mut push = |kind| out.push(Violation { scenario, kind });
        if self.breakpoints.is_empty() {
            push(ViolationKind::EmptyProcess);
            return;
        }
        if self.breakpoints.len() != self.values.len() {
            push(ViolationKind::LengthMismatch {
                breakpoints: self.breakpoints.len(),
                values: self.values.len(),
            });
            return;
        }
        if self.breakpoints.iter().any(|b| !b.is_finite()) {
            push(ViolationKind::NonFiniteBreakpoint);
        } else {
            if self.breakpoints[0] != 0.0 {
                push(ViolationKind::FirstBreakpointNotZero(self.breakpoints[0]));
            }
            if self.breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                push(ViolationKind::BreakpointsNotIncreasing);
            }
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            push(ViolationKind::NonFiniteValue);
        } else if self.values.windows(2).any(|w| w[0] > w[1]) {
            push(ViolationKind::ValuesNotNondecreasing);
        }
    }
}

/// One atom of the measure space.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    /// μ-mass of the atom.
    pub weight: f64,
    /// `Y = dν/dμ` on the atom.
    pub density: f64,
    pub horizon: Extended,
    /// Budget rate `A`.
    pub rate: f64,
    pub process: StepProcess,
}

impl Scenario {
    /// Scenario with `Y = A = 1`.
    pub fn unit(weight: f64, horizon: Extended, process: StepProcess) -> Self {
        Scenario { weight, density: 1.0, horizon, rate: 1.0, process }
    }

    /// Threshold scale of a process value: `Y·v / A`. `Y·ξ(t) ≥ A·λ` is
    /// decided as `level(ξ(t)) ≥ λ`, so comparisons against levels built by
    /// this same map are exact.
    pub fn level(&self, value: f64) -> f64 {
        self.density * value / self.rate + 0.0
    }

    /// `μ`-weighted budget consumption per unit time, `w·A`.
    pub fn budget_weight(&self) -> f64 {
        self.weight * self.rate
    }

    /// `ν`-weight of the cost integral, `w·Y`.
    pub fn cost_weight(&self) -> f64 {
        self.weight * self.density
    }

    fn check(&self, i: usize, out: &mut Vec<Violation>) {
        let mut push = |kind| out.push(Violation { scenario: Some(i), kind });
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            push(ViolationKind::NonPositiveWeight(self.weight));
        }
        if !(self.density >= 0.0 && self.density.is_finite()) {
            push(ViolationKind::InvalidDensity(self.density));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            push(ViolationKind::InvalidRate(self.rate));
        }
        if let Extended::Finite(t) = self.horizon {
            if !(t >= 0.0 && t.is_finite()) {
                push(ViolationKind::InvalidHorizon(t));
            }
        }
        let before = out.len();
        self.process.check(Some(i), out);
        if out.len() == before
            && self.horizon == Extended::Infinite
            && self.process.last_value() < 0.0
        {
            out.push(Violation {
                scenario: Some(i),
                kind: ViolationKind::NegativeTailWithInfiniteHorizon,
            });
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind {
    EmptySet,
    EmptyProcess,
    LengthMismatch { breakpoints: usize, values: usize },
    NonFiniteBreakpoint,
    FirstBreakpointNotZero(f64),
    BreakpointsNotIncreasing,
    NonFiniteValue,
    ValuesNotNondecreasing,
    NonPositiveWeight(f64),
    InvalidDensity(f64),
    InvalidRate(f64),
    InvalidHorizon(f64),
    NegativeTailWithInfiniteHorizon,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ViolationKind::*;
        match self {
            EmptySet => f.write_str("scenario set is empty"),
            EmptyProcess => f.write_str("process has no breakpoints"),
            LengthMismatch { breakpoints, values } => {
                write!(f, "{breakpoints} breakpoints but {values} values")
            }
            NonFiniteBreakpoint => f.write_str("breakpoints not finite"),
            FirstBreakpointNotZero(b) => write!(f, "first breakpoint is {b}, not 0"),
            BreakpointsNotIncreasing => f.write_str("breakpoints not strictly increasing"),
            NonFiniteValue => f.write_str("values not finite"),
            ValuesNotNondecreasing => f.write_str("values not nondecreasing"),
            NonPositiveWeight(w) => write!(f, "weight {w} is not positive and finite"),
            InvalidDensity(y) => write!(f, "density {y} is not nonnegative and finite"),
            InvalidRate(a) => write!(f, "rate {a} is not positive and finite"),
            InvalidHorizon(t) => write!(f, "horizon {t} is not a nonnegative number"),
            NegativeTailWithInfiniteHorizon => f.write_str("negative tail with infinite horizon"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub scenario: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scenario {
            Some(i) => write!(f, "scenario {i}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

/// Every violated invariant, in scenario order.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Checks every scenario invariant and reports all violations at once.
pub fn validate(scenarios: &[Scenario]) -> Result<(), ValidationReport> {
    let mut violations = Vec::new();
    if scenarios.is_empty() {
        violations.push(Violation { scenario: None, kind: ViolationKind::EmptySet });
    }
    for (i, s) in scenarios.iter().enumerate() {
        s.check(i, &mut violations);
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ValidationReport { violations })
    }
}

/// A validated, immutable scenario family.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSet {
    scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self, ValidationReport> {
        validate(&scenarios)?;
        Ok(ScenarioSet { scenarios })
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn into_scenarios(self) -> Vec<Scenario> {
        self.scenarios
    }

    /// `μ(AT) = Σ wᵢAᵢTᵢ`.
    pub fn total_budget(&self) -> Extended {
        let mut acc = CompensatedSum::new();
        for s in &self.scenarios {
            match s.horizon {
                Extended::Finite(t) => acc.add(s.budget_weight() * t),
                Extended::Infinite => return Extended::Infinite,
            }
        }
        Extended::Finite(acc.value())
    }

    /// `ν∫₀^T ξ`, when every horizon is finite.
    pub fn full_horizon_cost(&self) -> Option<f64> {
        let mut acc = CompensatedSum::new();
        for s in &self.scenarios {
            acc.add(s.cost_weight() * s.process.phi(s.horizon.finite()?));
        }
        Some(acc.value())
    }

    pub fn all_horizons_finite(&self) -> bool {
        self.scenarios.iter().all(|s| s.horizon.is_finite())
    }
}

/// Re-parametrizes an `[S, T]` window as `[0, T − S]`: `ξ̃(t) = ξ(S + t)`,
/// `T̃ = T − S`. Solving the result with budget `α − μ(AS)` (see
/// [`start_budget`]) solves the windowed problem on the input.
pub fn shift_window(set: &ScenarioSet, starts: &[f64]) -> Result<ScenarioSet> {
    if starts.len() != set.len() {
        return Err(invalid(format!(
            "{} window starts for {} scenarios",
            starts.len(),
            set.len()
        )));
    }
    let mut out = Vec::with_capacity(set.len());
    for (i, (sc, &s)) in set.scenarios().iter().zip(starts).enumerate() {
        if !(s >= 0.0 && s.is_finite()) || sc.horizon.cmp_f64(s) == Ordering::Less {
            return Err(invalid(format!(
                "scenario {i}: window start {s} outside [0, {}]",
                sc.horizon
            )));
        }
        let horizon = match sc.horizon {
            Extended::Finite(t) => Extended::Finite((t - s).max(0.0)),
            Extended::Infinite => Extended::Infinite,
        };
        out.push(Scenario { horizon, process: sc.process.shifted(s), ..sc.clone() });
    }
    Ok(ScenarioSet::new(out)?)
}

/// `μ(AS)` for window starts `S`.
pub fn start_budget(set: &ScenarioSet, starts: &[f64]) -> f64 {
    set.scenarios()
        .iter()
        .zip(starts)
        .map(|(sc, &s)| sc.budget_weight() * s)
        .collect::<CompensatedSum>()
        .value()
}
