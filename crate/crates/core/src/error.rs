use thiserror::Error;

use crate::measure::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Solver and application errors. The `kind` string is the stable
/// machine-readable tag printed by the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid scenario set: {0}")]
    Validation(ValidationReport),
    #[error("alpha {alpha} outside the feasible range [0, {limit}]")]
    InfeasibleAlpha { alpha: f64, limit: f64 },
    #[error("budget is infinite just above the critical level {level}; alpha {alpha} cannot be met by a threshold rule")]
    UnboundedBudget { alpha: f64, level: f64 },
    #[error("scenario {scenario}: {what} is not a nonnegative integer")]
    NonIntegerGrid { scenario: usize, what: &'static str },
    #[error("rule infeasible at scenario {scenario}: {reason}")]
    RuleInfeasible { scenario: usize, reason: String },
    #[error("total budget is infinite; a finite horizon budget is required here")]
    InfiniteTotalBudget,
    #[error("bisection did not converge after {iterations} iterations")]
    BisectionFailed { iterations: usize },
    #[error("could not bracket the outer minimum; cost keeps decreasing up to {reached}")]
    BracketExpansion { reached: f64 },
    #[error("every candidate rule has zero expected budget")]
    NoPositiveRule,
    #[error("alpha grid is empty")]
    EmptyGrid,
    #[error("dimension {n} exceeds the enumeration limit {max}")]
    DimensionTooLarge { n: usize, max: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "invalid-scenario-set",
            Error::InfeasibleAlpha { .. } => "infeasible-alpha",
            Error::UnboundedBudget { .. } => "unbounded-budget",
            Error::NonIntegerGrid { .. } => "non-integer-grid",
            Error::RuleInfeasible { .. } => "rule-infeasible",
            Error::InfiniteTotalBudget => "infinite-total-budget",
            Error::BisectionFailed { .. } => "bisection-failed",
            Error::BracketExpansion { .. } => "bracket-expansion-failed",
            Error::NoPositiveRule => "no-positive-rule",
            Error::EmptyGrid => "empty-grid",
            Error::DimensionTooLarge { .. } => "dimension-too-large",
            Error::InvalidInput(_) => "invalid-input",
        }
    }
}

impl From<ValidationReport> for Error {
    fn from(report: ValidationReport) -> Self {
        Error::Validation(report)
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
