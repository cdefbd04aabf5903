//! File formats: the scenario JSON schema, run reports and CSV exports.
//!
//! Scenario file:
//!
//! ```json
//! {"scenarios": [
//!   {"weight": 0.5, "density": 1, "horizon": "inf", "rate": 1,
//!    "breakpoints": [0, 1], "values": [0, 5]}
//! ]}
//! ```
//!
//! `horizon` is a number or the string `"inf"`. Unknown fields are rejected.
//! Numbers are written in shortest round-trip form, so a report re-parses to
//! the same bits.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::closed_form::QuadScenario;
use crate::error::{invalid, Error, Result};
use crate::measure::{Extended, Scenario, ScenarioSet, StepProcess};
use crate::ratio::{ClearingProblem, HoldingCost};
use crate::solver::StoppingRule;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRecord {
    pub weight: f64,
    pub density: f64,
    pub horizon: Extended,
    pub rate: f64,
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl From<&Scenario> for ScenarioRecord {
    fn from(sc: &Scenario) -> Self {
        ScenarioRecord {
            weight: sc.weight,
            density: sc.density,
            horizon: sc.horizon,
            rate: sc.rate,
            breakpoints: sc.process.breakpoints.clone(),
            values: sc.process.values.clone(),
        }
    }
}

impl From<ScenarioRecord> for Scenario {
    fn from(r: ScenarioRecord) -> Self {
        Scenario {
            weight: r.weight,
            density: r.density,
            horizon: r.horizon,
            rate: r.rate,
            process: StepProcess { breakpoints: r.breakpoints, values: r.values },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenarios: Vec<ScenarioRecord>,
}

impl ScenarioFile {
    pub fn into_set(self) -> Result<ScenarioSet> {
        Ok(ScenarioSet::new(self.scenarios.into_iter().map(Scenario::from).collect())?)
    }
}

impl From<&ScenarioSet> for ScenarioFile {
    fn from(set: &ScenarioSet) -> Self {
        ScenarioFile { scenarios: set.scenarios().iter().map(ScenarioRecord::from).collect() }
    }
}

/// `{"setup_cost": K, "holding": {"kind": "identity"}, "scenarios": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClearingFile {
    pub setup_cost: f64,
    pub holding: HoldingCost,
    pub scenarios: Vec<ScenarioRecord>,
}

impl ClearingFile {
    pub fn into_problem(self) -> Result<ClearingProblem> {
        let scenarios = ScenarioFile { scenarios: self.scenarios }.into_set()?;
        Ok(ClearingProblem { setup_cost: self.setup_cost, holding: self.holding, scenarios })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticFile {
    pub scenarios: Vec<QuadScenario>,
}

/// One coordinate of a separable problem: derivative steps, cap and rate.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparableItem {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub cap: Extended,
    pub rate: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparableFile {
    pub items: Vec<SeparableItem>,
}

/// Parses JSON, reporting the line and column of syntax errors.
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("parse error: {e}")))
}

pub fn parse_scenarios(text: &str) -> Result<ScenarioSet> {
    parse_json::<ScenarioFile>(text)?.into_set()
}

pub fn scenarios_to_json(set: &ScenarioSet) -> String {
    to_json(&ScenarioFile::from(set))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Input file contents and their SHA-256.
#[derive(Clone, Debug)]
pub struct Input {
    pub text: String,
    pub digest: String,
}

pub fn read_input(path: &Path) -> Result<Input> {
    let bytes = fs::read(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|e| invalid(format!("{} is not UTF-8: {e}", path.display())))?;
    Ok(Input { text, digest })
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

/// Self-contained record of one CLI run. Re-running `command` on the input
/// with the same digest reproduces `result` exactly; `timing` is only
/// present when requested.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    pub result: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl<T: Serialize> RunReport<T> {
    pub fn new(command: Vec<String>, input_digest: Option<String>, result: T) -> Self {
        RunReport {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            input_digest,
            result,
            timing: None,
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct RuleRow {
    scenario_index: usize,
    tau_lower: f64,
    tau_upper: f64,
    q: f64,
    effective_tau: f64,
}

fn csv_string<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| invalid(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// `scenario_index,tau_lower,tau_upper,q,effective_tau`.
pub fn rule_csv(rule: &StoppingRule) -> Result<String> {
    csv_string((0..rule.len()).map(|i| RuleRow {
        scenario_index: i,
        tau_lower: rule.lower[i],
        tau_upper: rule.upper[i],
        q: rule.mix,
        effective_tau: rule.effective_time(i),
    }))
}

#[derive(Serialize)]
struct CurveRow {
    alpha: f64,
    f_alpha: f64,
}

/// `alpha,f_alpha`.
pub fn curve_csv(points: &[(f64, f64)]) -> Result<String> {
    csv_string(points.iter().map(|&(alpha, f_alpha)| CurveRow { alpha, f_alpha }))
}
