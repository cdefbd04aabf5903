use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stoch_thresh::closed_form::{
    np_test, renewal_exponential, separable_convex, solve_portfolio, solve_quadratic, stationary_excess_rule,
    EmpiricalHorizon, NpMode, PortfolioProblem, RenewalSpec,
};
use stoch_thresh::io::{
    curve_csv, parse_json, parse_scenarios, read_input, rule_csv, to_json, write_text, ClearingFile, Input,
    QuadraticFile, RunReport, SeparableFile, Timing,
};
use stoch_thresh::oracle::{greedy_grid, GridOracleConfig};
use stoch_thresh::ratio::{clearing_optimal, regulation_optimal, storage_rate, RegulationProblem, StorageProblem};
use stoch_thresh::solver::{
    alpha_grid, attach_certificate, solve_discrete, solve_equality, solve_inequality, value_curve,
    CertificateReport, DiscreteOptions,
};
use stoch_thresh::{exec, Error, Extended, Solution, StepProcess};

const THREADS_VAR: &str = "STOCH_THRESH_THREADS";
const EXIT_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_UNBOUNDED: u8 = 3;
const EXIT_ORACLE_GAP: u8 = 4;

/// Exact threshold rules for budget-constrained stopping problems.
#[derive(Parser)]
#[command(name = "stoch-thresh", version)]
struct Cli {
    /// Include wall-clock timing in the report (makes reports differ between runs).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArg {
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario file at budget alpha.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Budget constraint `<= alpha` instead of `= alpha`.
        #[arg(long, conflicts_with = "discrete")]
        inequality: bool,
        /// Integer-time solver with a mixed strategy.
        #[arg(long)]
        discrete: bool,
        /// Seed for Bernoulli(q) draws (discrete only).
        #[arg(long, requires = "discrete")]
        seed: Option<u64>,
        /// Number of draws when a seed is given.
        #[arg(long, default_value_t = 1)]
        draws: usize,
        /// Equispaced certificate points per scenario; 0 skips the certificate.
        #[arg(long, default_value_t = 1000)]
        certify_grid: usize,
        #[command(flatten)]
        out: OutArg,
        /// Per-scenario rule as CSV.
        #[arg(long)]
        rule_csv: Option<PathBuf>,
    },
    /// Optimal value f(alpha) on an equispaced budget grid, as CSV.
    ValueCurve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha_min: f64,
        #[arg(long)]
        alpha_max: f64,
        #[arg(long, default_value_t = 21)]
        points: usize,
        /// CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quadratic costs with random coefficients.
    Quadratic {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Most powerful randomized test of two simple hypotheses on a finite space.
    NpTest {
        #[arg(long, value_delimiter = ',', required = true)]
        p0: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        p1: Vec<f64>,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Mode::Equality)]
        mode: Mode,
        #[command(flatten)]
        out: OutArg,
    },
    /// Deterministic rule from the stationary excess distribution of the horizon.
    Excess {
        /// Horizon samples.
        #[arg(long, value_delimiter = ',', required = true)]
        samples: Vec<f64>,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Renewal counting process with an exponential horizon.
    Renewal {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        alpha: f64,
        /// `E exp(-theta X)` directly.
        #[arg(long, conflicts_with = "x_samples", required_unless_present = "x_samples")]
        lst: Option<f64>,
        /// Inter-renewal samples; the transform is their empirical mean.
        #[arg(long, value_delimiter = ',')]
        x_samples: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Optimal clearing rule for setup plus holding costs.
    Clearing {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Optimal output rate of the storage model.
    Storage {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Welfare-optimal service times.
    Regulation {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Cell width of the service-time staircase.
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Consumption and terminal wealth under a static budget.
    Portfolio {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Separable convex allocation with one linear constraint.
    Separable {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Compare the solver with the greedy grid oracle.
    OracleCheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 100.0)]
        cap: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Equality,
    AtMost,
}

impl From<Mode> for NpMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Equality => NpMode::Equality,
            Mode::AtMost => NpMode::AtMost,
        }
    }
}

enum Failure {
    Solver(Error),
    OracleGap { gap: f64, bound: f64 },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e)
    }
}

#[derive(Serialize)]
struct SolveResult {
    alpha: f64,
    variant: &'static str,
    #[serde(flatten)]
    solution: Solution,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<CertificateReport>,
}

#[derive(Serialize)]
struct OracleCheckResult {
    alpha: f64,
    solver_objective: f64,
    oracle_objective: f64,
    gap: f64,
    bound: f64,
    step: f64,
}

struct Run {
    command: Vec<String>,
    timing: bool,
    started: Instant,
}

impl Run {
    fn emit<T: Serialize>(&self, out: Option<&Path>, digest: Option<String>, result: T) -> Result<(), Failure> {
        let mut report = RunReport::new(self.command.clone(), digest, result);
        if self.timing {
            report.timing = Some(Timing { elapsed_seconds: self.started.elapsed().as_secs_f64() });
        }
        write_or_print(out, &to_json(&report))
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_text(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load(path: &Path) -> Result<Input, Failure> {
    Ok(read_input(path)?)
}

fn run(cli: Cli, run: Run) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { input, alpha, inequality, discrete, seed, draws, certify_grid, out, rule_csv: csv } => {
            let input = load(&input)?;
            let set = parse_scenarios(&input.text)?;
            let (variant, mut solution) = if discrete {
                ("discrete", solve_discrete(&set, alpha, DiscreteOptions { seed, draws })?)
            } else if inequality {
                ("inequality", solve_inequality(&set, alpha)?)
            } else {
                ("equality", solve_equality(&set, alpha)?)
            };
            let certificate = (certify_grid > 0).then(|| attach_certificate(&set, &mut solution, certify_grid));
            if let Some(path) = csv {
                write_text(&path, &rule_csv(&solution.rule)?)?;
            }
            run.emit(out.out.as_deref(), Some(input.digest), SolveResult { alpha, variant, solution, certificate })
        }
        Command::ValueCurve { input, alpha_min, alpha_max, points, out } => {
            let input = load(&input)?;
            let set = parse_scenarios(&input.text)?;
            if points == 0 {
                return Err(Error::EmptyGrid.into());
            }
            let curve = value_curve(&set, &alpha_grid(alpha_min, alpha_max, points))?;
            match out {
                Some(path) => write_text(&path, &curve_csv(&curve)?)?,
                None => print!("{}", curve_csv(&curve)?),
            }
            Ok(())
        }
        Command::Quadratic { input, alpha, out } => {
            let input = load(&input)?;
            let file: QuadraticFile = parse_json(&input.text)?;
            run.emit(out.out.as_deref(), Some(input.digest), solve_quadratic(&file.scenarios, alpha)?)
        }
        Command::NpTest { p0, p1, alpha, mode, out } => {
            let test = np_test(&p0, &p1, alpha, mode.into())?;
            #[derive(Serialize)]
            struct NpResult {
                size: f64,
                power: f64,
                test: Vec<f64>,
            }
            let result = NpResult { size: test.size(), power: test.power(), test: test.test };
            run.emit(out.out.as_deref(), None, result)
        }
        Command::Excess { samples, p, out } => {
            let horizon = EmpiricalHorizon::new(samples)?;
            run.emit(out.out.as_deref(), None, stationary_excess_rule(&horizon, p)?)
        }
        Command::Renewal { theta, alpha, lst, x_samples, out } => {
            let lst = match (lst, x_samples) {
                (Some(l), _) => l,
                (None, Some(xs)) if !xs.is_empty() => {
                    xs.iter().map(|x| (-theta * x).exp()).sum::<f64>() / xs.len() as f64
                }
                _ => return Err(Error::InvalidInput("need --lst or --x-samples".into()).into()),
            };
            run.emit(out.out.as_deref(), None, renewal_exponential(RenewalSpec { theta, lst }, alpha)?)
        }
        Command::Clearing { input, out } => {
            let input = load(&input)?;
            let problem = parse_json::<ClearingFile>(&input.text)?.into_problem()?;
            run.emit(out.out.as_deref(), Some(input.digest), clearing_optimal(&problem)?)
        }
        Command::Storage { input, out } => {
            let input = load(&input)?;
            let problem: StorageProblem = parse_json(&input.text)?;
            run.emit(out.out.as_deref(), Some(input.digest), storage_rate(&problem)?)
        }
        Command::Regulation { input, points, delta, out } => {
            let input = load(&input)?;
            let problem: RegulationProblem = parse_json(&input.text)?;
            run.emit(out.out.as_deref(), Some(input.digest), regulation_optimal(&problem, points, delta)?)
        }
        Command::Portfolio { input, out } => {
            let input = load(&input)?;
            let problem: PortfolioProblem = parse_json(&input.text)?;
            run.emit(out.out.as_deref(), Some(input.digest), solve_portfolio(&problem)?)
        }
        Command::Separable { input, alpha, out } => {
            let input = load(&input)?;
            let file: SeparableFile = parse_json(&input.text)?;
            let derivatives: Vec<StepProcess> = file
                .items
                .iter()
                .map(|it| StepProcess { breakpoints: it.breakpoints.clone(), values: it.values.clone() })
                .collect();
            let caps: Vec<Extended> = file.items.iter().map(|it| it.cap).collect();
            let rates: Vec<f64> = file.items.iter().map(|it| it.rate).collect();
            #[derive(Serialize)]
            struct Allocation {
                alpha: f64,
                x: Vec<f64>,
            }
            let x = separable_convex(&derivatives, &caps, &rates, alpha)?;
            run.emit(out.out.as_deref(), Some(input.digest), Allocation { alpha, x })
        }
        Command::OracleCheck { input, alpha, step, cap, out } => {
            let input = load(&input)?;
            let set = parse_scenarios(&input.text)?;
            let solution = solve_equality(&set, alpha)?;
            let oracle = greedy_grid(&set, alpha, GridOracleConfig { step, cap })?;
            let gap = (solution.objective - oracle.objective).abs();
            let result = OracleCheckResult {
                alpha,
                solver_objective: solution.objective,
                oracle_objective: oracle.objective,
                gap,
                bound: oracle.error_bound,
                step,
            };
            run.emit(out.out.as_deref(), Some(input.digest), result)?;
            if gap > oracle.error_bound {
                return Err(Failure::OracleGap { gap, bound: oracle.error_bound });
            }
            Ok(())
        }
    }
}

fn report_failure(failure: &Failure) -> u8 {
    let (kind, message, code) = match failure {
        Failure::Solver(e) => {
            let code = match e {
                Error::InfeasibleAlpha { .. } => EXIT_INFEASIBLE,
                Error::UnboundedBudget { .. } => EXIT_UNBOUNDED,
                _ => EXIT_INPUT,
            };
            (e.kind(), e.to_string(), code)
        }
        Failure::OracleGap { gap, bound } => {
            ("oracle-gap", format!("gap {gap} exceeds oracle bound {bound}"), EXIT_ORACLE_GAP)
        }
    };
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
    code
}

fn main() -> ExitCode {
    let started = Instant::now();
    let command: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    if let Ok(raw) = std::env::var(THREADS_VAR) {
        match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                exec::init_threads(n);
            }
            _ => {
                let e = Error::InvalidInput(format!("{THREADS_VAR} must be a positive integer, got {raw:?}"));
                return ExitCode::from(report_failure(&Failure::Solver(e)));
            }
        }
    }
    let timing = cli.timing;
    match run(cli, Run { command, timing, started }) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => ExitCode::from(report_failure(&f)),
    }
}
