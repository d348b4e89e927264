//! The `eptas` command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 no schedule for the requested target,
//! 3 a search budget (nodes, configurations, oracle size) was exceeded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use eptas_core::baseline::{greedy_bound, lst_two_approx};
use eptas_core::instance::{generate_instance, parse_instance, serialize_instance};
use eptas_core::makespan::{solve_makespan, try_makespan};
use eptas_core::milp::DEFAULT_NODE_BUDGET;
use eptas_core::oracle::{brute_force_makespan, brute_force_min_load, OracleError, OracleLimits};
use eptas_core::pipeline::DEFAULT_CONFIG_LIMIT;
use eptas_core::rational::{format_rational, parse_rational};
use eptas_core::santa::{solve_santa, try_santa};
use eptas_core::suite::{run_suite, write_csv, SuiteError, SuiteSpec};
use eptas_core::{evaluate_makespan, evaluate_min_load, EptasParams, Instance, Rational, Schedule, SolveError, TryOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NO_SCHEDULE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "eptas", version, about = "Exact approximation schemes for scheduling on few machine types")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimise the makespan.
    Solve(SchemeArgs),
    /// Maximise the minimum machine load.
    Santa(SchemeArgs),
    /// Run a reference heuristic for the makespan.
    Baseline {
        #[arg(long, value_enum)]
        algo: BaselineAlgo,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact optimum by exhaustive search (small instances only).
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        objective: Objective,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded random instance with integer times in [1, pmax].
    Gen {
        #[arg(long)]
        types: usize,
        #[arg(long)]
        jobs: usize,
        /// Machines per type, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        mults: Vec<usize>,
        #[arg(long)]
        pmax: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a schedule against an instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long, value_enum)]
        objective: Objective,
    },
    /// Run a suite of seeded instances and write a ratio table as CSV.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct SchemeArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Accuracy in (0, 1), as `p/q` or an integer literal.
    #[arg(long, value_parser = rational_arg)]
    epsilon: Rational,
    /// Try this single guess instead of searching; exits 2 if it is refuted.
    #[arg(long, value_parser = rational_arg)]
    target: Option<Rational>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: u64,
    #[arg(long, default_value_t = DEFAULT_CONFIG_LIMIT)]
    config_limit: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BaselineAlgo {
    Greedy,
    Lp2,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Objective {
    Makespan,
    Minload,
}

impl Objective {
    fn label(self) -> &'static str {
        match self {
            Objective::Makespan => "makespan",
            Objective::Minload => "minload",
        }
    }

    fn evaluate(self, inst: &Instance, schedule: &Schedule) -> Result<Rational, Failure> {
        let value = match self {
            Objective::Makespan => evaluate_makespan(inst, schedule),
            Objective::Minload => evaluate_min_load(inst, schedule),
        };
        value.map_err(|e| Failure::input(e.to_string()))
    }
}

fn rational_arg(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

/// A diagnostic and the exit code it maps to.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::ConfigExplosion(_) | SolveError::NodeLimitExceeded(_) => EXIT_BUDGET,
            SolveError::InvalidParams(_) | SolveError::Internal(_) => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure { code: EXIT_BUDGET, message: e.to_string() }
    }
}

impl From<SuiteError> for Failure {
    fn from(e: SuiteError) -> Self {
        match e {
            SuiteError::Solve { instance, source } => {
                let inner = Failure::from(source);
                Failure { code: inner.code, message: format!("{instance}: {}", inner.message) }
            }
            other => Failure::input(other.to_string()),
        }
    }
}

/// Runs one command. `argv[0]` is the program name.
pub fn run(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Solve(args) => scheme(args, Objective::Makespan, stdout),
        Command::Santa(args) => scheme(args, Objective::Minload, stdout),
        Command::Baseline { algo, instance, out } => {
            let inst = read_instance(&instance)?;
            let schedule = match algo {
                BaselineAlgo::Greedy => greedy_bound(&inst).0,
                BaselineAlgo::Lp2 => lst_two_approx(&inst),
            };
            report(&inst, &schedule, Objective::Makespan, out.as_deref(), stdout)
        }
        Command::Oracle { instance, objective, out } => {
            let inst = read_instance(&instance)?;
            let limits = OracleLimits::default();
            let (_, witness) = match objective {
                Objective::Makespan => brute_force_makespan(&inst, limits)?,
                Objective::Minload => brute_force_min_load(&inst, limits)?,
            };
            report(&inst, &witness, objective, out.as_deref(), stdout)
        }
        Command::Gen { types, jobs, mults, pmax, seed, out } => {
            let inst = generate_instance(types, jobs, &mults, pmax, seed).map_err(|e| Failure::input(e.to_string()))?;
            write_file(&out, &serialize_instance(&inst))
        }
        Command::Verify { instance, schedule, objective } => {
            let inst = read_instance(&instance)?;
            let text = read_file(&schedule)?;
            let schedule = Schedule::from_json(&String::from_utf8_lossy(&text)).map_err(|e| Failure::input(e.to_string()))?;
            print_value(stdout, objective, &objective.evaluate(&inst, &schedule)?)
        }
        Command::Bench { suite, out } => {
            let text = read_file(&suite)?;
            let spec = SuiteSpec::from_json(&String::from_utf8_lossy(&text))?;
            let rows = run_suite(&spec)?;
            let mut buffer = Vec::new();
            write_csv(&mut buffer, &rows).map_err(|e| Failure::input(e.to_string()))?;
            write_file(&out, &buffer)?;
            writeln!(stdout, "{} rows", rows.len()).map_err(|e| Failure::input(e.to_string()))
        }
    }
}

fn scheme(args: SchemeArgs, objective: Objective, stdout: &mut dyn Write) -> Result<(), Failure> {
    let inst = read_instance(&args.instance)?;
    let params = EptasParams { epsilon: args.epsilon, node_budget: args.node_budget, config_limit: args.config_limit };
    params.validate()?;
    let schedule = match (&args.target, objective) {
        (Some(target), _) => {
            let outcome = match objective {
                Objective::Makespan => try_makespan(&inst, target, &params)?,
                Objective::Minload => try_santa(&inst, target, &params)?,
            };
            match outcome {
                TryOutcome::Scheduled(s) => s,
                TryOutcome::NoSchedule => {
                    return Err(Failure {
                        code: EXIT_NO_SCHEDULE,
                        message: format!("no schedule for target {}", format_rational(target)),
                    })
                }
            }
        }
        (None, Objective::Makespan) => solve_makespan(&inst, &params)?,
        (None, Objective::Minload) => solve_santa(&inst, &params)?,
    };
    report(&inst, &schedule, objective, args.out.as_deref(), stdout)
}

/// Prints the objective line, then either writes the schedule to `out` or prints it.
fn report(
    inst: &Instance,
    schedule: &Schedule,
    objective: Objective,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    print_value(stdout, objective, &objective.evaluate(inst, schedule)?)?;
    match out {
        Some(path) => write_file(path, format!("{}\n", schedule.to_json()).as_bytes()),
        None => writeln!(stdout, "{}", schedule.to_json()).map_err(|e| Failure::input(e.to_string())),
    }
}

fn print_value(stdout: &mut dyn Write, objective: Objective, value: &Rational) -> Result<(), Failure> {
    writeln!(stdout, "{} {}", objective.label(), format_rational(value)).map_err(|e| Failure::input(e.to_string()))
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let bytes = read_file(path)?;
    parse_instance(&bytes).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}
