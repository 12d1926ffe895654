//! Command-line front end: moments, stationary moments, Euler benchmarks and
//! Monte Carlo estimates, emitted as JSON, CSV or a text table.

pub mod output;
pub mod params;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use matryoshka::euler::bench;
use matryoshka::mc::{
    estimate_moments, heavy_tail_warnings, simulate, SimConfig, DEFAULT_DIFFUSION_STEP,
};
use matryoshka::{steady_vector, transient_vector, Error, MomentTime};

use output::{Metadata, OutputDocument, ParamValue, Payload};
use params::{build_spec, JumpArgs, Process};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// A rejected argument, with the flag it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct UsageError {
    pub flag: String,
    pub message: String,
}

impl UsageError {
    pub fn new(flag: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            flag: flag.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.flag, self.message)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "matryoshka",
    version,
    about = "Closed-form moments of Markov processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Moments E[X_t^k], k = 1..N, at one time point.
    Moments {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        time: f64,
        #[arg(long, value_enum, default_value_t = DocFormat::Json)]
        format: DocFormat,
    },
    /// Stationary moments.
    Steady {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum, default_value_t = DocFormat::Json)]
        format: DocFormat,
    },
    /// Closed form against Euler at several step sizes.
    Bench {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        time: f64,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4,1e-5")]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = BenchFormat::Table)]
        format: BenchFormat,
    },
    /// Monte Carlo estimates of E[X_t^k].
    Simulate {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        time: f64,
        #[arg(long)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Euler–Maruyama step for diffusions.
        #[arg(long, default_value_t = DEFAULT_DIFFUSION_STEP)]
        sim_step: f64,
        #[arg(long, value_enum, default_value_t = DocFormat::Json)]
        format: DocFormat,
    },
}

#[derive(Args, Debug)]
pub struct ProcessArgs {
    #[arg(long, value_enum)]
    pub process: Process,
    /// Comma-separated key=value pairs.
    #[arg(long, default_value = "")]
    pub params: String,
    /// Upward jump law, e.g. `lognormal:0,1`.
    #[arg(long = "jumps-A")]
    pub jumps_a: Option<String>,
    /// Downward jump law.
    #[arg(long = "jumps-B")]
    pub jumps_b: Option<String>,
    /// Collapse-fraction law.
    #[arg(long = "jumps-C")]
    pub jumps_c: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DocFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchFormat {
    Table,
    Csv,
    Json,
}

enum Failure {
    Usage(UsageError),
    Numerical(Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

/// Library errors: numerical breakdowns exit with 3, anything else is
/// blamed on the parameters.
fn library(flag: &str) -> impl Fn(Error) -> Failure + '_ {
    move |e| {
        if e.is_numerical() {
            Failure::Numerical(e)
        } else {
            Failure::Usage(UsageError::new(flag, e.to_string()))
        }
    }
}

fn check_order(order: usize) -> Result<(), UsageError> {
    if order == 0 {
        return Err(UsageError::new("--order", "must be at least 1"));
    }
    Ok(())
}

fn check_time(time: f64) -> Result<(), UsageError> {
    if !(time.is_finite() && time >= 0.0) {
        return Err(UsageError::new(
            "--time",
            format!("must be finite and nonnegative, got {time}"),
        ));
    }
    Ok(())
}

fn metadata(
    process: Process,
    parameters: BTreeMap<String, ParamValue>,
    order: usize,
    time: MomentTime,
) -> Metadata {
    Metadata {
        process: process.name().to_string(),
        parameters,
        order,
        time,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn jumps(p: &ProcessArgs) -> JumpArgs {
    JumpArgs {
        up: p.jumps_a.clone(),
        down: p.jumps_b.clone(),
        collapse: p.jumps_c.clone(),
    }
}

fn execute(command: Command, err: &mut dyn Write) -> Result<String, Failure> {
    match command {
        Command::Moments {
            process,
            order,
            time,
            format,
        } => {
            check_order(order)?;
            check_time(time)?;
            let (spec, record) = build_spec(process.process, &process.params, &jumps(&process))?;
            let built = spec.build(order).map_err(library("--params"))?;
            for w in &built.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let values =
                transient_vector(&built.system, &built.init, time).map_err(library("--time"))?;
            let doc = OutputDocument {
                metadata: metadata(process.process, record, order, MomentTime::At(time)),
                payload: Payload::Moments(values),
            };
            Ok(match format {
                DocFormat::Json => doc.to_json(),
                DocFormat::Csv => doc.to_csv(),
            })
        }
        Command::Steady {
            process,
            order,
            format,
        } => {
            check_order(order)?;
            let (spec, record) = build_spec(process.process, &process.params, &jumps(&process))?;
            let built = spec.build(order).map_err(library("--params"))?;
            for w in &built.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let values = steady_vector(&built.system).map_err(library("--params"))?;
            let doc = OutputDocument {
                metadata: metadata(process.process, record, order, MomentTime::Stationary),
                payload: Payload::Moments(values),
            };
            Ok(match format {
                DocFormat::Json => doc.to_json(),
                DocFormat::Csv => doc.to_csv(),
            })
        }
        Command::Bench {
            process,
            order,
            time,
            deltas,
            trials,
            format,
        } => {
            check_order(order)?;
            check_time(time)?;
            if trials == 0 {
                return Err(UsageError::new("--trials", "must be at least 1").into());
            }
            if let Some(d) = deltas.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
                return Err(UsageError::new(
                    "--deltas",
                    format!("steps must be positive, got {d}"),
                )
                .into());
            }
            let (spec, mut record) =
                build_spec(process.process, &process.params, &jumps(&process))?;
            let built = spec.build(order).map_err(library("--params"))?;
            for w in &built.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let records = bench(&built.system, &built.init, time, order, &deltas, trials)
                .map_err(library("--deltas"))?;
            record.insert("deltas".into(), ParamValue::List(deltas));
            record.insert("trials".into(), ParamValue::Integer(trials as u64));
            let doc = OutputDocument {
                metadata: metadata(process.process, record, order, MomentTime::At(time)),
                payload: Payload::Bench(records),
            };
            Ok(match format {
                BenchFormat::Table => doc.to_table(),
                BenchFormat::Csv => doc.to_csv(),
                BenchFormat::Json => doc.to_json(),
            })
        }
        Command::Simulate {
            process,
            order,
            time,
            paths,
            seed,
            sim_step,
            format,
        } => {
            check_order(order)?;
            check_time(time)?;
            if paths < 2 {
                return Err(UsageError::new("--paths", "need at least 2 paths").into());
            }
            if !(sim_step > 0.0 && sim_step.is_finite()) {
                return Err(UsageError::new(
                    "--sim-step",
                    format!("must be positive, got {sim_step}"),
                )
                .into());
            }
            let (spec, mut record) =
                build_spec(process.process, &process.params, &jumps(&process))?;
            let cfg = SimConfig {
                paths,
                horizon: time,
                seed,
                diffusion_step: sim_step,
            };
            let terminals = simulate(&spec, &cfg).map_err(library("--params"))?;
            let estimates = estimate_moments(&terminals, order).map_err(library("--paths"))?;
            for w in heavy_tail_warnings(&estimates) {
                let _ = writeln!(err, "warning: {w}");
            }
            record.insert("paths".into(), ParamValue::Integer(paths as u64));
            record.insert("seed".into(), ParamValue::Integer(seed));
            record.insert("sim-step".into(), ParamValue::Number(sim_step));
            let doc = OutputDocument {
                metadata: metadata(process.process, record, order, MomentTime::At(time)),
                payload: Payload::Estimates(estimates),
            };
            Ok(match format {
                DocFormat::Json => doc.to_json(),
                DocFormat::Csv => doc.to_csv(),
            })
        }
    }
}

/// Runs one invocation; `args` includes the program name. Documents go to
/// `out`, diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, err) {
        Ok(text) => {
            if out.write_all(text.as_bytes()).is_err() {
                return 1;
            }
            EXIT_OK
        }
        Err(Failure::Usage(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
        Err(Failure::Numerical(e)) => {
            let kind = match e {
                Error::SingularMatrix { .. } => "SingularMatrix",
                Error::DegenerateSpectrum { .. } => "DegenerateSpectrum",
                Error::Overflow(_) => "Overflow",
                Error::NonStationary { .. } => "NonStationary",
                _ => "NumericalError",
            };
            let _ = writeln!(err, "error: {kind}: {e}");
            EXIT_NUMERICAL
        }
    }
}
