//! `firstint`: build vector fields that conserve a prescribed set of first
//! integrals, inspect the underlying determinant brackets, and integrate
//! the resulting flows.
//!
//! Exit codes: 0 success, 1 usage, 2 input parsing or validation,
//! 3 construction or evaluation failure, 4 verification failure.

mod input;
mod output;
mod verify;

use std::path::{Path, PathBuf};
use std::process;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use firstint_core::expr::Bindings;
use firstint_core::flow::{conservation_report, integrate, FlowError};
use firstint_core::scenarios;

/// A classified failure; the variant decides the process exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Math(String),
    Verify(String),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Failure {
        Failure::Usage(msg.into())
    }
    pub fn input(msg: impl Into<String>) -> Failure {
        Failure::Input(msg.into())
    }
    pub fn math(msg: impl Into<String>) -> Failure {
        Failure::Math(msg.into())
    }
    pub fn verify(msg: impl Into<String>) -> Failure {
        Failure::Verify(msg.into())
    }

    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Math(_) => 3,
            Failure::Verify(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Math(m) | Failure::Verify(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "firstint",
    version,
    about = "Vector fields that conserve a prescribed set of first integrals"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the builtin systems
    Scenarios,
    /// Builtin system details
    Scenario {
        #[command(subcommand)]
        cmd: ScenarioCmd,
    },
    /// Validate a system and verify conservation near its start point
    Check {
        #[command(flatten)]
        source: Source,
    },
    /// Evaluate the constructed field at one point, as JSON
    Field {
        #[command(flatten)]
        source: Source,
        /// Point as comma-separated numbers, x coordinates then y
        #[arg(long)]
        point: Option<String>,
    },
    /// Bracket and independence diagnostics at one point, as JSON
    Brackets {
        #[command(flatten)]
        source: Source,
        /// Point as comma-separated numbers, x coordinates then y
        #[arg(long)]
        point: Option<String>,
    },
    /// Integrate the constructed field and report conservation drift
    Integrate {
        #[command(flatten)]
        source: Source,
        /// Write the trajectory as CSV
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the drift report as JSON
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// Print one builtin in full
    Show { name: String },
}

#[derive(Args)]
struct Source {
    /// Scenario file (JSON)
    #[arg(value_name = "FILE", conflicts_with = "builtin")]
    file: Option<PathBuf>,
    /// Use a builtin system instead of a file
    #[arg(long)]
    builtin: Option<String>,
    /// Override one builtin parameter (name=value); repeatable
    #[arg(long = "param", value_name = "NAME=VALUE", requires = "builtin")]
    params: Vec<String>,
}

impl Source {
    fn job(&self) -> Result<input::Job, Failure> {
        match (&self.file, &self.builtin) {
            (Some(path), None) => input::from_file(path),
            (None, Some(name)) => input::from_builtin(name, &self.params),
            (None, None) => Err(Failure::usage("provide a scenario file or --builtin <name>")),
            (Some(_), Some(_)) => unreachable!("rejected by clap"),
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            process::exit(0);
        }
        Err(e) => {
            eprint!("{e}");
            process::exit(1);
        }
    };
    if let Err(f) = run(cli) {
        eprintln!("error: {}", f.message());
        process::exit(f.code());
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Scenarios => cmd_scenarios(),
        Cmd::Scenario { cmd: ScenarioCmd::Show { name } } => cmd_show(&name),
        Cmd::Check { source } => verify::run(&source.job()?),
        Cmd::Field { source, point } => cmd_field(&source.job()?, point.as_deref()),
        Cmd::Brackets { source, point } => cmd_brackets(&source.job()?, point.as_deref()),
        Cmd::Integrate { source, out, report } => {
            cmd_integrate(&source.job()?, out.as_deref(), report.as_deref())
        }
    }
}

fn cmd_scenarios() -> Result<(), Failure> {
    for name in scenarios::BUILTINS {
        let info = scenarios::describe(name).expect("registry describes its own entries");
        println!("{name}");
        println!("  degrees of freedom: {}", info.degrees_of_freedom);
        println!("  {}", info.summary);
    }
    Ok(())
}

fn cmd_show(name: &str) -> Result<(), Failure> {
    let info = scenarios::describe(name).map_err(|e| Failure::input(e.to_string()))?;
    let scn = scenarios::materialize(name, &Bindings::new()).expect("defaults are valid");
    println!("{name}");
    println!("  {}", info.summary);
    println!("degrees of freedom: {}", info.degrees_of_freedom);
    if info.parameters.is_empty() {
        println!("parameters: none");
    } else {
        println!("parameters:");
        for (pname, requirement) in &info.parameters {
            println!("  {pname}: {requirement}");
        }
    }
    println!("integrals:");
    for (i, text) in scn.integral_texts.iter().enumerate() {
        println!("  f{} = {text}", i + 1);
    }
    println!("hamiltonian: {}", scn.hamiltonian_text);
    let start: Vec<String> = scn.initial.iter().map(|v| format!("{v}")).collect();
    println!("default start: {}", start.join(", "));
    Ok(())
}

fn parse_point(text: &str, dim: usize) -> Result<Vec<f64>, Failure> {
    let vals: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|e| Failure::input(format!("bad --point: {e}")))?;
    if vals.len() == dim {
        Ok(vals)
    } else {
        Err(Failure::input(format!(
            "--point has {} coordinates but the phase space needs {dim}",
            vals.len()
        )))
    }
}

fn point_or_start(job: &input::Job, point: Option<&str>) -> Result<Vec<f64>, Failure> {
    match point {
        Some(text) => parse_point(text, job.space.dim()),
        None => Ok(job.initial.clone()),
    }
}

fn cmd_field(job: &input::Job, point: Option<&str>) -> Result<(), Failure> {
    let p = point_or_start(job, point)?;
    let model = job.model()?;
    let sample = model
        .sample(&p)
        .map_err(|e| Failure::math(format!("field construction failed: {e}")))?;
    print!("{}", output::sample_json(&sample));
    Ok(())
}

fn cmd_brackets(job: &input::Job, point: Option<&str>) -> Result<(), Failure> {
    let p = point_or_start(job, point)?;
    let math = |e: firstint_core::brackets::BracketError| Failure::math(e.to_string());
    let rank = job.set.independence_rank(&p).map_err(math)?;
    let matrix = job.set.involution_matrix(&p).map_err(math)?;
    let s_zero = job.set.s_zero(&p).map_err(math)?;
    let s_n = job.set.s_n(&p).map_err(math)?;
    print!("{}", output::brackets_json(&p, rank, &matrix, s_zero, s_n));
    Ok(())
}

fn cmd_integrate(
    job: &input::Job,
    out: Option<&Path>,
    report_path: Option<&Path>,
) -> Result<(), Failure> {
    let model = job.model()?;
    let traj = match integrate(&model, &job.initial, &job.config) {
        Ok(traj) => traj,
        Err(FlowError::InvalidConfig(msg)) => {
            return Err(Failure::input(format!("integrator: {msg}")))
        }
        Err(FlowError::StartFailure(e)) => {
            return Err(Failure::math(format!(
                "field construction failed at the start point: {e}"
            )))
        }
        Err(FlowError::EarlyTermination(t)) => {
            return Err(Failure::math(format!("integration stopped: {}", t.label())))
        }
    };
    let report = conservation_report(&traj);
    if let Some(path) = out {
        output::write_atomic(path, &output::trajectory_csv(&traj))?;
    }
    if let Some(path) = report_path {
        output::write_atomic(path, &output::report_json(&report))?;
    }
    let worst = report.integrals.iter().map(|d| d.max_rel_drift).fold(0.0_f64, f64::max);
    println!("termination: {}", report.termination.label());
    println!("steps: {} accepted, {} rejected", report.steps, report.rejected);
    println!("final time: {:.6}", traj.final_time());
    println!("worst relative drift: {worst:.3e}");
    Ok(())
}
