//! Command-line arguments and their translation into a [`JobSpec`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fdbounds::engine::{Sense, SolverOptions};
use fdbounds::generators::Registry;

use crate::grammar::{ConstraintText, GeneratorText, SweepText};
use crate::jobs::{Format, Job, JobError, JobSpec, Method};

#[derive(Parser, Debug)]
#[command(name = "fdbounds", version, about = "Sharp bounds between f-divergences")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalArgs {
    /// Objective tolerance of the search.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Coarse lattice step on each simplex.
    #[arg(long, global = true)]
    pub grid_step: Option<f64>,
    /// Number of refinement rounds after the lattice.
    #[arg(long, global = true)]
    pub refine_rounds: Option<usize>,
    /// Support size of the pairs, overriding the theorem's default.
    #[arg(long, global = true)]
    pub support_size: Option<usize>,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Any solver option as KEY=VALUE (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// JSON file with custom generator definitions.
    #[arg(long, global = true)]
    pub generators: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Auto,
    Grid,
    Convex,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct SenseArgs {
    /// Supremum under at-most constraints.
    #[arg(long)]
    pub max: bool,
    /// Infimum under at-least constraints.
    #[arg(long)]
    pub min: bool,
}

#[derive(Args, Debug)]
pub struct ProblemArgs {
    #[command(flatten)]
    pub sense: SenseArgs,
    /// Objective generator, e.g. `tv` or `power(3)`.
    #[arg(long)]
    pub objective: String,
    /// Fixed constraint such as `hellinger<=0.5` (repeatable).
    #[arg(long = "constraint")]
    pub constraints: Vec<String>,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// One bound, as JSON.
    Bound {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Bounds along one swept constraint, e.g. `--sweep "hellinger<=0.05:0.95:19"`.
    Curve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        sweep: String,
        /// Add a reference column; the only overlay is `closed_form`.
        #[arg(long)]
        overlay: Option<String>,
    },
    /// Bounds over two swept constraints, with the improvement over the
    /// pointwise best single-constraint bound.
    Surface {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Exactly two sweep axes; the first varies slowest.
        #[arg(long = "sweep", required = true, num_args = 1)]
        sweeps: Vec<String>,
    },
    /// Sampled joint range as CSV.
    JointRange {
        /// Generator (repeatable); one column per generator.
        #[arg(long = "gen", required = true)]
        gens: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Check a two-generator cloud against the bound envelopes, with
        /// this generator index as the objective.
        #[arg(long)]
        envelope: Option<usize>,
        #[arg(long, default_value_t = 1e-2)]
        envelope_tol: f64,
    },
    /// Oracle-agreement suite.
    Verify {
        /// Drop the one-half factor of the sign-pattern decomposition
        /// (negative control).
        #[arg(long, hide = true)]
        corrupt_half_factor: bool,
    },
}

fn sense(s: &SenseArgs) -> Sense {
    if s.max {
        Sense::Max
    } else {
        Sense::Min
    }
}

fn method(m: MethodArg) -> Method {
    match m {
        MethodArg::Auto => Method::Auto,
        MethodArg::Grid => Method::Grid,
        MethodArg::Convex => Method::Convex,
    }
}

fn constraints(texts: &[String]) -> Result<Vec<ConstraintText>, JobError> {
    Ok(texts.iter().map(|t| t.parse()).collect::<Result<Vec<_>, _>>()?)
}

fn options(g: &GlobalArgs, corrupt_half_factor: bool) -> Result<SolverOptions, JobError> {
    let mut o = SolverOptions::default();
    for kv in &g.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| JobError::Input(format!("expected KEY=VALUE, got '{kv}'")))?;
        o.set(k.trim(), v)?;
    }
    if let Some(t) = g.tol {
        o.objective_tol = t;
    }
    if let Some(h) = g.grid_step {
        o.grid_step = h;
    }
    if let Some(r) = g.refine_rounds {
        o.refine_rounds = r;
    }
    if g.support_size.is_some() {
        o.support_size = g.support_size;
    }
    o.corrupt_half_factor |= corrupt_half_factor;
    o.validate()?;
    Ok(o)
}

impl Cli {
    pub fn into_spec(self) -> Result<JobSpec, JobError> {
        let mut registry = Registry::new();
        if let Some(path) = &self.global.generators {
            registry.load_file(path)?;
        }
        let corrupt = matches!(
            self.command,
            Command::Verify {
                corrupt_half_factor: true
            }
        );
        let opts = options(&self.global, corrupt)?;
        let format = self.global.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        });
        let job = match self.command {
            Command::Bound { problem } => Job::Bound {
                sense: sense(&problem.sense),
                objective: problem.objective.parse()?,
                constraints: constraints(&problem.constraints)?,
                method: method(problem.method),
            },
            Command::Curve {
                problem,
                sweep,
                overlay,
            } => Job::Curve {
                sense: sense(&problem.sense),
                objective: problem.objective.parse()?,
                sweep: sweep.parse()?,
                constraints: constraints(&problem.constraints)?,
                overlay,
                method: method(problem.method),
            },
            Command::Surface { problem, sweeps } => {
                let parsed = sweeps.iter().map(|s| s.parse()).collect::<Result<Vec<SweepText>, _>>()?;
                let sweeps: [SweepText; 2] = parsed.try_into().map_err(|v: Vec<SweepText>| {
                    JobError::Input(format!("surface needs exactly two --sweep axes, got {}", v.len()))
                })?;
                Job::Surface {
                    sense: sense(&problem.sense),
                    objective: problem.objective.parse()?,
                    sweeps,
                    constraints: constraints(&problem.constraints)?,
                    method: method(problem.method),
                }
            }
            Command::JointRange {
                gens,
                count,
                seed,
                envelope,
                envelope_tol,
            } => Job::JointRange {
                generators: gens
                    .iter()
                    .map(|g| g.parse())
                    .collect::<Result<Vec<GeneratorText>, _>>()?,
                count,
                seed,
                envelope,
                envelope_tol,
            },
            Command::Verify { .. } => Job::Verify,
        };
        Ok(JobSpec {
            job,
            opts,
            registry,
            format,
        })
    }
}
