//! Jobs behind the subcommands. Each job produces the output text and an
//! exit status; nothing here touches the terminal or the file system.

use std::fmt::Write as _;

use fdbounds::closed_forms::overlay;
use fdbounds::engine::{
    solve_a, solve_a_primitive_convex, solve_b, BoundResult, ConstraintSpec, Direction, Sense, SolverOptions, Status,
};
use fdbounds::ext::fmt17;
use fdbounds::generators::Registry;
use fdbounds::joint_range::{envelope_check, sample_joint_range};
use fdbounds::verify::run_verify;
use fdbounds::{ExtReal, Generator};
use serde_json::{json, Value};

use crate::grammar::{ConstraintText, GeneratorText, ParseError, SweepText};

pub const EXIT_OK: i32 = 0;
/// Unparseable or invalid input.
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
/// A verification or envelope check found a discrepancy.
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// How maxima of primitive objectives are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Sign-pattern decomposition for primitive objectives under `--max`
    /// (unless the support size is overridden), lattice search otherwise.
    Auto,
    Grid,
    Convex,
}

#[derive(Clone, Debug)]
pub enum Job {
    Bound {
        sense: Sense,
        objective: GeneratorText,
        constraints: Vec<ConstraintText>,
        method: Method,
    },
    Curve {
        sense: Sense,
        objective: GeneratorText,
        sweep: SweepText,
        constraints: Vec<ConstraintText>,
        overlay: Option<String>,
        method: Method,
    },
    Surface {
        sense: Sense,
        objective: GeneratorText,
        sweeps: [SweepText; 2],
        constraints: Vec<ConstraintText>,
        method: Method,
    },
    JointRange {
        generators: Vec<GeneratorText>,
        count: usize,
        seed: u64,
        envelope: Option<usize>,
        envelope_tol: f64,
    },
    Verify,
}

#[derive(Clone, Debug)]
pub struct JobSpec {
    pub job: Job,
    pub opts: SolverOptions,
    pub registry: Registry,
    /// `None` picks the subcommand's default.
    pub format: Option<Format>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub body: String,
    pub exit: i32,
    /// Secondary report for standard error.
    pub report: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum JobError {
    Input(String),
    Unsupported(String),
}

impl JobError {
    pub fn exit_code(&self) -> i32 {
        match self {
            JobError::Input(_) => EXIT_INPUT,
            JobError::Unsupported(_) => EXIT_UNSUPPORTED,
        }
    }
}

impl std::fmt::Display for JobError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JobError::Input(m) | JobError::Unsupported(m) => f.write_str(m),
        }
    }
}

impl From<fdbounds::Error> for JobError {
    fn from(e: fdbounds::Error) -> Self {
        match e {
            fdbounds::Error::UnsupportedCase(_) => JobError::Unsupported(e.to_string()),
            _ => JobError::Input(e.to_string()),
        }
    }
}

impl From<ParseError> for JobError {
    fn from(e: ParseError) -> Self {
        JobError::Input(e.to_string())
    }
}

fn expected_direction(sense: Sense) -> Direction {
    match sense {
        Sense::Max => Direction::AtMost,
        Sense::Min => Direction::AtLeast,
    }
}

fn check_direction(sense: Sense, label: &str, d: Direction) -> Result<(), JobError> {
    let want = expected_direction(sense);
    if d != want {
        let flag = if sense == Sense::Max { "--max" } else { "--min" };
        return Err(JobError::Input(format!(
            "constraint '{label}' uses '{}' but {flag} needs '{}'",
            d.symbol(),
            want.symbol()
        )));
    }
    Ok(())
}

struct Problem<'a> {
    spec: &'a JobSpec,
    sense: Sense,
    objective: Generator,
    fixed: Vec<ConstraintSpec>,
    convex: Option<f64>,
}

impl<'a> Problem<'a> {
    fn new(
        spec: &'a JobSpec,
        sense: Sense,
        objective: &GeneratorText,
        fixed: &[ConstraintText],
        method: Method,
    ) -> Result<Self, JobError> {
        for c in fixed {
            check_direction(sense, &c.to_string(), c.direction)?;
        }
        let objective = objective.resolve(&spec.registry)?;
        let fixed = fixed
            .iter()
            .map(|c| c.resolve(&spec.registry))
            .collect::<fdbounds::Result<Vec<_>>>()?;
        let s = objective.primitive_parameter();
        let convex = match method {
            Method::Grid => None,
            Method::Auto => s.filter(|_| sense == Sense::Max && spec.opts.support_size.is_none()),
            Method::Convex => {
                if sense != Sense::Max || s.is_none() {
                    return Err(JobError::Input(format!(
                        "--method convex needs --max and a primitive objective, got '{}'",
                        objective.name()
                    )));
                }
                s
            }
        };
        Ok(Problem {
            spec,
            sense,
            objective,
            fixed,
            convex,
        })
    }

    fn solve(&self, extra: &[ConstraintSpec]) -> Result<BoundResult, JobError> {
        let mut cs = self.fixed.clone();
        cs.extend_from_slice(extra);
        let opts = &self.spec.opts;
        let r = match (self.sense, self.convex) {
            (Sense::Max, Some(s)) => solve_a_primitive_convex(s, &cs, opts)?,
            (Sense::Max, None) => solve_a(&self.objective, &cs, opts)?,
            (Sense::Min, _) => solve_b(&self.objective, &cs, opts)?,
        };
        Ok(r)
    }

    fn sweep_constraint(&self, sweep: &SweepText, x: f64) -> Result<ConstraintSpec, JobError> {
        Ok(sweep.at(x).resolve(&self.spec.registry)?)
    }
}

fn exit_for(results: &[&BoundResult]) -> i32 {
    if results.iter().any(|r| r.status == Status::Infeasible) {
        EXIT_INFEASIBLE
    } else {
        EXIT_OK
    }
}

fn cell(v: f64) -> String {
    fmt17(v)
}

fn run_bound(
    spec: &JobSpec,
    sense: Sense,
    objective: &GeneratorText,
    constraints: &[ConstraintText],
    method: Method,
) -> Result<Output, JobError> {
    let problem = Problem::new(spec, sense, objective, constraints, method)?;
    let r = problem.solve(&[])?;
    let body = match spec.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut record: Value = serde_json::to_value(&r).map_err(|e| JobError::Input(e.to_string()))?;
            record["objective"] = json!(objective.to_string());
            record["sense"] = json!(if sense == Sense::Max { "max" } else { "min" });
            record["constraints"] = json!(constraints.iter().map(|c| c.to_string()).collect::<Vec<_>>());
            serde_json::to_string_pretty(&record).expect("json values serialize") + "\n"
        }
        Format::Csv => {
            let status = serde_json::to_value(r.status).expect("status serializes");
            format!(
                "value,status,n_used\n{},{},{}\n",
                cell(r.value.to_f64()),
                status.as_str().unwrap_or_default(),
                r.n_used
            )
        }
    };
    Ok(Output {
        body,
        exit: exit_for(&[&r]),
        report: None,
    })
}

fn run_curve(
    spec: &JobSpec,
    sense: Sense,
    objective: &GeneratorText,
    sweep: &SweepText,
    constraints: &[ConstraintText],
    overlay_name: Option<&str>,
    method: Method,
) -> Result<Output, JobError> {
    check_direction(sense, &sweep.to_string(), sweep.direction)?;
    let problem = Problem::new(spec, sense, objective, constraints, method)?;
    if let Some(name) = overlay_name {
        if name != "closed_form" {
            return Err(JobError::Input(format!("unknown overlay '{name}', expected 'closed_form'")));
        }
        if !constraints.is_empty() {
            return Err(JobError::Input(
                "closed-form overlays cover a single swept constraint only".into(),
            ));
        }
    }
    let swept = sweep.generator.resolve(&spec.registry)?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for x in sweep.range.values() {
        let r = problem.solve(&[problem.sweep_constraint(sweep, x)?])?;
        let over = match overlay_name {
            None => None,
            Some(_) => Some(
                overlay(&problem.objective, &swept, sweep.direction == Direction::AtMost, x).ok_or_else(|| {
                    JobError::Input(format!(
                        "no closed form for '{}' under '{}' at {x}",
                        problem.objective.name(),
                        sweep.at(x)
                    ))
                })?,
            ),
        };
        rows.push((x, r.value, over));
        results.push(r);
    }
    let body = match spec.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from(if overlay_name.is_some() { "x,value,overlay\n" } else { "x,value\n" });
            for (x, v, o) in &rows {
                let _ = write!(out, "{},{}", cell(*x), cell(v.to_f64()));
                if let Some(o) = o {
                    let _ = write!(out, ",{}", cell(o.to_f64()));
                }
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let arr: Vec<Value> = rows
                .iter()
                .map(|(x, v, o)| {
                    let mut row = json!({"x": x, "value": v});
                    if let Some(o) = o {
                        row["overlay"] = json!(o);
                    }
                    row
                })
                .collect();
            serde_json::to_string_pretty(&arr).expect("json values serialize") + "\n"
        }
    };
    Ok(Output {
        body,
        exit: exit_for(&results.iter().collect::<Vec<_>>()),
        report: None,
    })
}

/// For `--max`: `min(A(x), A(y)) - A(x, y)`; for `--min`:
/// `B(x, y) - max(B(x), B(y))`. Both are nonnegative up to solver error.
fn improvement(sense: Sense, single_x: ExtReal, single_y: ExtReal, both: ExtReal) -> f64 {
    let (ax, ay, axy) = (single_x.to_f64(), single_y.to_f64(), both.to_f64());
    match sense {
        Sense::Max => ax.min(ay) - axy,
        Sense::Min => axy - ax.max(ay),
    }
}

fn run_surface(
    spec: &JobSpec,
    sense: Sense,
    objective: &GeneratorText,
    sweeps: &[SweepText; 2],
    constraints: &[ConstraintText],
    method: Method,
) -> Result<Output, JobError> {
    for s in sweeps {
        check_direction(sense, &s.to_string(), s.direction)?;
    }
    let problem = Problem::new(spec, sense, objective, constraints, method)?;
    let xs = sweeps[0].range.values();
    let ys = sweeps[1].range.values();
    let mut results = Vec::new();
    let mut single = |sweep: &SweepText, vals: &[f64]| -> Result<Vec<ExtReal>, JobError> {
        vals.iter()
            .map(|&v| {
                let r = problem.solve(&[problem.sweep_constraint(sweep, v)?])?;
                let value = r.value;
                results.push(r);
                Ok(value)
            })
            .collect()
    };
    let ax = single(&sweeps[0], &xs)?;
    let ay = single(&sweeps[1], &ys)?;
    let mut rows = Vec::with_capacity(xs.len() * ys.len());
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let cx = problem.sweep_constraint(&sweeps[0], x)?;
            let cy = problem.sweep_constraint(&sweeps[1], y)?;
            let r = problem.solve(&[cx, cy])?;
            let raw = improvement(sense, ax[i], ay[j], r.value);
            rows.push((x, y, r.value, raw));
            results.push(r);
        }
    }
    let body = match spec.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("x,y,value,improvement,improvement_raw\n");
            for (x, y, v, raw) in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    cell(*x),
                    cell(*y),
                    cell(v.to_f64()),
                    cell(raw.max(0.0)),
                    cell(*raw)
                );
            }
            out
        }
        Format::Json => {
            let arr: Vec<Value> = rows
                .iter()
                .map(|(x, y, v, raw)| {
                    json!({"x": x, "y": y, "value": v, "improvement": raw.max(0.0), "improvement_raw": raw})
                })
                .collect();
            serde_json::to_string_pretty(&arr).expect("json values serialize") + "\n"
        }
    };
    Ok(Output {
        body,
        exit: exit_for(&results.iter().collect::<Vec<_>>()),
        report: None,
    })
}

fn run_joint_range(
    spec: &JobSpec,
    generators: &[GeneratorText],
    count: usize,
    seed: u64,
    envelope: Option<usize>,
    envelope_tol: f64,
) -> Result<Output, JobError> {
    let gs = generators
        .iter()
        .map(|g| g.resolve(&spec.registry))
        .collect::<fdbounds::Result<Vec<_>>>()?;
    let n = spec.opts.support_size.unwrap_or(gs.len() + 2);
    let cloud = sample_joint_range(&gs, n, count, seed)?;
    let body = match spec.format.unwrap_or(Format::Csv) {
        Format::Csv => cloud.to_csv(),
        Format::Json => {
            let record = json!({
                "generators": gs.iter().map(|g| g.name()).collect::<Vec<_>>(),
                "n_used": cloud.n_used,
                "seed": cloud.seed,
                "count": cloud.count,
                "points": cloud.points,
            });
            serde_json::to_string_pretty(&record).expect("json values serialize") + "\n"
        }
    };
    let (exit, report) = match envelope {
        None => (EXIT_OK, None),
        Some(idx) => {
            let rep = envelope_check(&cloud, idx, &spec.opts, envelope_tol)?;
            let exit = if rep.violations.is_empty() { EXIT_OK } else { EXIT_CHECK_FAILED };
            (exit, Some(serde_json::to_string_pretty(&rep).expect("json values serialize")))
        }
    };
    Ok(Output { body, exit, report })
}

fn run_verify_job(spec: &JobSpec) -> Result<Output, JobError> {
    let report = run_verify(&spec.opts)?;
    let body = match spec.format {
        Some(Format::Json) => serde_json::to_string_pretty(&report).expect("reports serialize") + "\n",
        _ => report.lines(),
    };
    let exit = if report.all_passed() { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok(Output {
        body,
        exit,
        report: None,
    })
}

pub fn run(spec: &JobSpec) -> Result<Output, JobError> {
    spec.opts.validate()?;
    match &spec.job {
        Job::Bound {
            sense,
            objective,
            constraints,
            method,
        } => run_bound(spec, *sense, objective, constraints, *method),
        Job::Curve {
            sense,
            objective,
            sweep,
            constraints,
            overlay,
            method,
        } => run_curve(spec, *sense, objective, sweep, constraints, overlay.as_deref(), *method),
        Job::Surface {
            sense,
            objective,
            sweeps,
            constraints,
            method,
        } => run_surface(spec, *sense, objective, sweeps, constraints, *method),
        Job::JointRange {
            generators,
            count,
            seed,
            envelope,
            envelope_tol,
        } => run_joint_range(spec, generators, *count, *seed, *envelope, *envelope_tol),
        Job::Verify => run_verify_job(spec),
    }
}
