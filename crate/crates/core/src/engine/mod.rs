//! Extremal values of one f-divergence under constraints on others.
//!
//! Every problem is reduced to pairs on a finite sample space and solved by
//! the deterministic search in [`search`]. The supremum under `m` at-most
//! constraints is attained on `m + 2` points; so is the infimum under
//! at-least constraints, and `m + 1` points suffice when all constraint
//! generators are primitive.

mod barrier;
mod convex;
pub mod functional;
mod search;

use serde::Serialize;

use crate::divergence::{divergence, DiscretePair};
use crate::ext::ExtReal;
use crate::generators::Generator;
use crate::{Error, Result};

pub use convex::{
    improvement_over_pointwise_min, sign_patterns, solve_a_primitive_convex, solve_conopt,
    solve_conopt_detailed, ConoptSolution, Improvement, SignPattern,
};
pub use functional::PairFunctional;

/// Whether a constraint bounds its divergence from above or below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    AtMost,
    AtLeast,
}

impl Direction {
    pub fn symbol(self) -> &'static str {
        match self {
            Direction::AtMost => "<=",
            Direction::AtLeast => ">=",
        }
    }
}

/// Optimization sense.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

/// `D_{f_i}(P||Q) <= bound` or `>= bound`.
#[derive(Clone, Debug)]
pub struct ConstraintSpec {
    pub generator: Generator,
    pub bound: f64,
    pub direction: Direction,
}

impl ConstraintSpec {
    pub fn at_most(generator: Generator, bound: f64) -> Self {
        ConstraintSpec {
            generator,
            bound,
            direction: Direction::AtMost,
        }
    }

    pub fn at_least(generator: Generator, bound: f64) -> Self {
        ConstraintSpec {
            generator,
            bound,
            direction: Direction::AtLeast,
        }
    }

    pub fn is_satisfied_by(&self, pair: &DiscretePair, tol: f64) -> bool {
        self.violation(pair) <= tol
    }

    /// Amount by which `pair` violates the constraint (0 when satisfied).
    pub fn violation(&self, pair: &DiscretePair) -> f64 {
        let v = divergence(&self.generator, pair);
        match (self.direction, v) {
            (Direction::AtMost, ExtReal::PosInf) => f64::INFINITY,
            (Direction::AtMost, ExtReal::Finite(x)) => (x - self.bound).max(0.0),
            (Direction::AtLeast, ExtReal::PosInf) => 0.0,
            (Direction::AtLeast, ExtReal::Finite(x)) => (self.bound - x).max(0.0),
        }
    }
}

/// How the convex subproblems of the primitive decomposition are solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConoptMethod {
    /// Barrier first, search when the barrier cannot run or stalls.
    Auto,
    Barrier,
    Search,
}

/// Solver settings. Nothing here is random; equal options give equal results.
#[derive(Clone, Debug, Serialize)]
pub struct SolverOptions {
    /// Lattice step on each simplex.
    pub grid_step: f64,
    pub refine_rounds: usize,
    /// Grid points per free coordinate in each refinement round.
    pub refine_points: usize,
    /// Box shrink factor between refinement rounds.
    pub refine_shrink: f64,
    pub objective_tol: f64,
    pub feasibility_tol: f64,
    /// Upper bound on lattice pairs; the lattice is coarsened to fit.
    pub max_lattice_pairs: usize,
    /// Upper bound on points per refinement round.
    pub max_refine_points: usize,
    pub polish: bool,
    pub polish_initial_step: f64,
    /// Analytic shortcuts: dropping non-finite constraints when the
    /// objective is finite.
    pub fast_paths: bool,
    /// Overrides the support size chosen by the reduction theorems.
    pub support_size: Option<usize>,
    pub conopt_method: ConoptMethod,
    /// Debug negative control: omit the factor 1/2 in the primitive
    /// decomposition.
    pub corrupt_half_factor: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            grid_step: 0.02,
            refine_rounds: 4,
            refine_points: 11,
            refine_shrink: 0.1,
            objective_tol: 1e-3,
            feasibility_tol: 1e-9,
            max_lattice_pairs: 4_000_000,
            max_refine_points: 1_000_000,
            polish: true,
            polish_initial_step: 1e-2,
            fast_paths: true,
            support_size: None,
            conopt_method: ConoptMethod::Auto,
            corrupt_half_factor: false,
        }
    }
}

impl SolverOptions {
    pub(crate) fn polish_min_step(&self) -> f64 {
        (self.objective_tol * 1e-6).max(1e-13)
    }

    /// Set one option from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad value '{value}' for option '{key}'")))
        }
        match key {
            "grid_step" => self.grid_step = num(key, value)?,
            "refine_rounds" => self.refine_rounds = num(key, value)?,
            "refine_points" => self.refine_points = num(key, value)?,
            "refine_shrink" => self.refine_shrink = num(key, value)?,
            "objective_tol" | "tol" => self.objective_tol = num(key, value)?,
            "feasibility_tol" => self.feasibility_tol = num(key, value)?,
            "max_lattice_pairs" => self.max_lattice_pairs = num(key, value)?,
            "max_refine_points" => self.max_refine_points = num(key, value)?,
            "polish" => self.polish = num(key, value)?,
            "polish_initial_step" => self.polish_initial_step = num(key, value)?,
            "fast_paths" => self.fast_paths = num(key, value)?,
            "support_size" => self.support_size = Some(num(key, value)?),
            "conopt_method" => {
                self.conopt_method = match value.trim() {
                    "auto" => ConoptMethod::Auto,
                    "barrier" => ConoptMethod::Barrier,
                    "search" => ConoptMethod::Search,
                    _ => return Err(Error::Parse(format!("bad value '{value}' for option '{key}'"))),
                }
            }
            "corrupt_half_factor" => self.corrupt_half_factor = num(key, value)?,
            _ => return Err(Error::Parse(format!("unknown option '{key}'"))),
        }
        self.validate()
    }

    /// Apply `key=value` pairs in order.
    pub fn from_pairs<'a, I: IntoIterator<Item = (&'a str, &'a str)>>(pairs: I) -> Result<Self> {
        let mut o = SolverOptions::default();
        for (k, v) in pairs {
            o.set(k, v)?;
        }
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::ParameterDomain(what.to_string()));
        if !(self.grid_step > 0.0 && self.grid_step <= 1.0) {
            return bad("grid_step must lie in (0, 1]");
        }
        if !(self.refine_shrink > 0.0 && self.refine_shrink < 1.0) {
            return bad("refine_shrink must lie in (0, 1)");
        }
        if !(self.objective_tol > 0.0) || !(self.feasibility_tol >= 0.0) {
            return bad("tolerances must be positive");
        }
        if self.refine_points < 3 {
            return bad("refine_points must be at least 3");
        }
        if !(self.polish_initial_step > 0.0) {
            return bad("polish_initial_step must be positive");
        }
        if let Some(n) = self.support_size {
            if n < 2 {
                return bad("support_size must be at least 2");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Optimum found to within the objective tolerance.
    Optimal,
    Infeasible,
    /// Supremum is `+inf`.
    Unbounded,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    pub method: String,
    pub lattice_k: usize,
    pub lattice_points: usize,
    pub refine_rounds: usize,
    pub refine_points: usize,
    pub polish_moves: usize,
    pub evaluations: u64,
    /// Largest constraint violation of the argpair, re-evaluated directly.
    pub max_violation: f64,
    /// `|D_f(argpair) - value|`.
    pub objective_residual: f64,
    /// Labels of constraints removed before solving.
    pub dropped_constraints: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundResult {
    pub value: ExtReal,
    /// A pair attaining `value`. Absent when the problem is infeasible or the
    /// extremum is an unattained limit.
    pub argpair: Option<DiscretePair>,
    pub n_used: usize,
    pub status: Status,
    pub diagnostics: Diagnostics,
}

impl BoundResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bound results serialize")
    }

    fn infeasible(n: usize, sense: Sense, why: String) -> Self {
        BoundResult {
            value: match sense {
                Sense::Max => ExtReal::ZERO,
                Sense::Min => ExtReal::PosInf,
            },
            argpair: None,
            n_used: n,
            status: Status::Infeasible,
            diagnostics: Diagnostics {
                method: "precheck".into(),
                notes: vec![why],
                ..Diagnostics::default()
            },
        }
    }
}

fn label(c: &ConstraintSpec) -> String {
    format!("{} {} {}", c.generator.name(), c.direction.symbol(), c.bound)
}

/// Checks shared by all entry points; returns the constraints that remain
/// after dropping `+inf` at-most bounds.
fn prepare(
    constraints: &[ConstraintSpec],
    expected: Direction,
    diag: &mut Vec<String>,
) -> Result<Vec<ConstraintSpec>> {
    let mut kept = Vec::with_capacity(constraints.len());
    for c in constraints {
        if c.direction != expected {
            return Err(Error::InvalidProblem(format!(
                "mixed constraint directions: '{}' in a problem that needs '{}'",
                label(c),
                expected.symbol()
            )));
        }
        if c.bound.is_nan() || c.bound < 0.0 {
            return Err(Error::InvalidProblem(format!(
                "constraint bound must be nonnegative: '{}'",
                label(c)
            )));
        }
        if c.bound == f64::INFINITY {
            if c.direction == Direction::AtLeast {
                return Err(Error::InvalidProblem(format!(
                    "at-least bound must be finite: '{}'",
                    label(c)
                )));
            }
            diag.push(label(c));
            continue;
        }
        kept.push(c.clone());
    }
    Ok(kept)
}

/// Optimize `objective` over pairs on `n` points subject to `constraints`.
///
/// Constraints must all be at-most for `Sense::Max` and at-least for
/// `Sense::Min`.
pub fn solve_finite_dim(
    objective: &Generator,
    constraints: &[ConstraintSpec],
    sense: Sense,
    n: usize,
    opts: &SolverOptions,
) -> Result<BoundResult> {
    opts.validate()?;
    if n < 2 {
        return Err(Error::InvalidProblem(format!("support size must be at least 2, got {n}")));
    }
    let expected = match sense {
        Sense::Max => Direction::AtMost,
        Sense::Min => Direction::AtLeast,
    };
    let mut dropped = Vec::new();
    let kept = prepare(constraints, expected, &mut dropped)?;
    let mut r = run_search(objective, &kept, sense, n, opts)?;
    r.diagnostics.dropped_constraints.extend(dropped);
    Ok(r)
}

fn run_search(
    objective: &Generator,
    constraints: &[ConstraintSpec],
    sense: Sense,
    n: usize,
    opts: &SolverOptions,
) -> Result<BoundResult> {
    for c in constraints {
        if c.direction == Direction::AtLeast {
            let max = c.generator.max_divergence_value();
            if max < c.bound - opts.feasibility_tol {
                return Ok(BoundResult::infeasible(
                    n,
                    sense,
                    format!("'{}' exceeds the largest possible value {max}", label(c)),
                ));
            }
        }
    }
    let objective_fn = PairFunctional::Divergence(objective.clone());
    let funcs: Vec<PairFunctional> = constraints
        .iter()
        .map(|c| PairFunctional::Divergence(c.generator.clone()))
        .collect();
    let problem = search::Problem {
        objective: &objective_fn,
        sense,
        constraints: constraints
            .iter()
            .zip(&funcs)
            .map(|(c, f)| search::Constraint {
                functional: f,
                bound: c.bound,
                direction: c.direction,
            })
            .collect(),
        n,
    };
    let Some(out) = search::search(&problem, opts) else {
        return Ok(BoundResult::infeasible(
            n,
            sense,
            "no feasible lattice point".to_string(),
        ));
    };
    let pair = DiscretePair::from_parts(out.p, out.q);
    let max_violation = constraints
        .iter()
        .map(|c| c.violation(&pair))
        .fold(0.0, f64::max);
    let direct = divergence(objective, &pair);
    let status = if out.value.is_infinite() && sense == Sense::Max {
        Status::Unbounded
    } else {
        Status::Optimal
    };
    let s = out.stats;
    Ok(BoundResult {
        value: out.value,
        argpair: Some(pair),
        n_used: n,
        status,
        diagnostics: Diagnostics {
            method: "search".into(),
            lattice_k: s.lattice_k,
            lattice_points: s.lattice_points,
            refine_rounds: s.refine_rounds,
            refine_points: s.refine_points,
            polish_moves: s.polish_moves,
            evaluations: s.evaluations,
            max_violation,
            objective_residual: direct.abs_diff(out.value),
            dropped_constraints: Vec::new(),
            notes: Vec::new(),
        },
    })
}

/// `A(D_1..D_m) = sup { D_f : D_{f_i} <= D_i }`, solved on `m + 2` points.
pub fn solve_a(objective: &Generator, constraints: &[ConstraintSpec], opts: &SolverOptions) -> Result<BoundResult> {
    opts.validate()?;
    let mut dropped = Vec::new();
    let kept = prepare(constraints, Direction::AtMost, &mut dropped)?;
    let n = opts.support_size.unwrap_or(kept.len() + 2);
    let mut r = run_search(objective, &kept, Sense::Max, n, opts)?;
    r.diagnostics.dropped_constraints.extend(dropped);
    Ok(r)
}

/// `B(D_1..D_m) = inf { D_f : D_{f_i} >= D_i }`.
///
/// With a finite objective, constraints on non-finite divergences do not
/// change the infimum and are dropped (when `fast_paths` is on); if none
/// remain the infimum is 0. When every remaining constraint generator is
/// primitive, `m + 1` points suffice. A non-finite objective together with a
/// non-finite constraint divergence is refused.
pub fn solve_b(objective: &Generator, constraints: &[ConstraintSpec], opts: &SolverOptions) -> Result<BoundResult> {
    opts.validate()?;
    let mut dropped = Vec::new();
    let mut kept = prepare(constraints, Direction::AtLeast, &mut dropped)?;
    let objective_finite = objective.is_finite_divergence();
    if !objective_finite {
        if let Some(c) = kept.iter().find(|c| !c.generator.is_finite_divergence()) {
            return Err(Error::UnsupportedCase(format!(
                "infimum of the non-finite divergence '{}' under the non-finite constraint '{}' is not covered by the reduction",
                objective.name(),
                label(c)
            )));
        }
    }
    let mut notes = Vec::new();
    if objective_finite && opts.fast_paths {
        let (finite, infinite): (Vec<_>, Vec<_>) =
            kept.into_iter().partition(|c| c.generator.is_finite_divergence());
        dropped.extend(infinite.iter().map(label));
        kept = finite;
        if kept.is_empty() && !constraints.is_empty() {
            return Ok(BoundResult {
                value: ExtReal::ZERO,
                argpair: None,
                n_used: 0,
                status: Status::Optimal,
                diagnostics: Diagnostics {
                    method: "non-finite-constraint-collapse".into(),
                    dropped_constraints: dropped,
                    notes: vec!["infimum 0 is approached but not attained".into()],
                    ..Diagnostics::default()
                },
            });
        }
        if !infinite.is_empty() {
            notes.push("argpair need not satisfy the dropped constraints".into());
        }
    }
    let all_primitive = !kept.is_empty() && kept.iter().all(|c| c.generator.is_primitive());
    let n = opts.support_size.unwrap_or(if all_primitive {
        (kept.len() + 1).max(2)
    } else {
        kept.len() + 2
    });
    let mut r = run_search(objective, &kept, Sense::Min, n, opts)?;
    r.diagnostics.dropped_constraints.extend(dropped);
    r.diagnostics.notes.extend(notes);
    Ok(r)
}
