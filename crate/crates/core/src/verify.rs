//! Oracle-agreement suite: closed forms against the engine, the integral
//! representation against direct evaluation, and the sign-pattern
//! decomposition against the general search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::closed_forms::{chi2_a, gilardoni_b_tv, power_chi2_a, primitive_constraint_b, symmetric_b_tv};
use crate::divergence::{divergence, psi, DiscretePair};
use crate::engine::{solve_a, solve_a_primitive_convex, solve_b, ConstraintSpec, SolverOptions};
use crate::generators::{make_generator, Generator};
use crate::representation::integral_representation;
use crate::Result;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, residuals: impl IntoIterator<Item = f64>, tolerance: f64) -> Check {
        let max_residual = residuals
            .into_iter()
            .fold(0.0, |m: f64, r| if r.is_nan() { f64::INFINITY } else { m.max(r) });
        Check {
            name: name.to_string(),
            max_residual,
            tolerance,
            passed: max_residual <= tolerance,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<40} max_residual={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_residual,
            self.tolerance
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn lines(&self) -> String {
        self.checks.iter().map(|c| c.line() + "\n").collect()
    }
}

/// Random pair on `n` points with every entry at least `floor`.
pub fn random_pair<R: Rng>(rng: &mut R, n: usize, floor: f64) -> DiscretePair {
    let mut draw = || {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let s: f64 = v.iter().sum();
        let scale = 1.0 - n as f64 * floor;
        let mut out: Vec<f64> = v.iter().map(|x| floor + scale * x / s).collect();
        // Put the rounding residue on the largest entry.
        let resid = 1.0 - out.iter().sum::<f64>();
        let k = (0..n).max_by(|&a, &b| out[a].total_cmp(&out[b])).unwrap_or(0);
        out[k] += resid;
        out
    };
    let p = draw();
    let q = draw();
    DiscretePair::new(p, q).expect("valid by construction")
}

fn g(key: &str) -> Result<Generator> {
    make_generator(key, &[])
}

/// Run every check with the given engine options.
pub fn run_verify(opts: &SolverOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let tv = g("tv")?;
    let hel = g("hellinger")?;
    let kl = g("kl")?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let pairs: Vec<DiscretePair> = (0..100).map(|_| random_pair(&mut rng, 5, 1e-3)).collect();
    let mut residuals = Vec::new();
    for key in ["kl", "chi2", "hellinger", "triangular", "capacitory"] {
        let gen = g(key)?;
        for pr in &pairs {
            let d = divergence(&gen, pr).to_f64();
            let r = integral_representation(&gen, &psi(pr), 1e-10)?.to_f64();
            residuals.push((d - r).abs());
        }
    }
    checks.push(Check::new("representation identity", residuals, 1e-6));

    let primitive_one = make_generator("primitive", &[1.0])?;
    let residuals = pairs
        .iter()
        .map(|pr| divergence(&tv, pr).abs_diff(divergence(&primitive_one, pr)));
    checks.push(Check::new("tv equals primitive(1)", residuals, 1e-12));

    let mut residuals = Vec::new();
    for h in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let a = solve_a(&tv, &[ConstraintSpec::at_most(hel.clone(), h)], opts)?.value.to_f64();
        residuals.push((a - (2.0 * h).sqrt() * (1.0 - h / 2.0).sqrt()).abs());
    }
    checks.push(Check::new("tv given hellinger closed form", residuals, 5e-3));

    let mut residuals = Vec::new();
    for v in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let b = solve_b(&kl, &[ConstraintSpec::at_least(tv.clone(), v)], opts)?.value.to_f64();
        residuals.push((b - gilardoni_b_tv(&kl, v)?.value.to_f64()).abs());
    }
    checks.push(Check::new("kl given tv vs one-dimensional form", residuals, 5e-3));

    let mut residuals = Vec::new();
    for key in ["hellinger", "triangular", "capacitory"] {
        let gen = g(key)?;
        for i in 1..=9 {
            let v = i as f64 / 10.0;
            let a = symmetric_b_tv(&gen, v)?;
            let b = gilardoni_b_tv(&gen, v)?.value;
            residuals.push(a.abs_diff(b));
        }
    }
    checks.push(Check::new("symmetric form vs one-dimensional form", residuals, 1e-9));

    let mut residuals = Vec::new();
    for i in 0..=9 {
        let d = i as f64 / 10.0;
        let a = primitive_constraint_b(&kl, 1.0, d)?.value;
        let b = gilardoni_b_tv(&kl, d)?.value;
        residuals.push(a.abs_diff(b));
    }
    checks.push(Check::new("primitive constraint at s = 1", residuals, 0.0));

    let mut residuals = Vec::new();
    for l in [3.0, 4.0] {
        let pw = make_generator("power", &[l])?;
        for d in [0.5, 1.0, 3.0, 7.0] {
            residuals.push((chi2_a(&pw, d)? - power_chi2_a(l, d)?).abs());
        }
    }
    checks.push(Check::new("inverse h vs power formula", residuals, 1e-12));

    let chi2 = g("chi2")?;
    let pw = make_generator("power", &[3.0])?;
    let mut residuals = Vec::new();
    for d in [0.5, 3.0] {
        let a = solve_a(&chi2, &[ConstraintSpec::at_most(pw.clone(), d)], opts)?.value.to_f64();
        residuals.push((a - power_chi2_a(3.0, d)?).abs());
    }
    checks.push(Check::new("chi2 given power(3) engine", residuals, 5e-3));

    let mut residuals = Vec::new();
    for h in [0.1, 0.4, 0.7] {
        let cs = [ConstraintSpec::at_most(hel.clone(), h)];
        let convex = solve_a_primitive_convex(1.0, &cs, opts)?.value;
        let grid = solve_a(&tv, &cs, opts)?.value;
        residuals.push(convex.abs_diff(grid));
    }
    checks.push(Check::new("convex decomposition vs grid", residuals, 5e-3));

    let cap = g("capacitory")?;
    let tri = g("triangular")?;
    let mut residuals = Vec::new();
    for d in [0.5, 1.0, 1.5] {
        let a = solve_a(&cap, &[ConstraintSpec::at_most(tri.clone(), d)], opts)?.value.to_f64();
        residuals.push((a - std::f64::consts::LN_2 * d).abs());
    }
    checks.push(Check::new("capacitory given triangular upper", residuals, 5e-3));

    Ok(VerifyReport { checks })
}
