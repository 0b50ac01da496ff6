//! Primitive objectives as a maximum of convex programs.
//!
//! For the primitive divergence `u_s`, `min(a, b) = (a + b - |a - b|) / 2`
//! gives
//!
//! ```text
//! D_{u_s}(P||Q) = -|s - 1| / 2 + 1/2 sum_j |p_j - s q_j|
//! ```
//!
//! and `sum_j |x_j| = max over sign vectors of sum_j sigma_j x_j`. At an
//! optimum the coordinates can be ordered so that the signs are
//! nondecreasing, which leaves `m + 3` linear objectives, each maximized over
//! the convex feasible set.

use serde::Serialize;

use super::barrier::{self, BarrierConstraint};
use super::functional::PairFunctional;
use super::search;
use super::{prepare, BoundResult, ConoptMethod, ConstraintSpec, Diagnostics, Direction, Sense, SolverOptions, Status};
use crate::divergence::DiscretePair;
use crate::ext::ExtReal;
use crate::generators::make_generator;
use crate::{Error, Result};

/// A nondecreasing vector in `{-1, +1}^{m+2}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignPattern {
    pub sigma: Vec<i8>,
}

impl SignPattern {
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }
}

impl std::fmt::Display for SignPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: String = self.sigma.iter().map(|&x| if x < 0 { '-' } else { '+' }).collect();
        write!(f, "({s})")
    }
}

/// The `m + 3` nondecreasing sign vectors of length `m + 2`, ordered by
/// decreasing number of minus signs.
pub fn sign_patterns(m: usize) -> Vec<SignPattern> {
    let len = m + 2;
    (0..=len)
        .rev()
        .map(|minus| SignPattern {
            sigma: (0..len).map(|i| if i < minus { -1 } else { 1 }).collect(),
        })
        .collect()
}

/// Maximizer of one convex subproblem.
#[derive(Clone, Debug, Serialize)]
pub struct ConoptSolution {
    pub value: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// `"barrier"` or `"search"`.
    pub method: String,
}

/// `V_sigma`: the maximum of `sum_j sigma_j (p_j - s q_j)` over pairs on
/// `m + 2` points satisfying the at-most constraints.
pub fn solve_conopt(
    sigma: &SignPattern,
    s: f64,
    constraints: &[ConstraintSpec],
    opts: &SolverOptions,
) -> Result<f64> {
    solve_conopt_detailed(sigma, s, constraints, opts).map(|r| r.value)
}

pub fn solve_conopt_detailed(
    sigma: &SignPattern,
    s: f64,
    constraints: &[ConstraintSpec],
    opts: &SolverOptions,
) -> Result<ConoptSolution> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::ParameterDomain(format!("s must be positive, got {s}")));
    }
    let mut dropped = Vec::new();
    let kept = prepare(constraints, Direction::AtMost, &mut dropped)?;
    let n = sigma.len();
    if n < 2 {
        return Err(Error::InvalidProblem("sign pattern needs at least 2 entries".into()));
    }
    let sig: Vec<f64> = sigma.sigma.iter().map(|&x| x as f64).collect();
    let c: Vec<f64> = sig.iter().copied().chain(sig.iter().map(|x| -s * x)).collect();

    let bcons: Vec<BarrierConstraint<'_>> = kept
        .iter()
        .map(|k| BarrierConstraint {
            generator: &k.generator,
            bound: k.bound,
        })
        .collect();
    let try_barrier = match opts.conopt_method {
        ConoptMethod::Search => false,
        ConoptMethod::Barrier => {
            if !barrier::applicable(&bcons) {
                return Err(Error::UnsupportedGenerator(
                    "barrier needs smooth constraint generators with positive bounds".into(),
                ));
            }
            true
        }
        ConoptMethod::Auto => barrier::applicable(&bcons),
    };
    if try_barrier {
        if let Some(b) = barrier::maximize_linear(&c, &bcons, n) {
            let pair = DiscretePair::from_parts(b.p.clone(), b.q.clone());
            if kept.iter().all(|k| k.is_satisfied_by(&pair, opts.feasibility_tol)) {
                return Ok(ConoptSolution {
                    value: b.value,
                    p: b.p,
                    q: b.q,
                    method: "barrier".into(),
                });
            }
        }
        if opts.conopt_method == ConoptMethod::Barrier {
            return Err(Error::InvalidProblem("barrier iterations stalled".into()));
        }
    }

    let objective = PairFunctional::Linear {
        p_coef: sig.clone(),
        q_coef: sig.iter().map(|x| -s * x).collect(),
    };
    let funcs: Vec<PairFunctional> = kept
        .iter()
        .map(|k| PairFunctional::Divergence(k.generator.clone()))
        .collect();
    let problem = search::Problem {
        objective: &objective,
        sense: Sense::Max,
        constraints: kept
            .iter()
            .zip(&funcs)
            .map(|(k, f)| search::Constraint {
                functional: f,
                bound: k.bound,
                direction: Direction::AtMost,
            })
            .collect(),
        n,
    };
    let out = search::search(&problem, opts)
        .ok_or_else(|| Error::InvalidProblem("no feasible point for a convex subproblem".into()))?;
    Ok(ConoptSolution {
        value: out.value.to_f64(),
        p: out.p,
        q: out.q,
        method: "search".into(),
    })
}

/// `A` for the primitive objective `u_s` through the sign-pattern
/// decomposition.
pub fn solve_a_primitive_convex(
    s: f64,
    constraints: &[ConstraintSpec],
    opts: &SolverOptions,
) -> Result<BoundResult> {
    opts.validate()?;
    let mut dropped = Vec::new();
    let kept = prepare(constraints, Direction::AtMost, &mut dropped)?;
    let m = kept.len();
    let mut best: Option<ConoptSolution> = None;
    let mut methods = Vec::new();
    for sigma in sign_patterns(m) {
        let sol = solve_conopt_detailed(&sigma, s, &kept, opts)?;
        methods.push(format!("{sigma}:{}", sol.method));
        if best.as_ref().is_none_or(|b| sol.value > b.value) {
            best = Some(sol);
        }
    }
    let best = best.expect("at least three sign patterns");
    let half = if opts.corrupt_half_factor { 1.0 } else { 0.5 };
    let value = -(s - 1.0).abs() / 2.0 + half * best.value;
    let pair = DiscretePair::from_parts(best.p, best.q);
    let objective = make_generator("primitive", &[s])?;
    let direct = crate::divergence::divergence(&objective, &pair);
    let max_violation = kept.iter().map(|c| c.violation(&pair)).fold(0.0, f64::max);
    Ok(BoundResult {
        value: ExtReal::Finite(value),
        argpair: Some(pair),
        n_used: m + 2,
        status: Status::Optimal,
        diagnostics: Diagnostics {
            method: "convex-decomposition".into(),
            max_violation,
            objective_residual: direct.abs_diff(ExtReal::Finite(value)),
            dropped_constraints: dropped,
            notes: methods,
            ..Diagnostics::default()
        },
    })
}

/// `min(A_H(H), A_KL(K)) - A_{H,KL}(H, K)` for the total variation objective.
#[derive(Clone, Debug, Serialize)]
pub struct Improvement {
    pub h: f64,
    pub k: f64,
    pub a_hellinger: f64,
    pub a_kl: f64,
    pub a_both: f64,
    /// Unclamped difference.
    pub raw: f64,
    /// `max(raw, 0)`.
    pub reported: f64,
}

pub fn improvement_over_pointwise_min(h: f64, k: f64, opts: &SolverOptions) -> Result<Improvement> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::ParameterDomain(format!("H must lie in [0, 1], got {h}")));
    }
    if !(k >= 0.0) {
        return Err(Error::ParameterDomain(format!("K must be nonnegative, got {k}")));
    }
    let hel = make_generator("hellinger", &[])?;
    let kl = make_generator("kl", &[])?;
    let ch = ConstraintSpec::at_most(hel, h);
    let ck = ConstraintSpec::at_most(kl, k);
    let solve = |cs: &[ConstraintSpec]| -> Result<f64> {
        Ok(solve_a_primitive_convex(1.0, cs, opts)?.value.to_f64())
    };
    let a_hellinger = solve(std::slice::from_ref(&ch))?;
    let a_kl = solve(std::slice::from_ref(&ck))?;
    let a_both = solve(&[ch, ck])?;
    let raw = a_hellinger.min(a_kl) - a_both;
    Ok(Improvement {
        h,
        k,
        a_hellinger,
        a_kl,
        a_both,
        raw,
        reported: raw.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_counts() {
        assert_eq!(sign_patterns(0).len(), 3);
        assert_eq!(sign_patterns(2).len(), 5);
        let p1: Vec<String> = sign_patterns(1).iter().map(|p| p.to_string()).collect();
        assert_eq!(p1, ["(---)", "(--+)", "(-++)", "(+++)"]);
    }

    #[test]
    fn telescoping_patterns() {
        let opts = SolverOptions::default();
        let hel = make_generator("hellinger", &[]).unwrap();
        let cs = [ConstraintSpec::at_most(hel, 0.3)];
        let pats = sign_patterns(1);
        let all_minus = solve_conopt(&pats[0], 0.7, &cs, &opts).unwrap();
        let all_plus = solve_conopt(&pats[3], 0.7, &cs, &opts).unwrap();
        assert!((all_plus - 0.3).abs() < 1e-6, "{all_plus}");
        assert!((all_minus + 0.3).abs() < 1e-6, "{all_minus}");
    }

    #[test]
    fn unconstrained_vertex_value() {
        let opts = SolverOptions::default();
        let v = solve_conopt(&sign_patterns(0)[1], 1.0, &[], &opts).unwrap();
        assert!((v - 2.0).abs() < 1e-6, "{v}");
        let r = solve_a_primitive_convex(1.0, &[], &opts).unwrap();
        assert!((r.value.to_f64() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn barrier_and_search_agree() {
        let hel = make_generator("hellinger", &[]).unwrap();
        let kl = make_generator("kl", &[]).unwrap();
        let cs = [ConstraintSpec::at_most(hel, 0.2), ConstraintSpec::at_most(kl, 0.3)];
        let mut ob = SolverOptions::default();
        ob.conopt_method = ConoptMethod::Barrier;
        let mut os = SolverOptions::default();
        os.conopt_method = ConoptMethod::Search;
        for sigma in sign_patterns(2) {
            let b = solve_conopt(&sigma, 1.3, &cs, &ob).unwrap();
            let s = solve_conopt(&sigma, 1.3, &cs, &os).unwrap();
            assert!((b - s).abs() < 1e-3, "{sigma}: barrier {b} search {s}");
        }
    }

    #[test]
    fn hellinger_closed_form() {
        let hel = make_generator("hellinger", &[]).unwrap();
        for h in [0.1, 0.4, 0.8] {
            let r = solve_a_primitive_convex(1.0, &[ConstraintSpec::at_most(hel.clone(), h)], &SolverOptions::default())
                .unwrap();
            let exact = (2.0 * h - h * h).sqrt();
            assert!((r.value.to_f64() - exact).abs() < 1e-5, "{h}: {} vs {exact}", r.value);
            assert!(r.diagnostics.max_violation <= 1e-9);
        }
    }
}
