//! Deterministic coarse-to-fine search over `P_n x P_n`.
//!
//! 1. A lattice with step `1/K` on both simplices, including every boundary
//!    face (coordinates exactly `0`). Divergence terms are tabulated once per
//!    lattice value pair, so a lattice point costs `n` lookups per functional.
//! 2. Refinement rounds: a product grid on the `2(n-1)` free coordinates in a
//!    box around the incumbent, shrinking geometrically.
//! 3. Polish: pattern search over mass transfers between coordinates of `p`,
//!    of `q`, or both, with step halving. Trial points that violate the
//!    constraints are pulled back to the constraint boundary along the line
//!    `(Q + lambda (P - Q), Q)`, on which every divergence is monotone in
//!    `lambda >= 0`.

use std::cmp::Ordering;

use crate::engine::functional::PairFunctional;
use crate::engine::{Direction, Sense, SolverOptions};
use crate::ext::ExtReal;
use crate::par::argbest;

pub(crate) struct Constraint<'a> {
    pub functional: &'a PairFunctional,
    pub bound: f64,
    pub direction: Direction,
}

pub(crate) struct Problem<'a> {
    pub objective: &'a PairFunctional,
    pub sense: Sense,
    pub constraints: Vec<Constraint<'a>>,
    pub n: usize,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct SearchStats {
    pub lattice_k: usize,
    pub lattice_points: usize,
    pub refine_rounds: usize,
    pub refine_points: usize,
    pub polish_moves: usize,
    pub evaluations: u64,
}

pub(crate) struct SearchOutcome {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub value: ExtReal,
    pub stats: SearchStats,
}

impl<'a> Problem<'a> {
    #[inline]
    fn satisfied(&self, c: &Constraint<'_>, v: ExtReal) -> bool {
        match c.direction {
            Direction::AtMost => v <= c.bound,
            Direction::AtLeast => v >= c.bound,
        }
    }

    pub fn feasible(&self, p: &[f64], q: &[f64]) -> bool {
        self.constraints
            .iter()
            .all(|c| self.satisfied(c, c.functional.eval(p, q)))
    }

    /// Objective value if `(p, q)` is feasible.
    pub fn evaluate(&self, p: &[f64], q: &[f64]) -> Option<ExtReal> {
        self.feasible(p, q).then(|| self.objective.eval(p, q))
    }

    /// `Greater` when `a` is the better objective value.
    #[inline]
    pub fn compare(&self, a: &ExtReal, b: &ExtReal) -> Ordering {
        match self.sense {
            Sense::Max => a.total_cmp(b),
            Sense::Min => b.total_cmp(a),
        }
    }

    fn strictly_better(&self, cand: ExtReal, cur: ExtReal) -> bool {
        let margin = match (cand, cur) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => 1e-15 * (1.0 + a.abs().max(b.abs())),
            _ => 0.0,
        };
        match self.sense {
            Sense::Max => cand > cur + margin,
            Sense::Min => cand + margin < cur,
        }
    }

    fn all_at_most(&self) -> bool {
        self.constraints.iter().all(|c| c.direction == Direction::AtMost)
    }

    /// Pull an infeasible trial back to feasibility along `Q + lambda (P - Q)`.
    fn restore(&self, p: &[f64], q: &[f64], stats: &mut SearchStats) -> Option<Vec<f64>> {
        // Clipping at zero can break normalization, so renormalize.
        let point = |lambda: f64| -> Vec<f64> {
            let mut v: Vec<f64> = p
                .iter()
                .zip(q)
                .map(|(&a, &b)| {
                    let v = if lambda <= 1.0 {
                        lambda * a + (1.0 - lambda) * b
                    } else {
                        b + lambda * (a - b)
                    };
                    v.max(0.0)
                })
                .collect();
            let total: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= total);
            v
        };
        const ITERS: usize = 60;
        if self.all_at_most() {
            // lambda = 0 gives p = q, feasible for nonnegative bounds.
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..ITERS {
                let mid = 0.5 * (lo + hi);
                stats.evaluations += 1;
                if self.feasible(&point(mid), q) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let out = point(lo);
            stats.evaluations += 1;
            self.feasible(&out, q).then_some(out)
        } else {
            // Largest lambda keeping Q + lambda (P - Q) >= 0.
            let mut lambda_max = f64::INFINITY;
            for (&a, &b) in p.iter().zip(q) {
                if a < b {
                    lambda_max = lambda_max.min(b / (b - a));
                }
            }
            if !lambda_max.is_finite() {
                return None;
            }
            stats.evaluations += 1;
            if !self.feasible(&point(lambda_max), q) {
                return None;
            }
            let (mut lo, mut hi) = (1.0, lambda_max);
            for _ in 0..ITERS {
                let mid = 0.5 * (lo + hi);
                stats.evaluations += 1;
                if self.feasible(&point(mid), q) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(point(hi))
        }
    }
}

/// All compositions of `k` into `n` nonnegative parts, in lexicographic order,
/// flattened row-major.
pub(crate) fn compositions(n: usize, k: usize) -> Vec<u16> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<u16>, out: &mut Vec<u16>) {
        if prefix.len() == n - 1 {
            out.extend_from_slice(prefix);
            out.push(left as u16);
            return;
        }
        for a in 0..=left {
            prefix.push(a as u16);
            rec(n, left - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    rec(n, k, &mut prefix, &mut out);
    out
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r *= (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Lattice resolution: `1 / grid_step`, reduced until the number of lattice
/// pairs fits `max_pairs`.
pub(crate) fn lattice_resolution(n: usize, grid_step: f64, max_pairs: usize) -> usize {
    let mut k = (1.0 / grid_step).round().max(1.0) as usize;
    while k > 1 {
        let c = binomial(k + n - 1, n - 1);
        if c * c <= max_pairs as f64 {
            break;
        }
        k -= 1;
    }
    k
}

struct Table {
    per_coordinate: bool,
    side: usize,
    data: Vec<f64>,
}

impl Table {
    fn new(f: &PairFunctional, n: usize, k: usize) -> Table {
        let side = k + 1;
        let per_coordinate = f.coordinate_dependent();
        let blocks = if per_coordinate { n } else { 1 };
        let mut data = Vec::with_capacity(blocks * side * side);
        for j in 0..blocks {
            for a in 0..side {
                for b in 0..side {
                    let v = f.term(j, a as f64 / k as f64, b as f64 / k as f64);
                    data.push(v.to_f64());
                }
            }
        }
        Table {
            per_coordinate,
            side,
            data,
        }
    }

    #[inline]
    fn sum(&self, pa: &[u16], qa: &[u16]) -> f64 {
        let s2 = self.side * self.side;
        let mut acc = 0.0;
        for j in 0..pa.len() {
            let base = if self.per_coordinate { j * s2 } else { 0 };
            acc += self.data[base + pa[j] as usize * self.side + qa[j] as usize];
        }
        acc
    }
}

fn lattice(problem: &Problem<'_>, opts: &SolverOptions, stats: &mut SearchStats) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = problem.n;
    let k = lattice_resolution(n, opts.grid_step, opts.max_lattice_pairs);
    let comps = compositions(n, k);
    let count = comps.len() / n;
    let obj = Table::new(problem.objective, n, k);
    let cons: Vec<(Table, f64, Direction)> = problem
        .constraints
        .iter()
        .map(|c| (Table::new(c.functional, n, k), c.bound, c.direction))
        .collect();
    let total = count * count;
    stats.lattice_k = k;
    stats.lattice_points = total;
    stats.evaluations += total as u64;

    let eval = |i: usize| -> Option<f64> {
        let (a, b) = (i / count, i % count);
        let pa = &comps[a * n..(a + 1) * n];
        let qa = &comps[b * n..(b + 1) * n];
        for (t, bound, dir) in &cons {
            let v = t.sum(pa, qa);
            let ok = match dir {
                Direction::AtMost => v <= *bound,
                Direction::AtLeast => v >= *bound,
            };
            if !ok {
                return None;
            }
        }
        Some(obj.sum(pa, qa))
    };
    let sense = problem.sense;
    let cmp = move |x: &f64, y: &f64| match sense {
        Sense::Max => x.total_cmp(y),
        Sense::Min => y.total_cmp(x),
    };
    let (best, _) = argbest(total, eval, cmp)?;
    let (a, b) = (best / count, best % count);
    let to_probs = |c: usize| -> Vec<f64> {
        comps[c * n..(c + 1) * n]
            .iter()
            .map(|&x| x as f64 / k as f64)
            .collect()
    };
    Some((to_probs(a), to_probs(b)))
}

/// Values of one refinement axis: `center + w * linspace(-1, 1, points)`,
/// clamped to `[0, 1]` and deduplicated.
fn axis_values(center: f64, w: f64, points: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..points)
        .map(|i| {
            let t = if points == 1 {
                0.0
            } else {
                2.0 * i as f64 / (points - 1) as f64 - 1.0
            };
            if t == 0.0 {
                center
            } else {
                (center + w * t).clamp(0.0, 1.0)
            }
        })
        .collect();
    v.dedup();
    v
}

/// Points per axis for a `dims`-dimensional product grid within `budget`.
fn points_per_axis(requested: usize, dims: usize, budget: usize) -> usize {
    let mut k = requested.max(3);
    while k > 3 && (k as f64).powi(dims as i32) > budget as f64 {
        k -= 1;
    }
    if k % 2 == 0 {
        k -= 1;
    }
    k
}

fn complete(free: &[f64]) -> Option<Vec<f64>> {
    let s: f64 = free.iter().sum();
    let mut last = 1.0 - s;
    if last < 0.0 {
        if last < -1e-15 {
            return None;
        }
        last = 0.0;
    }
    let mut v = free.to_vec();
    v.push(last);
    Some(v)
}

fn refine(
    problem: &Problem<'_>,
    p: &mut Vec<f64>,
    q: &mut Vec<f64>,
    value: &mut ExtReal,
    opts: &SolverOptions,
    stats: &mut SearchStats,
) {
    let n = problem.n;
    let dims = 2 * (n - 1);
    let points = points_per_axis(opts.refine_points, dims, opts.max_refine_points);
    let coarse = 1.0 / stats.lattice_k.max(1) as f64;
    let mut w = (0.5 * opts.refine_shrink).max(coarse);
    for _ in 0..opts.refine_rounds {
        let axes: Vec<Vec<f64>> = p[..n - 1]
            .iter()
            .chain(q[..n - 1].iter())
            .map(|&c| axis_values(c, w, points))
            .collect();
        let total: usize = axes.iter().map(Vec::len).product();
        stats.refine_rounds += 1;
        stats.refine_points += total;
        stats.evaluations += total as u64;
        let build = |mut idx: usize| -> Option<(Vec<f64>, Vec<f64>)> {
            let mut coords = Vec::with_capacity(dims);
            for ax in &axes {
                coords.push(ax[idx % ax.len()]);
                idx /= ax.len();
            }
            let pp = complete(&coords[..n - 1])?;
            let qq = complete(&coords[n - 1..])?;
            Some((pp, qq))
        };
        let eval = |i: usize| -> Option<ExtReal> {
            let (pp, qq) = build(i)?;
            problem.evaluate(&pp, &qq)
        };
        if let Some((best, v)) = argbest(total, eval, |a, b| problem.compare(a, b)) {
            if problem.strictly_better(v, *value) {
                let (pp, qq) = build(best).expect("winner was buildable");
                *p = pp;
                *q = qq;
                *value = v;
            }
        }
        w *= opts.refine_shrink;
    }
}

fn transfer(v: &mut [f64], from: usize, to: usize, amount: f64) -> bool {
    let m = amount.min(v[from]);
    if m <= 0.0 {
        return false;
    }
    v[from] -= m;
    v[to] += m;
    if v[from] < 0.0 {
        v[from] = 0.0;
    }
    true
}

/// Ratios of the `q` step to the `p` step tried for simultaneous transfers.
/// Unequal ratios let the polish follow ridges where two coordinates share
/// the likelihood ratio `p_j / q_j`.
const COMBINED_SCALES: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

fn polish(
    problem: &Problem<'_>,
    p: &mut Vec<f64>,
    q: &mut Vec<f64>,
    value: &mut ExtReal,
    opts: &SolverOptions,
    stats: &mut SearchStats,
) {
    const MAX_SWEEPS: usize = 200;
    let n = problem.n;
    let mut moves: Vec<Option<(usize, usize)>> = vec![None];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                moves.push(Some((i, j)));
            }
        }
    }
    let constrained = !problem.constraints.is_empty();
    let mut delta = opts.polish_initial_step;
    let min_step = opts.polish_min_step();
    while delta >= min_step {
        for _ in 0..MAX_SWEEPS {
            let mut best: Option<(ExtReal, Vec<f64>, Vec<f64>)> = None;
            for mp in &moves {
                for mq in &moves {
                    let scales: &[f64] = if mp.is_some() && mq.is_some() {
                        &COMBINED_SCALES
                    } else if mp.is_some() || mq.is_some() {
                        &[1.0]
                    } else {
                        &[]
                    };
                    for &scale in scales {
                        let mut tp = p.clone();
                        let mut tq = q.clone();
                        let mut changed = false;
                        if let Some((i, j)) = *mp {
                            changed |= transfer(&mut tp, i, j, delta);
                        }
                        if let Some((i, j)) = *mq {
                            changed |= transfer(&mut tq, i, j, delta * scale);
                        }
                        if !changed {
                            continue;
                        }
                        stats.evaluations += 1;
                        let (cand_p, cand_v) = if problem.feasible(&tp, &tq) {
                            let v = problem.objective.eval(&tp, &tq);
                            (tp, v)
                        } else if constrained {
                            match problem.restore(&tp, &tq, stats) {
                                Some(rp) => {
                                    let v = problem.objective.eval(&rp, &tq);
                                    (rp, v)
                                }
                                None => continue,
                            }
                        } else {
                            continue;
                        };
                        let incumbent = best.as_ref().map_or(*value, |b| b.0);
                        if problem.strictly_better(cand_v, incumbent) {
                            best = Some((cand_v, cand_p, tq));
                        }
                    }
                }
            }
            match best {
                Some((v, bp, bq)) => {
                    *p = bp;
                    *q = bq;
                    *value = v;
                    stats.polish_moves += 1;
                    if v.is_infinite() && problem.sense == Sense::Max {
                        return;
                    }
                }
                None => break,
            }
        }
        delta *= 0.5;
    }
}

/// Run the full search. `None` when no lattice point is feasible.
pub(crate) fn search(problem: &Problem<'_>, opts: &SolverOptions) -> Option<SearchOutcome> {
    let mut stats = SearchStats::default();
    let (mut p, mut q) = lattice(problem, opts, &mut stats)?;
    let mut value = problem.objective.eval(&p, &q);
    let unbounded = value.is_infinite() && problem.sense == Sense::Max;
    if !unbounded {
        refine(problem, &mut p, &mut q, &mut value, opts, &mut stats);
        if opts.polish {
            polish(problem, &mut p, &mut q, &mut value, opts, &mut stats);
        }
    }
    // Recompute from the final coordinates so value and argpair agree exactly.
    let value = problem.objective.eval(&p, &q);
    debug_assert!(problem.feasible(&p, &q));
    Some(SearchOutcome { p, q, value, stats })
}
