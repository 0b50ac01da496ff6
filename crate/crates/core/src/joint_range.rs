//! Sampled joint ranges `{(D_{f_1}(P||Q), ..., D_{f_m}(P||Q))}`.
//!
//! The joint range over all pairs equals the joint range over pairs on
//! `m + 2` points, so clouds drawn on small supports already cover it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::divergence::divergence_slices;
use crate::engine::{solve_a, solve_b, ConstraintSpec, SolverOptions};
use crate::ext::{fmt17, ExtReal};
use crate::generators::Generator;
use crate::par::map_indexed;
use crate::{Error, Result};

/// Samples per independently seeded chunk.
const CHUNK: usize = 1024;
/// Probability of zeroing one coordinate of a sampled vector.
const ZERO_PROB: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangePoint {
    pub values: Vec<ExtReal>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RangeCloud {
    pub generators: Vec<Generator>,
    /// Sorted by value vector, then by source pair.
    pub points: Vec<RangePoint>,
    pub n_used: usize,
    pub seed: u64,
    pub count: usize,
}

fn simplex_sample<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    if rng.random::<f64>() < ZERO_PROB {
        let j = rng.random_range(0..n);
        v[j] = 0.0;
    }
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    } else {
        v = vec![1.0 / n as f64; n];
    }
    v
}

fn point(gs: &[Generator], p: Vec<f64>, q: Vec<f64>) -> RangePoint {
    RangePoint {
        values: gs.iter().map(|g| divergence_slices(g, &p, &q)).collect(),
        p,
        q,
    }
}

fn cmp_points(a: &RangePoint, b: &RangePoint) -> std::cmp::Ordering {
    let by_values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne());
    by_values
        .or_else(|| {
            a.p.iter()
                .chain(&a.q)
                .zip(b.p.iter().chain(&b.q))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
        })
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// `count` random pairs on `n` points plus the corners `p = q` and a
/// mutually singular pair.
///
/// Chunk `c` of the samples is drawn from ChaCha8 stream `c` under `seed`,
/// and the cloud is sorted, so the result does not depend on the number of
/// worker threads.
pub fn sample_joint_range(gs: &[Generator], n: usize, count: usize, seed: u64) -> Result<RangeCloud> {
    if n < 2 {
        return Err(Error::InvalidProblem(format!("support size must be at least 2, got {n}")));
    }
    if count < 1 {
        return Err(Error::InvalidProblem("count must be at least 1".into()));
    }
    if gs.is_empty() {
        return Err(Error::InvalidProblem("at least one generator is required".into()));
    }
    let chunks = count.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<RangePoint>> = map_indexed(chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let len = CHUNK.min(count - c * CHUNK);
        (0..len)
            .map(|_| {
                let p = simplex_sample(&mut rng, n);
                let q = simplex_sample(&mut rng, n);
                point(gs, p, q)
            })
            .collect()
    });
    let mut points: Vec<RangePoint> = per_chunk.into_iter().flatten().collect();
    let uniform = vec![1.0 / n as f64; n];
    points.push(point(gs, uniform.clone(), uniform));
    let mut e0 = vec![0.0; n];
    e0[0] = 1.0;
    let mut e1 = vec![0.0; n];
    e1[1] = 1.0;
    points.push(point(gs, e0, e1));
    points.sort_by(cmp_points);
    Ok(RangeCloud {
        generators: gs.to_vec(),
        points,
        n_used: n,
        seed,
        count,
    })
}

impl RangeCloud {
    pub fn m(&self) -> usize {
        self.generators.len()
    }

    /// Header `d1..dm,p1..pn,q1..qn`, one row per point, `inf` for `+inf`.
    pub fn to_csv(&self) -> String {
        let m = self.m();
        let n = self.n_used;
        let mut header: Vec<String> = (1..=m).map(|i| format!("d{i}")).collect();
        header.extend((1..=n).map(|i| format!("p{i}")));
        header.extend((1..=n).map(|i| format!("q{i}")));
        let mut out = header.join(",");
        out.push('\n');
        for pt in &self.points {
            let row: Vec<String> = pt
                .values
                .iter()
                .map(|v| fmt17(v.to_f64()))
                .chain(pt.p.iter().chain(&pt.q).map(|&x| fmt17(x)))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    /// Index into the cloud's points.
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct EnvelopeReport {
    pub abscissae: Vec<f64>,
    pub upper: Vec<ExtReal>,
    pub lower: Vec<ExtReal>,
    pub checked: usize,
    /// Points with an infinite coordinate, which the envelopes do not cover.
    pub skipped: usize,
    /// Points the bracketing abscissae could not decide.
    pub exact_solves: usize,
    pub violations: Vec<Violation>,
}

/// Number of envelope abscissae.
pub const ENVELOPE_POINTS: usize = 64;

/// Indices `(i, j)` of the abscissae bracketing `x`, `xs[i] <= x <= xs[j]`.
fn bracket(xs: &[f64], x: f64) -> (usize, usize) {
    let last = xs.len() - 1;
    if x <= xs[0] {
        return (0, 0);
    }
    if x >= xs[last] {
        return (last, last);
    }
    let i = xs.partition_point(|&a| a <= x) - 1;
    if xs[i] == x {
        (i, i)
    } else {
        (i, i + 1)
    }
}

/// Check that every point `(x, y)` of a two-generator cloud lies between the
/// engine's envelopes, `B(x) - tol <= y <= A(x) + tol`, where `y` is the
/// coordinate `objective` and `x` the other one. Envelopes are solved at
/// [`ENVELOPE_POINTS`] abscissae. Both are nondecreasing in `x`, so a point
/// between two abscissae is settled by their values when they decide it and
/// by an exact solve at its own `x` otherwise. No interpolation is involved,
/// since the envelopes may be concave or convex.
pub fn envelope_check(cloud: &RangeCloud, objective: usize, opts: &SolverOptions, tol: f64) -> Result<EnvelopeReport> {
    if cloud.m() != 2 {
        return Err(Error::InvalidProblem(format!(
            "envelope checks need two generators, got {}",
            cloud.m()
        )));
    }
    if objective > 1 {
        return Err(Error::IndexOutOfRange(format!("objective index {objective} not in 0..2")));
    }
    if cloud.points.is_empty() {
        return Ok(EnvelopeReport::default());
    }
    let other = 1 - objective;
    let obj = &cloud.generators[objective];
    let con = &cloud.generators[other];
    let x_max = match con.max_divergence_value() {
        ExtReal::Finite(v) => v,
        ExtReal::PosInf => cloud
            .points
            .iter()
            .filter_map(|pt| pt.values[other].finite())
            .fold(0.0, f64::max),
    };
    let xs: Vec<f64> = (0..ENVELOPE_POINTS)
        .map(|i| x_max * i as f64 / (ENVELOPE_POINTS - 1) as f64)
        .collect();
    let mut upper = Vec::with_capacity(xs.len());
    let mut lower = Vec::with_capacity(xs.len());
    let solve_upper = |x: f64| -> Result<ExtReal> { Ok(solve_a(obj, &[ConstraintSpec::at_most(con.clone(), x)], opts)?.value) };
    let solve_lower = |x: f64| -> Result<ExtReal> {
        match solve_b(obj, &[ConstraintSpec::at_least(con.clone(), x)], opts) {
            Ok(r) => Ok(r.value),
            Err(Error::UnsupportedCase(_)) => Ok(ExtReal::ZERO),
            Err(e) => Err(e),
        }
    };
    for &x in &xs {
        upper.push(solve_upper(x)?);
        lower.push(solve_lower(x)?);
    }
    let mut report = EnvelopeReport {
        abscissae: xs.clone(),
        upper: upper.clone(),
        lower: lower.clone(),
        ..EnvelopeReport::default()
    };
    for (index, pt) in cloud.points.iter().enumerate() {
        let (ExtReal::Finite(x), ExtReal::Finite(y)) = (pt.values[other], pt.values[objective]) else {
            report.skipped += 1;
            continue;
        };
        report.checked += 1;
        let (i, j) = bracket(&xs, x);
        let a = if y <= upper[i].to_f64() + tol {
            upper[i].to_f64()
        } else if y > upper[j].to_f64() + tol {
            upper[j].to_f64()
        } else {
            report.exact_solves += 1;
            solve_upper(x)?.to_f64()
        };
        let b = if y >= lower[j].to_f64() - tol {
            lower[j].to_f64()
        } else if y < lower[i].to_f64() - tol {
            lower[i].to_f64()
        } else {
            report.exact_solves += 1;
            solve_lower(x)?.to_f64()
        };
        if y > a + tol || y < b - tol {
            report.violations.push(Violation {
                index,
                x,
                y,
                lower: b,
                upper: a,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::make_generator;

    #[test]
    fn corners_present_and_sorted() {
        let gs = [make_generator("tv", &[]).unwrap(), make_generator("hellinger", &[]).unwrap()];
        let c = sample_joint_range(&gs, 3, 50, 7).unwrap();
        assert_eq!(c.points.len(), 52);
        assert_eq!(c.points[0].values, vec![ExtReal::ZERO, ExtReal::ZERO]);
        assert!(c
            .points
            .iter()
            .any(|p| p.values == vec![ExtReal::Finite(1.0), ExtReal::Finite(1.0)]));
        assert!(c.points.windows(2).all(|w| cmp_points(&w[0], &w[1]).is_le()));
    }

    #[test]
    fn deterministic_for_seed() {
        let gs = [make_generator("kl", &[]).unwrap()];
        let a = sample_joint_range(&gs, 4, 3000, 11).unwrap();
        let b = sample_joint_range(&gs, 4, 3000, 11).unwrap();
        assert_eq!(a.points, b.points);
        let c = sample_joint_range(&gs, 4, 3000, 12).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn csv_header_and_inf() {
        let gs = [make_generator("kl", &[]).unwrap()];
        let c = sample_joint_range(&gs, 2, 1, 0).unwrap();
        let csv = c.to_csv();
        assert!(csv.starts_with("d1,p1,p2,q1,q2\n"));
        assert!(csv.contains("inf,"));
    }

    #[test]
    fn empty_report_for_empty_cloud() {
        let gs = vec![make_generator("tv", &[]).unwrap(), make_generator("hellinger", &[]).unwrap()];
        let cloud = RangeCloud {
            generators: gs,
            points: Vec::new(),
            n_used: 3,
            seed: 0,
            count: 0,
        };
        let r = envelope_check(&cloud, 1, &SolverOptions::default(), 1e-2).unwrap();
        assert!(r.violations.is_empty());
        assert_eq!(r.checked, 0);
    }
}
