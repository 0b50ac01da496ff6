//! Log-barrier path following for linear objectives over
//! `{(p, q) in P_n x P_n : D_{f_i}(P||Q) <= D_i}`.
//!
//! Minimizes `-t c.x - sum log(D_i - D_i(x)) - sum log x_j` subject to
//! `sum p = sum q = 1` by damped Newton steps on the equality-constrained
//! KKT system, for `t = 10^k`, `k = 0..8`. Gradients and Hessians of the
//! divergence terms come from the generators' analytic `f'` and `f''`.

use nalgebra::{DMatrix, DVector};

use crate::generators::Generator;

pub(crate) struct BarrierConstraint<'a> {
    pub generator: &'a Generator,
    pub bound: f64,
}

pub(crate) struct BarrierSolution {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub value: f64,
}

const T_SCHEDULE: std::ops::RangeInclusive<i32> = 0..=8;
const MAX_INNER: usize = 200;
// Newton decrement tolerance per unit of `1 + t`: the barrier function is of
// order `t`, so rounding noise in the decrement grows with it.
const DECREMENT_TOL: f64 = 1e-9;

/// Whether every constraint can be handled by the barrier: smooth
/// generators and strictly positive bounds.
pub(crate) fn applicable(constraints: &[BarrierConstraint<'_>]) -> bool {
    constraints
        .iter()
        .all(|c| c.bound > 0.0 && c.bound.is_finite() && c.generator.is_smooth())
}

struct Eval {
    value: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

/// `D(x)` with gradient and Hessian; `x` strictly positive.
fn divergence_derivatives(g: &Generator, x: &[f64], n: usize) -> Option<Eval> {
    let mut value = 0.0;
    let mut grad = DVector::zeros(2 * n);
    let mut hess = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        let (a, b) = (x[j], x[n + j]);
        let r = a / b;
        let f = g.eval(r);
        let f1 = g.derivative(r)?;
        let f2 = g.second_derivative(r)?;
        value += b * f;
        grad[j] = f1;
        grad[n + j] = f - r * f1;
        let h = f2 / b;
        hess[(j, j)] = h;
        hess[(j, n + j)] = -r * h;
        hess[(n + j, j)] = -r * h;
        hess[(n + j, n + j)] = r * r * h;
    }
    value.is_finite().then_some(Eval { value, grad, hess })
}

fn barrier_value(
    c: &[f64],
    t: f64,
    constraints: &[BarrierConstraint<'_>],
    x: &[f64],
    n: usize,
) -> Option<f64> {
    let mut v = -t * c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    for &xi in x {
        if !(xi > 0.0) {
            return None;
        }
        v -= xi.ln();
    }
    for k in constraints {
        let d: f64 = (0..n)
            .map(|j| x[n + j] * k.generator.eval(x[j] / x[n + j]))
            .sum();
        let slack = k.bound - d;
        if !(slack > 0.0) {
            return None;
        }
        v -= slack.ln();
    }
    v.is_finite().then_some(v)
}

/// Rescale both halves to unit mass. The KKT solve keeps the sums fixed only
/// up to its conditioning, which is poor near the boundary.
fn normalize(x: &mut [f64], n: usize) {
    let (ps, qs): (f64, f64) = (x[..n].iter().sum(), x[n..].iter().sum());
    x[..n].iter_mut().for_each(|v| *v /= ps);
    x[n..].iter_mut().for_each(|v| *v /= qs);
}

/// Maximize `c . (p, q)`; `c` has length `2n`. `None` when Newton stalls.
pub(crate) fn maximize_linear(
    c: &[f64],
    constraints: &[BarrierConstraint<'_>],
    n: usize,
) -> Option<BarrierSolution> {
    let dim = 2 * n;
    let mut x = vec![1.0 / n as f64; dim];
    for k in T_SCHEDULE {
        let t = 10f64.powi(k);
        let mut converged = false;
        for _ in 0..MAX_INNER {
            let mut grad = DVector::from_iterator(dim, c.iter().map(|ci| -t * ci));
            let mut hess = DMatrix::<f64>::zeros(dim, dim);
            for (i, &xi) in x.iter().enumerate() {
                grad[i] -= 1.0 / xi;
                hess[(i, i)] += 1.0 / (xi * xi);
            }
            for con in constraints {
                let e = divergence_derivatives(con.generator, &x, n)?;
                let slack = con.bound - e.value;
                if !(slack > 0.0) {
                    return None;
                }
                grad += &e.grad / slack;
                hess += &e.hess / slack + (&e.grad * e.grad.transpose()) / (slack * slack);
            }
            // KKT system with rows enforcing sum p = sum q = const.
            let mut kkt = DMatrix::<f64>::zeros(dim + 2, dim + 2);
            kkt.view_mut((0, 0), (dim, dim)).copy_from(&hess);
            for j in 0..n {
                kkt[(j, dim)] = 1.0;
                kkt[(dim, j)] = 1.0;
                kkt[(n + j, dim + 1)] = 1.0;
                kkt[(dim + 1, n + j)] = 1.0;
            }
            let mut rhs = DVector::<f64>::zeros(dim + 2);
            rhs.rows_mut(0, dim).copy_from(&(-&grad));
            let sol = kkt.lu().solve(&rhs)?;
            let dx: Vec<f64> = sol.rows(0, dim).iter().copied().collect();
            if dx.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let slope: f64 = grad.iter().zip(&dx).map(|(g, d)| g * d).sum();
            let decrement = -slope;
            if decrement < DECREMENT_TOL * (1.0 + t) {
                converged = true;
                break;
            }
            let f0 = barrier_value(c, t, constraints, &x, n)?;
            let mut alpha = 1.0;
            let mut moved = false;
            for _ in 0..80 {
                let mut trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + alpha * d).collect();
                normalize(&mut trial, n);
                if let Some(f1) = barrier_value(c, t, constraints, &trial, n) {
                    if f1 <= f0 + 0.25 * alpha * slope {
                        x = trial;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                // No representable decrease: the iterate is as good as floating
                // point allows at this t.
                converged = decrement < 1e-6 * (1.0 + t);
                break;
            }
        }
        if !converged {
            return None;
        }
    }
    let p = x[..n].to_vec();
    let q = x[n..].to_vec();
    let value = c[..n].iter().zip(&p).map(|(a, b)| a * b).sum::<f64>()
        + c[n..].iter().zip(&q).map(|(a, b)| a * b).sum::<f64>();
    Some(BarrierSolution {
        p,
        q,
        value,
    })
}
