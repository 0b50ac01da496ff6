//! Analytic special cases of the bounds.
//!
//! These are independent of the search engine and serve both as fast paths
//! and as references for it.

use serde::Serialize;

use crate::ext::ExtReal;
use crate::generators::{make_generator, Generator};
use crate::{Error, Result};

/// Value of a closed-form bound, with the optimizing parameter when the
/// formula is variational.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormResult {
    pub value: ExtReal,
    pub parameter: Option<f64>,
    pub formula: String,
}

const GOLDEN_TOL: f64 = 1e-12;
const SCAN_STEP: f64 = 1e-6;
const CERT_POINTS: usize = 201;

fn to_f64(v: ExtReal) -> f64 {
    v.to_f64()
}

/// Minimize a unimodal `f` on `[a, b]` by golden-section search; the returned
/// point is the best of the final bracket and both endpoints.
fn golden_min<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > GOLDEN_TOL * (1.0 + lo.abs()) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Grid minimum at spacing `step`, then golden-section inside the
/// neighbouring cells.
fn scan_min<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, step: f64) -> (f64, f64) {
    let cells = ((b - a) / step).ceil().max(1.0) as usize;
    let at = |i: usize| if i == cells { b } else { a + (b - a) * i as f64 / cells as f64 };
    let mut best = (0usize, f(a));
    for i in 1..=cells {
        let v = f(at(i));
        if v < best.1 {
            best = (i, v);
        }
    }
    let lo = at(best.0.saturating_sub(1));
    let hi = at((best.0 + 1).min(cells));
    let polished = golden_min(f, lo, hi);
    if polished.1 < best.1 {
        polished
    } else {
        (at(best.0), best.1)
    }
}

/// Whether `f` looks convex on `[a, b]` from second differences on a uniform
/// grid. Infinite values are allowed only at the endpoints.
fn convex_on_grid<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> bool {
    let xs: Vec<f64> = (0..CERT_POINTS)
        .map(|i| a + (b - a) * i as f64 / (CERT_POINTS - 1) as f64)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    for w in ys.windows(3) {
        if !w[1].is_finite() {
            return false;
        }
        if w[0].is_finite() && w[2].is_finite() {
            let scale = 1.0 + w[0].abs().max(w[1].abs()).max(w[2].abs());
            if w[0] + w[2] - 2.0 * w[1] < -1e-12 * scale {
                return false;
            }
        }
    }
    true
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::ParameterDomain(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// `T(q, V) = (1 - q) f((1 - V - q) / (1 - q)) + q f((q + V) / q)`, the
/// divergence of the two-point pair `P = (1 - V - q, q + V)`,
/// `Q = (1 - q, q)`, with boundary limits.
pub fn gilardoni_t(g: &Generator, q: f64, v: f64) -> ExtReal {
    g.perspective(1.0 - v - q, 1.0 - q) + g.perspective(q + v, q)
}

/// `B(V) = inf { D_f : TV >= V } = inf_{0 <= q <= 1 - V} T(q, V)`.
pub fn gilardoni_b_tv(g: &Generator, v: f64) -> Result<ClosedFormResult> {
    check_unit("V", v)?;
    let formula = "gilardoni".to_string();
    if v == 0.0 {
        return Ok(ClosedFormResult {
            value: ExtReal::ZERO,
            parameter: Some(0.5),
            formula,
        });
    }
    let t = |q: f64| to_f64(gilardoni_t(g, q, v));
    let hi = 1.0 - v;
    let (q, val) = if hi <= 0.0 {
        (0.0, t(0.0))
    } else if convex_on_grid(&t, 0.0, hi) {
        golden_min(&t, 0.0, hi)
    } else {
        scan_min(&t, 0.0, hi, SCAN_STEP)
    };
    Ok(ClosedFormResult {
        value: ExtReal::from_f64(val).unwrap_or(ExtReal::PosInf),
        parameter: Some(q),
        formula,
    })
}

/// `(1 - V) f((1 + V) / (1 - V))` for symmetric generators; at `V = 1` this
/// is the limit `2 f'(inf) = f(0) + f'(inf)`.
pub fn symmetric_b_tv(g: &Generator, v: f64) -> Result<ExtReal> {
    check_unit("V", v)?;
    if !g.is_symmetric() {
        return Err(Error::UnsupportedGenerator(format!(
            "'{}' is not symmetric",
            g.name()
        )));
    }
    Ok(g.perspective(1.0 + v, 1.0 - v))
}

/// `inf { D_f : D_{u_s} >= D }` as a one-dimensional infimum over
/// `q in [0, H / s]` with `H = min(1, s) - D`. Minimized by a dense scan at
/// step `1e-6` and a golden-section polish.
pub fn primitive_constraint_b(g: &Generator, s: f64, d: f64) -> Result<ClosedFormResult> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::ParameterDomain(format!("s must be positive, got {s}")));
    }
    let cap = s.min(1.0);
    if !(0.0..=cap).contains(&d) {
        return Err(Error::ParameterDomain(format!("D must lie in [0, {cap}], got {d}")));
    }
    if s == 1.0 {
        let mut r = gilardoni_b_tv(g, d)?;
        r.formula = "primitive-constraint".into();
        return Ok(r);
    }
    let h = cap - d;
    let obj = |q: f64| to_f64(g.perspective(h - q * s, 1.0 - q) + g.perspective(1.0 + q * s - h, q));
    let hi = h / s;
    let (q, val) = if hi <= 0.0 {
        (0.0, obj(0.0))
    } else {
        scan_min(&obj, 0.0, hi, SCAN_STEP)
    };
    Ok(ClosedFormResult {
        value: ExtReal::from_f64(val).unwrap_or(ExtReal::PosInf),
        parameter: Some(q),
        formula: "primitive-constraint".into(),
    })
}

/// `A(V) = V (f(0) + f'(inf))`, attained on three points.
pub fn tv_constraint_a(g: &Generator, v: f64) -> Result<ExtReal> {
    check_unit("V", v)?;
    Ok(g.max_divergence_value().scale(v))
}

/// Checks that `h(x) = (1 + f_1(x)) / x` is strictly increasing and strictly
/// convex on a log-spaced grid, with `f_1(0) = -1` and `f_1'(inf) = inf` so
/// that `h` maps `(0, inf)` onto itself.
fn certify_h(f1: &Generator) -> Result<()> {
    let fail = |why: &str| {
        Err(Error::UnsupportedGenerator(format!(
            "h(x) = (1 + f(x)) / x for '{}' {why}",
            f1.name()
        )))
    };
    if f1.f_at_zero() != ExtReal::Finite(-1.0) || f1.f_prime_at_infinity().is_finite() {
        return fail("is not onto (0, inf)");
    }
    let h = |x: f64| (1.0 + f1.eval(x)) / x;
    // Below 1e-2, `1 + f_1(x)` loses most digits to cancellation.
    let xs: Vec<f64> = (0..=240).map(|i| 10f64.powf(-2.0 + 6.0 * i as f64 / 240.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| h(x)).collect();
    for i in 1..xs.len() {
        if !(ys[i] > ys[i - 1]) {
            return fail("is not strictly increasing");
        }
    }
    for i in 1..xs.len() - 1 {
        let chord = ys[i - 1] + (ys[i + 1] - ys[i - 1]) * (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
        if !(ys[i] < chord) {
            return fail("is not strictly convex");
        }
    }
    Ok(())
}

/// `A(D) = h^{-1}(D + 1) - 1` for the chi-squared objective under one
/// constraint `D_{f_1} <= D`, `h(x) = (1 + f_1(x)) / x`.
pub fn chi2_a(f1: &Generator, d: f64) -> Result<f64> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::ParameterDomain(format!("D must be finite and nonnegative, got {d}")));
    }
    certify_h(f1)?;
    let h = |x: f64| (1.0 + f1.eval(x)) / x;
    let target = d + 1.0;
    let (mut lo, mut hi) = (1.0, 2.0);
    while h(hi) < target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::UnsupportedGenerator("h^{-1} bracket overflow".into()));
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) - 1.0)
}

/// `(1 + D)^{1 / (l - 1)} - 1`: chi-squared under a power divergence bound.
pub fn power_chi2_a(l: f64, d: f64) -> Result<f64> {
    if !(l > 2.0 && l.is_finite()) {
        return Err(Error::ParameterDomain(format!("l must exceed 2, got {l}")));
    }
    if !(d >= 0.0) {
        return Err(Error::ParameterDomain(format!("D must be nonnegative, got {d}")));
    }
    Ok((1.0 + d).powf(1.0 / (l - 1.0)) - 1.0)
}

/// Pinsker's lower bound `KL >= 2 V^2`. Not sharp for any `V > 0`.
pub fn pinsker_reference(v: f64) -> Result<f64> {
    check_unit("V", v)?;
    Ok(2.0 * v * v)
}

/// Topsøe's `Delta / 2 <= C <= log(2) Delta` between the capacitory
/// discrimination `C` and the triangular discrimination `Delta`. The upper
/// bound is sharp; the lower one is not.
pub fn topsoe_bounds(delta: f64) -> Result<(f64, f64)> {
    if !(0.0..=2.0).contains(&delta) {
        return Err(Error::ParameterDomain(format!("Delta must lie in [0, 2], got {delta}")));
    }
    Ok((delta / 2.0, std::f64::consts::LN_2 * delta))
}

/// Named closed-form overlays for sweeps: `(objective, constraint, sense)`
/// combinations with an analytic reference curve.
pub fn overlay(objective: &Generator, constraint: &Generator, at_most: bool, x: f64) -> Option<ExtReal> {
    let obj = objective.key();
    let con = constraint.key();
    match (obj, con, at_most) {
        ("tv", "hellinger", true) => (0.0..=1.0)
            .contains(&x)
            .then(|| ExtReal::Finite((2.0 * x).sqrt() * (1.0 - x / 2.0).sqrt())),
        (_, "tv", true) => tv_constraint_a(objective, x).ok(),
        (_, "tv", false) => gilardoni_b_tv(objective, x).ok().map(|r| r.value),
        ("chi2", "power", true) => {
            let l = *constraint.params().first()?;
            power_chi2_a(l, x).ok().map(ExtReal::Finite)
        }
        ("capacitory", "triangular", true) => topsoe_bounds(x).ok().map(|b| ExtReal::Finite(b.1)),
        (_, "primitive", false) => {
            let s = *constraint.params().first()?;
            primitive_constraint_b(objective, s, x).ok().map(|r| r.value)
        }
        _ => None,
    }
}

/// Convenience: `gilardoni_b_tv` for the KL divergence.
pub fn refined_pinsker(v: f64) -> Result<f64> {
    let kl = make_generator("kl", &[])?;
    Ok(gilardoni_b_tv(&kl, v)?.value.to_f64())
}
