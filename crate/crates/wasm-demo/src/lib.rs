//! Browser bindings for three operations: the TV-vs-Hellinger curve, a
//! sampled joint range, and a single bound.
//!
//! Each export returns a JSON string. The plain functions in [`demo`] hold the
//! logic and run natively, so the workspace tests cover them without a wasm
//! toolchain.

use wasm_bindgen::prelude::*;

pub mod demo {
    use fdbounds::closed_forms::overlay;
    use fdbounds::engine::{solve_a, solve_b, ConstraintSpec, SolverOptions};
    use fdbounds::generators::Registry;
    use fdbounds::joint_range::sample_joint_range;
    use fdbounds::{Error, ExtReal, Result};
    use serde_json::{json, Value};

    /// Largest count accepted by [`joint_range`], to keep the page responsive.
    pub const MAX_COUNT: usize = 20_000;

    fn number(v: ExtReal) -> Value {
        match v {
            ExtReal::Finite(x) => json!(x),
            ExtReal::PosInf => json!("inf"),
        }
    }

    /// Sharp upper bound on TV given `hellinger <= h` at `points` evenly
    /// spaced `h` in `(0, 1]`, next to the closed form.
    pub fn tv_hellinger_curve(points: usize) -> Result<Value> {
        if points == 0 {
            return Err(Error::InvalidProblem("need at least one point".into()));
        }
        let reg = Registry::new();
        let (tv, hel) = (reg.parse("tv")?, reg.parse("hellinger")?);
        let opts = SolverOptions::default();
        let mut rows = Vec::with_capacity(points);
        for i in 1..=points {
            let h = i as f64 / points as f64;
            let r = solve_a(&tv, &[ConstraintSpec::at_most(hel.clone(), h)], &opts)?;
            let exact = overlay(&tv, &hel, true, h).map_or(Value::Null, number);
            rows.push(json!({ "h": h, "value": number(r.value), "closed_form": exact }));
        }
        Ok(Value::Array(rows))
    }

    /// Values `(D_x, D_y)` of `count` random pairs on three points, plus the
    /// two corner points. Pairs with an infinite coordinate are left out.
    pub fn joint_range(x: &str, y: &str, count: usize, seed: u64) -> Result<Value> {
        if count > MAX_COUNT {
            return Err(Error::InvalidProblem(format!("count is capped at {MAX_COUNT}")));
        }
        let reg = Registry::new();
        let gs = [reg.parse(x)?, reg.parse(y)?];
        let cloud = sample_joint_range(&gs, 3, count, seed)?;
        let points: Vec<[f64; 2]> = cloud
            .points
            .iter()
            .filter_map(|pt| Some([pt.values[0].finite()?, pt.values[1].finite()?]))
            .collect();
        let dropped = cloud.points.len() - points.len();
        Ok(json!({ "points": points, "dropped": dropped }))
    }

    /// Supremum (`maximize`) of `objective` given `constraint <= bound`, or
    /// its infimum given `constraint >= bound`.
    pub fn bound(objective: &str, constraint: &str, bound: f64, maximize: bool) -> Result<Value> {
        let reg = Registry::new();
        let (obj, con) = (reg.parse(objective)?, reg.parse(constraint)?);
        let opts = SolverOptions::default();
        let r = if maximize {
            solve_a(&obj, &[ConstraintSpec::at_most(con, bound)], &opts)?
        } else {
            solve_b(&obj, &[ConstraintSpec::at_least(con, bound)], &opts)?
        };
        serde_json::to_value(&r).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn to_js(r: fdbounds::Result<serde_json::Value>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn tv_hellinger_curve(points: usize) -> Result<String, JsValue> {
    to_js(demo::tv_hellinger_curve(points))
}

#[wasm_bindgen]
pub fn joint_range(x: &str, y: &str, count: usize, seed: u32) -> Result<String, JsValue> {
    to_js(demo::joint_range(x, y, count, seed as u64))
}

#[wasm_bindgen]
pub fn bound(objective: &str, constraint: &str, bound: f64, maximize: bool) -> Result<String, JsValue> {
    to_js(demo::bound(objective, constraint, bound, maximize))
}

/// Registry keys, for populating the page's selectors.
#[wasm_bindgen]
pub fn generator_keys() -> String {
    serde_json::to_string(&fdbounds::generators::REGISTRY_KEYS).expect("keys serialize")
}
