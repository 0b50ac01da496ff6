//! f-divergences between discrete probability pairs and the testing curve
//! `psi_{P,Q}(s) = sum_j min(p_j, q_j s)`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ext::{fmt17, ExtReal};
use crate::generators::Generator;
use crate::{Error, Result};

/// Normalization tolerance for probability vectors.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Two probability vectors on `{1, ..., n}`.
///
/// Serializes as `[[p...], [q...]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretePair {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl DiscretePair {
    /// Validates lengths, nonnegativity and normalization (within 1e-12).
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        validate(&p, &q)?;
        Ok(DiscretePair { p, q })
    }

    /// Skips validation. Callers inside the crate guarantee the invariants.
    pub(crate) fn from_parts(p: Vec<f64>, q: Vec<f64>) -> Self {
        debug_assert!(validate(&p, &q).is_ok(), "{:?}", validate(&p, &q));
        DiscretePair { p, q }
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    /// The pair `(Q, P)`.
    pub fn swapped(&self) -> DiscretePair {
        DiscretePair {
            p: self.q.clone(),
            q: self.p.clone(),
        }
    }

    /// Parse the JSON form `[[p...], [q...]]`.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pair serialization cannot fail")
    }
}

fn validate(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::InvalidPair(format!(
            "length mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    if p.is_empty() {
        return Err(Error::InvalidPair("empty support".into()));
    }
    for (name, v) in [("p", p), ("q", q)] {
        if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidPair(format!("{name} has invalid entry {x}")));
        }
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidPair(format!("{name} sums to {s}")));
        }
    }
    Ok(())
}

impl Serialize for DiscretePair {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        (&self.p, &self.q).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DiscretePair {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let (p, q): (Vec<f64>, Vec<f64>) = Deserialize::deserialize(deserializer)?;
        DiscretePair::new(p, q).map_err(serde::de::Error::custom)
    }
}

/// `sum_j q_j f(p_j / q_j)` with the boundary conventions of
/// [`Generator::perspective`], on unvalidated slices.
#[inline]
pub(crate) fn divergence_slices(g: &Generator, p: &[f64], q: &[f64]) -> ExtReal {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| g.perspective(a, b))
        .sum()
}

/// `D_f(P||Q) = sum_{q_j > 0} q_j f(p_j/q_j) + f'(inf) P{q = 0}`.
///
/// Coordinates with `p_j = q_j = 0` contribute nothing, and `f'(inf) * 0 = 0`
/// even when `f'(inf) = inf`.
pub fn divergence(g: &Generator, pair: &DiscretePair) -> ExtReal {
    divergence_slices(g, &pair.p, &pair.q)
}

/// Primitive divergence `D_{u_s}(P||Q) = min(1, s) - psi_{P,Q}(s)`.
pub fn primitive_divergence(pair: &DiscretePair, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::ParameterDomain(format!(
            "primitive parameter must be positive, got {s}"
        )));
    }
    Ok((1.0f64.min(s) - psi(pair).eval(s)).max(0.0))
}

/// Merge coordinates `j` and `j + 1` (0-based) in both `p` and `q`.
pub fn merge_bins(pair: &DiscretePair, j: usize) -> Result<DiscretePair> {
    let n = pair.n();
    if j + 1 >= n {
        return Err(Error::IndexOutOfRange(format!(
            "cannot merge bins {j} and {} of a {n}-point pair",
            j + 1
        )));
    }
    let merge = |v: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(n - 1);
        out.extend_from_slice(&v[..j]);
        out.push(v[j] + v[j + 1]);
        out.extend_from_slice(&v[j + 2..]);
        out
    };
    Ok(DiscretePair::from_parts(merge(&pair.p), merge(&pair.q)))
}

/// A likelihood-ratio level of `psi`: all coordinates with `p_j / q_j == ratio`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Knot {
    pub ratio: f64,
    pub p_mass: f64,
    pub q_mass: f64,
}

/// The concave, nondecreasing, 1-Lipschitz curve `psi_{P,Q}`.
///
/// Coordinates are grouped by ratio `p_j / q_j` (equal within relative 1e-12).
/// Mass of `P` where `q = 0` sits at ratio `inf` and contributes nothing to
/// `psi`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiCurve {
    knots: Vec<Knot>,
    p_at_infinity: f64,
}

/// Relative tolerance used to merge equal likelihood ratios.
pub const KNOT_MERGE_TOL: f64 = 1e-12;

/// Build `psi_{P,Q}`.
pub fn psi(pair: &DiscretePair) -> PsiCurve {
    let mut finite: Vec<Knot> = Vec::with_capacity(pair.n());
    let mut p_at_infinity = 0.0;
    for (&a, &b) in pair.p.iter().zip(&pair.q) {
        if a == 0.0 && b == 0.0 {
            continue;
        }
        if b == 0.0 {
            p_at_infinity += a;
        } else {
            finite.push(Knot {
                ratio: a / b,
                p_mass: a,
                q_mass: b,
            });
        }
    }
    finite.sort_by(|x, y| x.ratio.total_cmp(&y.ratio));
    let mut knots: Vec<Knot> = Vec::with_capacity(finite.len());
    for k in finite {
        match knots.last_mut() {
            Some(last) if (k.ratio - last.ratio).abs() <= KNOT_MERGE_TOL * last.ratio.max(k.ratio) => {
                last.p_mass += k.p_mass;
                last.q_mass += k.q_mass;
            }
            _ => knots.push(k),
        }
    }
    PsiCurve {
        knots,
        p_at_infinity,
    }
}

impl PsiCurve {
    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    /// `P{q = 0}`.
    pub fn p_mass_at_infinity(&self) -> f64 {
        self.p_at_infinity
    }

    /// `Q{p = 0}`.
    pub fn q_mass_at_zero(&self) -> f64 {
        match self.knots.first() {
            Some(k) if k.ratio == 0.0 => k.q_mass,
            _ => 0.0,
        }
    }

    /// Distinct finite positive ratios, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.knots
            .iter()
            .map(|k| k.ratio)
            .filter(|&r| r > 0.0)
            .collect()
    }

    /// `psi(s) = sum_{r_k <= s} p_k + s sum_{r_k > s} q_k` for `s >= 0`.
    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let mut below = 0.0;
        let mut above_q = 0.0;
        for k in &self.knots {
            if k.ratio <= s {
                below += k.p_mass;
            } else {
                above_q += k.q_mass;
            }
        }
        below + s * above_q
    }

    /// Left derivative `Q{p >= s q}` (for `s > 0`).
    pub fn left_slope(&self, s: f64) -> f64 {
        self.knots
            .iter()
            .filter(|k| k.ratio >= s)
            .map(|k| k.q_mass)
            .sum()
    }

    /// Right derivative `Q{p > s q}`.
    pub fn right_slope(&self, s: f64) -> f64 {
        self.knots
            .iter()
            .filter(|k| k.ratio > s)
            .map(|k| k.q_mass)
            .sum()
    }

    /// Samples `(s, psi(s))` at every finite knot and on a uniform grid over
    /// `[0, s_max]` with `grid_points` points, sorted by `s` and deduplicated.
    pub fn sample(&self, s_max: f64, grid_points: usize) -> Vec<(f64, f64)> {
        let mut xs: Vec<f64> = self.knots.iter().map(|k| k.ratio).collect();
        if grid_points >= 2 {
            xs.extend((0..grid_points).map(|i| s_max * i as f64 / (grid_points - 1) as f64));
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.into_iter().map(|s| (s, self.eval(s))).collect()
    }

    /// CSV with header `s,psi`, 17 significant digits.
    pub fn to_csv(&self, s_max: f64, grid_points: usize) -> String {
        let mut out = String::from("s,psi\n");
        for (s, v) in self.sample(s_max, grid_points) {
            out.push_str(&fmt17(s));
            out.push(',');
            out.push_str(&fmt17(v));
            out.push('\n');
        }
        out
    }
}
