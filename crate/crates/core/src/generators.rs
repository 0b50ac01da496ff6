//! Convex generators `f` (with `f(1) = 0`) that define f-divergences.
//!
//! Every generator carries its exact limits `f(0) = lim_{x->0} f(x)` and
//! `f'(inf) = lim_{x->inf} f(x)/x`, together with the curvature measure
//! `nu_f` split into a smooth density (`f''`) and a finite list of atoms
//! (kinks of piecewise-linear generators).

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ext::ExtReal;
use crate::{Error, Result};

/// A real function on `(0, inf)`.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Registry keys of the built-in generators.
pub const REGISTRY_KEYS: [&str; 8] = [
    "kl",
    "tv",
    "hellinger",
    "chi2",
    "power",
    "triangular",
    "capacitory",
    "primitive",
];

/// A point mass of the curvature measure `nu_f`, i.e. a jump of the right
/// derivative of `f` at `location`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// A convex generator function together with its exact boundary behaviour.
#[derive(Clone)]
pub struct Generator {
    name: String,
    key: String,
    params: Vec<f64>,
    eval: RealFn,
    derivative: Option<RealFn>,
    second_derivative: Option<RealFn>,
    f_at_zero: ExtReal,
    f_prime_at_infinity: ExtReal,
    atoms: Vec<Atom>,
    symmetric: bool,
    primitive: Option<f64>,
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("name", &self.name)
            .field("f_at_zero", &self.f_at_zero)
            .field("f_prime_at_infinity", &self.f_prime_at_infinity)
            .field("atoms", &self.atoms)
            .field("symmetric", &self.symmetric)
            .finish_non_exhaustive()
    }
}

impl Generator {
    /// Canonical display name, e.g. `power(3)`.
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// `f(x)` for `x > 0`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    /// Right derivative `f'(x)`, when known in closed form.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(x))
    }

    /// `f''(x)`, the density of the smooth part of `nu_f`.
    pub fn second_derivative(&self, x: f64) -> Option<f64> {
        self.second_derivative.as_ref().map(|d| d(x))
    }

    pub fn has_second_derivative(&self) -> bool {
        self.second_derivative.is_some()
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn f_at_zero(&self) -> ExtReal {
        self.f_at_zero
    }

    pub fn f_prime_at_infinity(&self) -> ExtReal {
        self.f_prime_at_infinity
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `Some(s)` when this divergence is the primitive divergence `D_{u_s}`.
    /// Total variation reports `Some(1.0)`.
    pub fn primitive_parameter(&self) -> Option<f64> {
        self.primitive
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive.is_some()
    }

    /// Smooth with no atoms: usable by derivative-based solvers.
    pub fn is_smooth(&self) -> bool {
        self.atoms.is_empty() && self.derivative.is_some() && self.second_derivative.is_some()
    }

    /// The perspective `b * f(a / b)`, extended to `b = 0` by `a * f'(inf)`
    /// and to `a = 0` by `b * f(0)`.
    #[inline]
    pub fn perspective(&self, a: f64, b: f64) -> ExtReal {
        if b > 0.0 {
            if a > 0.0 {
                ExtReal::Finite(b * self.eval(a / b))
            } else {
                self.f_at_zero.scale(b)
            }
        } else if a > 0.0 {
            self.f_prime_at_infinity.scale(a)
        } else {
            ExtReal::ZERO
        }
    }

    /// `sup_{P,Q} D_f(P||Q) = f(0) + f'(inf)`.
    pub fn max_divergence_value(&self) -> ExtReal {
        self.f_at_zero + self.f_prime_at_infinity
    }

    pub fn is_finite_divergence(&self) -> bool {
        self.max_divergence_value().is_finite()
    }
}

/// `f(0) + f'(inf)` of `g`.
pub fn max_divergence_value(g: &Generator) -> ExtReal {
    g.max_divergence_value()
}

/// Whether `sup D_f < inf`.
pub fn is_finite_divergence(g: &Generator) -> bool {
    g.is_finite_divergence()
}

fn canonical_name(key: &str, params: &[f64]) -> String {
    if params.is_empty() {
        key.to_string()
    } else {
        let ps: Vec<String> = params.iter().map(|p| format!("{p}")).collect();
        format!("{key}({})", ps.join(","))
    }
}

fn expect_params(key: &str, params: &[f64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::ParameterDomain(format!(
            "generator '{key}' takes {n} parameter(s), got {}",
            params.len()
        )));
    }
    Ok(())
}

struct Parts {
    eval: RealFn,
    derivative: Option<RealFn>,
    second_derivative: Option<RealFn>,
    f_at_zero: ExtReal,
    f_prime_at_infinity: ExtReal,
    atoms: Vec<Atom>,
    symmetric: bool,
    primitive: Option<f64>,
}

fn assemble(key: &str, params: &[f64], parts: Parts) -> Generator {
    Generator {
        name: canonical_name(key, params),
        key: key.to_string(),
        params: params.to_vec(),
        eval: parts.eval,
        derivative: parts.derivative,
        second_derivative: parts.second_derivative,
        f_at_zero: parts.f_at_zero,
        f_prime_at_infinity: parts.f_prime_at_infinity,
        atoms: parts.atoms,
        symmetric: parts.symmetric,
        primitive: parts.primitive,
    }
}

/// Build a registry generator.
///
/// | key | f(x) | params |
/// |-----|------|--------|
/// | `kl` | `x log x` | |
/// | `tv` | `abs(x - 1) / 2` | |
/// | `hellinger` | `(sqrt(x) - 1)^2 / 2` | |
/// | `chi2` | `x^2 - 1` | |
/// | `power` | `x^l - 1` | `l > 1` |
/// | `triangular` | `(x - 1)^2 / (x + 1)` | |
/// | `capacitory` | `x log x - (x + 1) log(x + 1) + (x + 1) log 2` | |
/// | `primitive` | `min(1, s) - min(x, s)` | `s > 0` |
///
/// The capacitory generator is stored in its self-dual form
/// (`f(x) = x f(1/x)`); it differs from `x log x - (x+1) log(x+1) + 2 log 2`
/// by the linear term `log 2 (x - 1)`, which leaves every divergence value
/// unchanged.
pub fn make_generator(key: &str, params: &[f64]) -> Result<Generator> {
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::ParameterDomain(format!(
            "generator '{key}' parameters must be finite, got {params:?}"
        )));
    }
    let parts = match key {
        "kl" => {
            expect_params(key, params, 0)?;
            Parts {
                eval: Arc::new(|x| x * x.ln()),
                derivative: Some(Arc::new(|x| x.ln() + 1.0)),
                second_derivative: Some(Arc::new(|x| 1.0 / x)),
                f_at_zero: ExtReal::ZERO,
                f_prime_at_infinity: ExtReal::PosInf,
                atoms: vec![],
                symmetric: false,
                primitive: None,
            }
        }
        "tv" => {
            expect_params(key, params, 0)?;
            Parts {
                eval: Arc::new(|x| 0.5 * (x - 1.0).abs()),
                derivative: Some(Arc::new(|x| if x < 1.0 { -0.5 } else { 0.5 })),
                second_derivative: None,
                f_at_zero: ExtReal::Finite(0.5),
                f_prime_at_infinity: ExtReal::Finite(0.5),
                atoms: vec![Atom {
                    location: 1.0,
                    mass: 1.0,
                }],
                symmetric: true,
                primitive: Some(1.0),
            }
        }
        "hellinger" => {
            expect_params(key, params, 0)?;
            Parts {
                eval: Arc::new(|x| {
                    let d = x.sqrt() - 1.0;
                    0.5 * d * d
                }),
                derivative: Some(Arc::new(|x| 0.5 * (1.0 - 1.0 / x.sqrt()))),
                second_derivative: Some(Arc::new(|x| 0.25 / (x * x.sqrt()))),
                f_at_zero: ExtReal::Finite(0.5),
                f_prime_at_infinity: ExtReal::Finite(0.5),
                atoms: vec![],
                symmetric: true,
                primitive: None,
            }
        }
        "chi2" => {
            expect_params(key, params, 0)?;
            Parts {
                eval: Arc::new(|x| x * x - 1.0),
                derivative: Some(Arc::new(|x| 2.0 * x)),
                second_derivative: Some(Arc::new(|_| 2.0)),
                f_at_zero: ExtReal::Finite(-1.0),
                f_prime_at_infinity: ExtReal::PosInf,
                atoms: vec![],
                symmetric: false,
                primitive: None,
            }
        }
        "power" => {
            expect_params(key, params, 1)?;
            let l = params[0];
            if l <= 1.0 {
                return Err(Error::ParameterDomain(format!(
                    "power exponent must exceed 1, got {l}"
                )));
            }
            Parts {
                eval: Arc::new(move |x| x.powf(l) - 1.0),
                derivative: Some(Arc::new(move |x| l * x.powf(l - 1.0))),
                second_derivative: Some(Arc::new(move |x| l * (l - 1.0) * x.powf(l - 2.0))),
                f_at_zero: ExtReal::Finite(-1.0),
                f_prime_at_infinity: ExtReal::PosInf,
                atoms: vec![],
                symmetric: false,
                primitive: None,
            }
        }
        "triangular" => {
            expect_params(key, params, 0)?;
            Parts {
                eval: Arc::new(|x| {
                    let d = x - 1.0;
                    d * d / (x + 1.0)
                }),
                derivative: Some(Arc::new(|x| {
                    let s = x + 1.0;
                    1.0 - 4.0 / (s * s)
                })),
                second_derivative: Some(Arc::new(|x| {
                    let s = x + 1.0;
                    8.0 / (s * s * s)
                })),
                f_at_zero: ExtReal::Finite(1.0),
                f_prime_at_infinity: ExtReal::Finite(1.0),
                atoms: vec![],
                symmetric: true,
                primitive: None,
            }
        }
        "capacitory" => {
            expect_params(key, params, 0)?;
            Parts {
                eval: Arc::new(|x| x * x.ln() - (x + 1.0) * x.ln_1p() + (x + 1.0) * LN_2),
                derivative: Some(Arc::new(|x| (x / (x + 1.0)).ln() + LN_2)),
                second_derivative: Some(Arc::new(|x| 1.0 / (x * (x + 1.0)))),
                f_at_zero: ExtReal::Finite(LN_2),
                f_prime_at_infinity: ExtReal::Finite(LN_2),
                atoms: vec![],
                symmetric: true,
                primitive: None,
            }
        }
        "primitive" => {
            expect_params(key, params, 1)?;
            let s = params[0];
            if s <= 0.0 {
                return Err(Error::ParameterDomain(format!(
                    "primitive parameter s must be positive, got {s}"
                )));
            }
            Parts {
                eval: Arc::new(move |x| 1.0f64.min(s) - x.min(s)),
                derivative: Some(Arc::new(move |x| if x < s { -1.0 } else { 0.0 })),
                second_derivative: None,
                f_at_zero: ExtReal::Finite(1.0f64.min(s)),
                f_prime_at_infinity: ExtReal::ZERO,
                atoms: vec![Atom {
                    location: s,
                    mass: 1.0,
                }],
                // u_1(x) = (1 - x)_+ is not self-dual as a function, although
                // its divergence (total variation) is symmetric.
                symmetric: false,
                primitive: Some(s),
            }
        }
        _ => return Err(Error::UnknownGenerator(key.to_string())),
    };
    Ok(assemble(key, params, parts))
}

/// Parse `key` or `key(p1,p2,...)` and build the generator.
pub fn parse_generator(text: &str) -> Result<Generator> {
    let (key, params) = split_generator_text(text)?;
    make_generator(&key, &params)
}

/// Split `key(p1,...)` into the key and its numeric parameters.
pub fn split_generator_text(text: &str) -> Result<(String, Vec<f64>)> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(Error::Parse("empty generator name".into()));
    }
    let Some(open) = t.find('(') else {
        if !t.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Parse(format!("invalid generator name '{t}'")));
        }
        return Ok((t, vec![]));
    };
    if !t.ends_with(')') {
        return Err(Error::Parse(format!("unclosed parameter list in '{t}'")));
    }
    let key = t[..open].to_string();
    if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(Error::Parse(format!("invalid generator name '{key}'")));
    }
    let inner = &t[open + 1..t.len() - 1];
    let params = if inner.is_empty() {
        vec![]
    } else {
        inner
            .split(',')
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("invalid parameter '{tok}' in '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok((key, params))
}

// ---------------------------------------------------------------------------
// Custom generators
// ---------------------------------------------------------------------------

/// One term `weight * f_key(params)` of a custom generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomTerm {
    pub key: String,
    #[serde(default)]
    pub params: Vec<f64>,
    pub weight: f64,
}

/// A declarative custom generator: a nonnegative combination of registry
/// generators plus an optional linear term `shift * (x - 1)`.
///
/// Convexity, `f(1) = 0` and the limits follow exactly from the terms, so no
/// tabulated values or numeric limit estimates are involved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomGeneratorDef {
    pub name: String,
    pub terms: Vec<CustomTerm>,
    #[serde(default)]
    pub shift: f64,
    #[serde(default)]
    pub symmetric: bool,
}

impl CustomGeneratorDef {
    pub fn build(&self) -> Result<Generator> {
        if self.terms.is_empty() {
            return Err(Error::ParameterDomain(format!(
                "custom generator '{}' has no terms",
                self.name
            )));
        }
        if REGISTRY_KEYS.contains(&self.name.as_str()) {
            return Err(Error::ParameterDomain(format!(
                "custom generator name '{}' shadows a registry key",
                self.name
            )));
        }
        if !self.shift.is_finite() {
            return Err(Error::ParameterDomain("shift must be finite".into()));
        }
        let mut parts: Vec<(f64, Generator)> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if !(t.weight > 0.0 && t.weight.is_finite()) {
                return Err(Error::ParameterDomain(format!(
                    "custom term weights must be positive and finite, got {}",
                    t.weight
                )));
            }
            parts.push((t.weight, make_generator(&t.key, &t.params)?));
        }
        let shift = self.shift;
        let parts = Arc::new(parts);

        let p = parts.clone();
        let eval: RealFn = Arc::new(move |x| {
            p.iter().map(|(w, g)| w * g.eval(x)).sum::<f64>() + shift * (x - 1.0)
        });
        let derivative: Option<RealFn> = if parts.iter().all(|(_, g)| g.has_derivative()) {
            let p = parts.clone();
            Some(Arc::new(move |x| {
                p.iter()
                    .map(|(w, g)| w * g.derivative(x).unwrap_or(0.0))
                    .sum::<f64>()
                    + shift
            }))
        } else {
            None
        };
        let smooth: Vec<usize> = (0..parts.len())
            .filter(|&i| parts[i].1.has_second_derivative())
            .collect();
        let second_derivative: Option<RealFn> = if smooth.is_empty() {
            None
        } else {
            let p = parts.clone();
            Some(Arc::new(move |x| {
                smooth
                    .iter()
                    .map(|&i| p[i].0 * p[i].1.second_derivative(x).unwrap_or(0.0))
                    .sum()
            }))
        };
        let mut atoms: Vec<Atom> = Vec::new();
        for (w, g) in parts.iter() {
            for a in g.atoms() {
                match atoms.iter_mut().find(|b| b.location == a.location) {
                    Some(b) => b.mass += w * a.mass,
                    None => atoms.push(Atom {
                        location: a.location,
                        mass: w * a.mass,
                    }),
                }
            }
        }
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        let f_at_zero = parts
            .iter()
            .map(|(w, g)| g.f_at_zero().scale(*w))
            .sum::<ExtReal>()
            + (-shift);
        let f_prime_at_infinity = parts
            .iter()
            .map(|(w, g)| g.f_prime_at_infinity().scale(*w))
            .sum::<ExtReal>()
            + shift;
        // A scaled primitive divergence is no longer D_{u_s}; custom
        // generators never take the primitive-only reduction.
        let primitive = None;
        let gen = Generator {
            name: self.name.clone(),
            key: self.name.clone(),
            params: vec![],
            eval,
            derivative,
            second_derivative,
            f_at_zero,
            f_prime_at_infinity,
            atoms,
            symmetric: self.symmetric,
            primitive,
        };
        if gen.symmetric {
            if let Err(msg) = check_symmetry(&gen) {
                return Err(Error::ParameterDomain(format!(
                    "custom generator '{}' declared symmetric but {msg}",
                    self.name
                )));
            }
        }
        Ok(gen)
    }
}

/// Generator lookup over the built-in keys and any loaded custom definitions.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    custom: BTreeMap<String, CustomGeneratorDef>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a custom definition. The definition is built once to validate it.
    pub fn add(&mut self, def: CustomGeneratorDef) -> Result<()> {
        def.build()?;
        self.custom.insert(def.name.clone(), def);
        Ok(())
    }

    /// Load a JSON file holding one definition or an array of definitions.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.load_json(&text)
    }

    pub fn load_json(&mut self, text: &str) -> Result<()> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let defs: Vec<CustomGeneratorDef> = if value.is_array() {
            serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?
        } else {
            vec![serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?]
        };
        for d in defs {
            self.add(d)?;
        }
        Ok(())
    }

    pub fn make(&self, key: &str, params: &[f64]) -> Result<Generator> {
        match self.custom.get(key) {
            Some(def) if params.is_empty() => def.build(),
            Some(_) => Err(Error::ParameterDomain(format!(
                "custom generator '{key}' takes no parameters"
            ))),
            None => make_generator(key, params),
        }
    }

    pub fn parse(&self, text: &str) -> Result<Generator> {
        let (key, params) = split_generator_text(text)?;
        self.make(&key, &params)
    }
}

// ---------------------------------------------------------------------------
// Invariant checks
// ---------------------------------------------------------------------------

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

/// `|f(x) - x f(1/x)| <= 1e-10 (1 + |f(x)|)` on a log grid over `[1e-4, 1e4]`.
pub fn check_symmetry(g: &Generator) -> std::result::Result<(), String> {
    for x in log_grid(1e-4, 1e4, 161) {
        let lhs = g.eval(x);
        let rhs = x * g.eval(1.0 / x);
        if (lhs - rhs).abs() > 1e-10 * (1.0 + lhs.abs()) {
            return Err(format!("f({x}) = {lhs} but x f(1/x) = {rhs}"));
        }
    }
    Ok(())
}

/// Sampled convexity check: `f(b) <= chord(a, c)(b) + 1e-12` on log-spaced
/// triples.
pub fn check_convexity(g: &Generator) -> std::result::Result<(), String> {
    let xs: Vec<f64> = log_grid(1e-3, 1e3, 61).collect();
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            for k in (j + 1)..xs.len() {
                let (a, b, c) = (xs[i], xs[j], xs[k]);
                let chord = ((c - b) * g.eval(a) + (b - a) * g.eval(c)) / (c - a);
                let fb = g.eval(b);
                // Relative slack for large magnitudes (power generators at 1e3).
                let slack = 1e-12 + 1e-13 * chord.abs().max(fb.abs());
                if fb > chord + slack {
                    return Err(format!("convexity fails at ({a}, {b}, {c})"));
                }
            }
        }
    }
    Ok(())
}

/// All sampled invariants of a generator.
pub fn check_invariants(g: &Generator) -> std::result::Result<(), String> {
    if g.eval(1.0) != 0.0 {
        return Err(format!("f(1) = {} != 0", g.eval(1.0)));
    }
    check_convexity(g)?;
    if g.symmetric {
        check_symmetry(g)?;
    }
    if g.second_derivative.is_some() {
        for x in log_grid(1e-4, 1e4, 81) {
            let d2 = g.second_derivative(x).unwrap_or(0.0);
            if d2 < 0.0 || d2.is_nan() {
                return Err(format!("f''({x}) = {d2} < 0"));
            }
        }
    }
    for a in &g.atoms {
        if !(a.mass > 0.0 && a.location > 0.0) {
            return Err(format!("invalid atom {a:?}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_registry() -> Vec<Generator> {
        vec![
            make_generator("kl", &[]).unwrap(),
            make_generator("tv", &[]).unwrap(),
            make_generator("hellinger", &[]).unwrap(),
            make_generator("chi2", &[]).unwrap(),
            make_generator("power", &[3.0]).unwrap(),
            make_generator("power", &[1.5]).unwrap(),
            make_generator("triangular", &[]).unwrap(),
            make_generator("capacitory", &[]).unwrap(),
            make_generator("primitive", &[0.5]).unwrap(),
            make_generator("primitive", &[2.0]).unwrap(),
        ]
    }

    #[test]
    fn registry_generators_satisfy_invariants() {
        for g in all_registry() {
            check_invariants(&g).unwrap_or_else(|e| panic!("{}: {e}", g.name()));
        }
    }

    #[test]
    fn tv_limits() {
        let g = make_generator("tv", &[]).unwrap();
        assert_eq!(g.f_at_zero(), ExtReal::Finite(0.5));
        assert_eq!(g.f_prime_at_infinity(), ExtReal::Finite(0.5));
        assert_eq!(g.max_divergence_value(), ExtReal::Finite(1.0));
    }

    #[test]
    fn kl_limits() {
        let g = make_generator("kl", &[]).unwrap();
        assert_eq!(g.f_at_zero(), ExtReal::ZERO);
        assert_eq!(g.f_prime_at_infinity(), ExtReal::PosInf);
        assert_eq!(g.max_divergence_value(), ExtReal::PosInf);
        assert!(!g.is_finite_divergence());
    }

    #[test]
    fn capacitory_limits_match_numeric_limits() {
        let g = make_generator("capacitory", &[]).unwrap();
        assert_eq!(g.max_divergence_value(), ExtReal::Finite(2.0 * LN_2));
        let f0 = g.f_at_zero().finite().unwrap();
        let fi = g.f_prime_at_infinity().finite().unwrap();
        assert!((g.eval(1e-8) - f0).abs() <= 1e-6 * f0);
        assert!((g.eval(1e8) / 1e8 - fi).abs() <= 1e-6 * fi);
        // Same divergence as the textbook form x log x - (x+1) log(x+1) + 2 log 2.
        for &x in &[0.01, 0.5, 2.0, 37.0] {
            let textbook = x * f64::ln(x) - (x + 1.0) * f64::ln(x + 1.0) + 2.0 * LN_2;
            assert!((g.eval(x) - textbook - LN_2 * (x - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_limits_agree_with_numeric_limits() {
        for g in all_registry() {
            if let Some(f0) = g.f_at_zero().finite() {
                let num = g.eval(1e-14);
                assert!(
                    (num - f0).abs() <= 1e-6 * (1.0 + f0.abs()),
                    "{}: f(0) {f0} vs {num}",
                    g.name()
                );
            }
            if let Some(fi) = g.f_prime_at_infinity().finite() {
                let (x1, x2) = (1e14, 2e14);
                let slope = (g.eval(x2) - g.eval(x1)) / (x2 - x1);
                assert!(
                    (slope - fi).abs() <= 1e-6 * (1.0 + fi.abs()),
                    "{}: f'(inf) {fi} vs {slope}",
                    g.name()
                );
            } else {
                assert!(g.eval(1e12) / 1e12 > 10.0, "{} should grow superlinearly", g.name());
            }
        }
    }

    #[test]
    fn triangular_max_value_is_two() {
        let g = make_generator("triangular", &[]).unwrap();
        assert_eq!(g.max_divergence_value(), ExtReal::Finite(2.0));
        // Mutually singular two-point pair: q_1 f(0) + p_2 f'(inf).
        let d = g.perspective(0.0, 1.0) + g.perspective(1.0, 0.0);
        assert_eq!(d, ExtReal::Finite(2.0));
    }

    #[test]
    fn primitive_generator() {
        let g = make_generator("primitive", &[2.0]).unwrap();
        assert_eq!(
            g.atoms(),
            &[Atom {
                location: 2.0,
                mass: 1.0
            }]
        );
        assert_eq!(g.f_at_zero(), ExtReal::Finite(1.0));
        assert_eq!(g.max_divergence_value(), ExtReal::Finite(1.0));
        for &s in &[0.1, 0.5, 1.0, 3.0] {
            let g = make_generator("primitive", &[s]).unwrap();
            assert_eq!(g.max_divergence_value(), ExtReal::Finite(s.min(1.0)));
            assert!(g.is_finite_divergence());
        }
    }

    #[test]
    fn finiteness() {
        assert!(make_generator("hellinger", &[]).unwrap().is_finite_divergence());
        assert!(!make_generator("chi2", &[]).unwrap().is_finite_divergence());
        assert!(!make_generator("power", &[3.0]).unwrap().is_finite_divergence());
    }

    #[test]
    fn symmetry_flags_hold_exactly_where_declared() {
        for key in ["tv", "hellinger", "triangular", "capacitory"] {
            let g = make_generator(key, &[]).unwrap();
            assert!(g.is_symmetric());
            check_symmetry(&g).unwrap();
        }
        for g in [
            make_generator("kl", &[]).unwrap(),
            make_generator("chi2", &[]).unwrap(),
            make_generator("power", &[3.0]).unwrap(),
        ] {
            assert!(!g.is_symmetric());
            let x = 2.0;
            assert!((g.eval(x) - x * g.eval(1.0 / x)).abs() > 1e-3, "{}", g.name());
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(
            make_generator("primitive", &[0.0]),
            Err(Error::ParameterDomain(_))
        ));
        assert!(matches!(
            make_generator("primitive", &[-1.0]),
            Err(Error::ParameterDomain(_))
        ));
        assert!(matches!(
            make_generator("power", &[1.0]),
            Err(Error::ParameterDomain(_))
        ));
        assert!(matches!(
            make_generator("power", &[]),
            Err(Error::ParameterDomain(_))
        ));
        assert!(matches!(
            make_generator("renyi", &[]),
            Err(Error::UnknownGenerator(_))
        ));
    }

    #[test]
    fn tv_is_primitive_one() {
        let tv = make_generator("tv", &[]).unwrap();
        let u1 = make_generator("primitive", &[1.0]).unwrap();
        assert_eq!(tv.primitive_parameter(), Some(1.0));
        // Same divergence: the generators differ by (x - 1) / 2.
        for &x in &[0.0, 0.3, 1.0, 4.0] {
            if x > 0.0 {
                assert!((tv.eval(x) - u1.eval(x) - 0.5 * (x - 1.0)).abs() < 1e-15);
            }
        }
        assert_eq!(tv.max_divergence_value(), u1.max_divergence_value());
    }

    #[test]
    fn parse_generator_text() {
        let g = parse_generator("power(3)").unwrap();
        assert_eq!(g.name(), "power(3)");
        let g = parse_generator(" primitive ( 0.5 ) ").unwrap();
        assert_eq!(g.primitive_parameter(), Some(0.5));
        assert!(parse_generator("power(3").is_err());
        assert!(parse_generator("power(x)").is_err());
    }

    #[test]
    fn custom_generator_combination() {
        let mut reg = Registry::new();
        reg.load_json(
            r#"{"name": "hel_tri", "terms": [
                {"key": "hellinger", "weight": 2.0},
                {"key": "triangular", "weight": 0.5}
            ], "symmetric": true}"#,
        )
        .unwrap();
        let g = reg.parse("hel_tri").unwrap();
        check_invariants(&g).unwrap();
        assert_eq!(g.max_divergence_value(), ExtReal::Finite(2.0 * 1.0 + 0.5 * 2.0));
        assert!((g.second_derivative(1.0).unwrap() - (2.0 * 0.25 + 0.5 * 1.0)).abs() < 1e-15);
    }

    #[test]
    fn custom_generator_false_symmetry_rejected() {
        let mut reg = Registry::new();
        let err = reg
            .load_json(r#"{"name": "k", "terms": [{"key": "kl", "weight": 1.0}], "symmetric": true}"#)
            .unwrap_err();
        assert!(matches!(err, Error::ParameterDomain(_)));
    }

    #[test]
    fn custom_generator_defaults_to_non_symmetric() {
        let mut reg = Registry::new();
        reg.load_json(r#"{"name": "h2", "terms": [{"key": "hellinger", "weight": 1.0}]}"#)
            .unwrap();
        assert!(!reg.parse("h2").unwrap().is_symmetric());
    }
}
