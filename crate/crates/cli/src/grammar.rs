//! Text forms of generators, constraints and sweep axes.
//!
//! ```text
//! constraint := generator op bound
//! sweep      := generator op start ":" stop ":" steps
//! generator  := key [ "(" number { "," number } ")" ]
//! key        := { letter | digit | "_" }+
//! op         := "<=" | ">="
//! bound      := decimal | "inf"
//! steps      := positive integer
//! ```
//!
//! Whitespace is ignored everywhere. Formatting a parsed value gives the
//! canonical form, e.g. `" power( 3 ) <= 0.50 "` becomes `power(3)<=0.5`.

use std::fmt;
use std::str::FromStr;

use fdbounds::engine::{ConstraintSpec, Direction};
use fdbounds::generators::{split_generator_text, Registry};
use fdbounds::Generator;

/// A parse failure, carrying the offending token.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub token: String,
    pub message: String,
}

impl ParseError {
    fn new(token: &str, message: impl Into<String>) -> Self {
        ParseError {
            token: token.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at '{}')", self.message, self.token)
    }
}

impl std::error::Error for ParseError {}

fn strip(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).collect()
}

/// `key` or `key(p1,...)`, not yet resolved against a registry.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorText {
    pub key: String,
    pub params: Vec<f64>,
}

impl GeneratorText {
    pub fn resolve(&self, registry: &Registry) -> fdbounds::Result<Generator> {
        registry.make(&self.key, &self.params)
    }
}

impl FromStr for GeneratorText {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, ParseError> {
        let t = strip(text);
        let (key, params) = split_generator_text(&t).map_err(|e| ParseError::new(&t, e.to_string()))?;
        Ok(GeneratorText { key, params })
    }
}

impl fmt::Display for GeneratorText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key)?;
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
            write!(f, "({})", ps.join(","))?;
        }
        Ok(())
    }
}

/// Split at the single `<=` / `>=` operator.
fn split_op(text: &str) -> Result<(&str, Direction, &str), ParseError> {
    let found: Vec<(usize, Direction)> = text
        .match_indices("<=")
        .map(|(i, _)| (i, Direction::AtMost))
        .chain(text.match_indices(">=").map(|(i, _)| (i, Direction::AtLeast)))
        .collect();
    match found.as_slice() {
        [(i, d)] => Ok((&text[..*i], *d, &text[i + 2..])),
        [] => Err(ParseError::new(text, "expected '<=' or '>='")),
        _ => Err(ParseError::new(text, "more than one comparison operator")),
    }
}

fn parse_bound(tok: &str) -> Result<f64, ParseError> {
    let v = match tok {
        "inf" | "+inf" => f64::INFINITY,
        _ => {
            let ok = !tok.is_empty()
                && tok
                    .chars()
                    .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'));
            if !ok {
                return Err(ParseError::new(tok, "expected a decimal number"));
            }
            tok.parse::<f64>()
                .map_err(|_| ParseError::new(tok, "expected a decimal number"))?
        }
    };
    if v < 0.0 {
        return Err(ParseError::new(tok, "bounds must be nonnegative"));
    }
    Ok(v)
}

/// `generator <= bound` or `generator >= bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintText {
    pub generator: GeneratorText,
    pub direction: Direction,
    pub bound: f64,
}

impl ConstraintText {
    pub fn resolve(&self, registry: &Registry) -> fdbounds::Result<ConstraintSpec> {
        Ok(ConstraintSpec {
            generator: self.generator.resolve(registry)?,
            bound: self.bound,
            direction: self.direction,
        })
    }
}

impl FromStr for ConstraintText {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, ParseError> {
        let t = strip(text);
        let (lhs, direction, rhs) = split_op(&t)?;
        Ok(ConstraintText {
            generator: lhs.parse()?,
            direction,
            bound: parse_bound(rhs)?,
        })
    }
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        v.to_string()
    }
}

impl fmt::Display for ConstraintText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.generator, self.direction.symbol(), fmt_bound(self.bound))
    }
}

/// Evenly spaced bounds `start, ..., stop` with `steps` points.
#[derive(Clone, Debug, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == self.steps - 1 {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

/// A constraint whose bound runs over a range.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepText {
    pub generator: GeneratorText,
    pub direction: Direction,
    pub range: Range,
}

impl SweepText {
    pub fn at(&self, bound: f64) -> ConstraintText {
        ConstraintText {
            generator: self.generator.clone(),
            direction: self.direction,
            bound,
        }
    }
}

impl FromStr for SweepText {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, ParseError> {
        let t = strip(text);
        let (lhs, direction, rhs) = split_op(&t)?;
        let parts: Vec<&str> = rhs.split(':').collect();
        let [start, stop, steps] = parts.as_slice() else {
            return Err(ParseError::new(rhs, "expected start:stop:steps"));
        };
        let start = parse_bound(start)?;
        let stop = parse_bound(stop)?;
        for (v, tok) in [(start, parts[0]), (stop, parts[1])] {
            if !v.is_finite() {
                return Err(ParseError::new(tok, "sweep ends must be finite"));
            }
        }
        let steps: usize = steps
            .parse()
            .ok()
            .filter(|&s| s >= 1)
            .ok_or_else(|| ParseError::new(steps, "expected a positive step count"))?;
        Ok(SweepText {
            generator: lhs.parse()?,
            direction,
            range: Range { start, stop, steps },
        })
    }
}

impl fmt::Display for SweepText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}{}:{}:{}",
            self.generator,
            self.direction.symbol(),
            self.range.start,
            self.range.stop,
            self.range.steps
        )
    }
}
