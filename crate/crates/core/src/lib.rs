//! # fdbounds
//!
//! Sharp inequalities between f-divergences.
//!
//! Given an objective divergence `D_f` and constraints `D_{f_i}(P||Q) <= D_i`
//! (or `>= D_i`), the extremal values
//!
//! ```text
//! A(D_1..D_m) = sup { D_f(P||Q) : D_{f_i}(P||Q) <= D_i }
//! B(D_1..D_m) = inf { D_f(P||Q) : D_{f_i}(P||Q) >= D_i }
//! ```
//!
//! over *all* pairs of probability measures are attained on sample spaces
//! with `m + 2` points. The [`engine`] solves those finite problems; the
//! [`closed_forms`] module holds the known analytic special cases used to
//! cross-check it.
//!
//! ```
//! use fdbounds::engine::{solve_a, ConstraintSpec, SolverOptions};
//! use fdbounds::generators::make_generator;
//!
//! let tv = make_generator("tv", &[]).unwrap();
//! let hel = make_generator("hellinger", &[]).unwrap();
//! let res = solve_a(&tv, &[ConstraintSpec::at_most(hel, 0.5)], &SolverOptions::default()).unwrap();
//! let exact = (2.0f64 * 0.5 - 0.25).sqrt();
//! assert!((res.value.to_f64() - exact).abs() < 5e-3);
//! ```

pub mod closed_forms;
pub mod divergence;
pub mod engine;
pub mod ext;
pub mod generators;
pub mod joint_range;
pub mod quadrature;
pub mod representation;
pub mod verify;

mod par;

pub use divergence::{divergence, psi, DiscretePair, PsiCurve};
pub use ext::ExtReal;
pub use generators::{make_generator, Generator};

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown generator '{0}'")]
    UnknownGenerator(String),
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),
    #[error("invalid probability pair: {0}")]
    InvalidPair(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("unsupported generator: {0}")]
    UnsupportedGenerator(String),
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
