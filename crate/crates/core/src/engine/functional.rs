use crate::ext::ExtReal;
use crate::generators::Generator;

/// A coordinate-separable function of a pair `(p, q)`:
/// `F(p, q) = sum_j term_j(p_j, q_j)`.
#[derive(Clone, Debug)]
pub enum PairFunctional {
    /// `D_f(P||Q)`.
    Divergence(Generator),
    /// `sum_j a_j p_j + b_j q_j`.
    Linear { p_coef: Vec<f64>, q_coef: Vec<f64> },
}

impl PairFunctional {
    #[inline]
    pub fn term(&self, j: usize, p: f64, q: f64) -> ExtReal {
        match self {
            PairFunctional::Divergence(g) => g.perspective(p, q),
            PairFunctional::Linear { p_coef, q_coef } => ExtReal::Finite(p_coef[j] * p + q_coef[j] * q),
        }
    }

    pub fn eval(&self, p: &[f64], q: &[f64]) -> ExtReal {
        match self {
            PairFunctional::Divergence(g) => crate::divergence::divergence_slices(g, p, q),
            PairFunctional::Linear { p_coef, q_coef } => ExtReal::Finite(
                p.iter()
                    .zip(q)
                    .enumerate()
                    .map(|(j, (a, b))| p_coef[j] * a + q_coef[j] * b)
                    .sum(),
            ),
        }
    }

    /// Whether `term` depends on the coordinate index.
    pub fn coordinate_dependent(&self) -> bool {
        matches!(self, PairFunctional::Linear { .. })
    }

    pub fn label(&self) -> String {
        match self {
            PairFunctional::Divergence(g) => g.name().to_string(),
            PairFunctional::Linear { .. } => "linear".to_string(),
        }
    }
}
