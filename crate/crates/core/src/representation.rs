//! Integral representation of an f-divergence through its testing curve:
//!
//! ```text
//! I_f(psi) = int_0^inf (min(1, s) - psi(s)) d nu_f(s)
//! ```
//!
//! with `nu_f` given by the density `f''` plus the generator's atoms. For a
//! pair `(P, Q)`, `I_f(psi_{P,Q}) = D_f(P||Q)`; this module evaluates the
//! right-hand side by quadrature and is used as an independent check of
//! [`crate::divergence::divergence`].

use crate::divergence::PsiCurve;
use crate::ext::ExtReal;
use crate::generators::Generator;
use crate::quadrature::integrate;
use crate::{Error, Result};

/// Width of the mapped tail `t in [1 - delta, 1)` used by the divergence guard.
pub const TAIL_DELTA: f64 = 1e-6;

const MAX_PIECES: usize = 4000;

/// `I_f(curve)` to absolute tolerance `tol`.
///
/// The smooth part is integrated in `t = s / (1 + s)`, split at every knot of
/// the curve and at `s = 1`. The first and last segments get an extra
/// square-root substitution that removes the algebraic endpoint singularities
/// of densities like `s^{-3/2}`.
///
/// Returns `+inf` when `P{q = 0} > 0` and `f'(inf) = inf`, when `Q{p = 0} > 0`
/// and `f(0) = inf`, or when the mapped tail integral over `[1 - delta, 1)`
/// exceeds `1 / delta`.
pub fn integral_representation(g: &Generator, curve: &PsiCurve, tol: f64) -> Result<ExtReal> {
    if !g.has_second_derivative() && g.atoms().is_empty() {
        return Err(Error::UnsupportedGenerator(format!(
            "'{}' has neither a curvature density nor atoms",
            g.name()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::ParameterDomain(format!("tolerance must be positive, got {tol}")));
    }
    if curve.p_mass_at_infinity() > 0.0 && g.f_prime_at_infinity().is_infinite() {
        return Ok(ExtReal::PosInf);
    }
    if curve.q_mass_at_zero() > 0.0 && g.f_at_zero().is_infinite() {
        return Ok(ExtReal::PosInf);
    }

    // Past the largest finite ratio the gap is exactly P{q = 0}; evaluating
    // it as a difference leaves rounding residue that a non-integrable tail
    // density would amplify into a spurious infinity.
    let last_ratio = curve.breakpoints().last().copied().unwrap_or(0.0).max(1.0);
    let p_inf = curve.p_mass_at_infinity();
    let gap = |s: f64| {
        if s >= last_ratio {
            p_inf
        } else {
            (s.min(1.0) - curve.eval(s)).max(0.0)
        }
    };

    let atomic: f64 = g.atoms().iter().map(|a| a.mass * gap(a.location)).sum();

    let smooth = if g.has_second_derivative() {
        let density = |s: f64| g.second_derivative(s).unwrap_or(0.0);
        let mut ts: Vec<f64> = curve
            .breakpoints()
            .into_iter()
            .chain(std::iter::once(1.0))
            .map(|s| s / (1.0 + s))
            .filter(|&t| t > 0.0 && t < 1.0)
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let segments = ts.len() + 1;
        let seg_tol = tol / segments as f64;

        // Interior segments [t_i, t_{i+1}]: ds = dt / (1 - t)^2.
        let mapped = |t: f64| {
            let one_minus = 1.0 - t;
            let s = t / one_minus;
            gap(s) * density(s) / (one_minus * one_minus)
        };
        let mut total = 0.0;
        for w in ts.windows(2) {
            let r = integrate(mapped, w[0], w[1], seg_tol, MAX_PIECES);
            total += r.value;
        }

        // First segment: t = t0 u^2.
        let t0 = ts[0];
        let head = |u: f64| {
            let t = t0 * u * u;
            mapped(t) * 2.0 * t0 * u
        };
        total += integrate(head, 0.0, 1.0, seg_tol, MAX_PIECES).value;

        // Last segment: 1 - t = c u^2, s = (1 - c u^2) / (c u^2).
        let c = 1.0 - ts[ts.len() - 1];
        let tail_at = |u: f64| {
            let one_minus = c * u * u;
            if one_minus == 0.0 {
                return 0.0;
            }
            let s = (1.0 - one_minus) / one_minus;
            gap(s) * density(s) / (one_minus * one_minus) * 2.0 * c * u
        };
        total += integrate(tail_at, 0.0, 1.0, seg_tol, MAX_PIECES).value;

        // Guard: tail mass over t in [1 - delta, 1), i.e. u in [0, sqrt(delta / c)).
        let u_delta = (TAIL_DELTA / c).sqrt().min(1.0);
        let tail = integrate(tail_at, 0.0, u_delta, seg_tol, MAX_PIECES).value;
        if tail > 1.0 / TAIL_DELTA {
            return Ok(ExtReal::PosInf);
        }
        total
    } else {
        0.0
    };

    Ok(ExtReal::Finite(smooth + atomic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{divergence, psi, DiscretePair};
    use crate::generators::make_generator;

    fn pair(p: &[f64], q: &[f64]) -> DiscretePair {
        DiscretePair::new(p.to_vec(), q.to_vec()).unwrap()
    }

    #[test]
    fn primitive_generator_is_a_point_evaluation() {
        let pq = pair(&[0.1, 0.4, 0.5], &[0.3, 0.4, 0.3]);
        let c = psi(&pq);
        for &s in &[0.2, 1.0, 1.5, 3.0] {
            let g = make_generator("primitive", &[s]).unwrap();
            let v = integral_representation(&g, &c, 1e-12).unwrap();
            assert_eq!(v, ExtReal::Finite(s.min(1.0) - c.eval(s)));
        }
    }

    #[test]
    fn kl_of_identical_measures_is_zero() {
        let g = make_generator("kl", &[]).unwrap();
        let c = psi(&pair(&[0.3, 0.7], &[0.3, 0.7]));
        assert_eq!(integral_representation(&g, &c, 1e-9).unwrap(), ExtReal::ZERO);
    }

    #[test]
    fn chi2_matches_direct_value() {
        let g = make_generator("chi2", &[]).unwrap();
        let c = psi(&pair(&[0.6, 0.4], &[0.5, 0.5]));
        let v = integral_representation(&g, &c, 1e-9).unwrap().to_f64();
        assert!((v - 0.04).abs() < 1e-9, "{v}");
    }

    #[test]
    fn zero_masses_handled() {
        // Q{p = 0} > 0 and P{q = 0} > 0 with finite generators.
        let pq = pair(&[0.0, 0.5, 0.5], &[0.4, 0.6, 0.0]);
        for key in ["hellinger", "triangular", "capacitory", "tv"] {
            let g = make_generator(key, &[]).unwrap();
            let direct = divergence(&g, &pq).to_f64();
            let rep = integral_representation(&g, &psi(&pq), 1e-10).unwrap().to_f64();
            assert!((direct - rep).abs() < 1e-7, "{key}: {direct} vs {rep}");
        }
    }

    #[test]
    fn non_finite_cases() {
        let pq = pair(&[0.5, 0.5], &[1.0, 0.0]);
        let kl = make_generator("kl", &[]).unwrap();
        assert_eq!(integral_representation(&kl, &psi(&pq), 1e-9).unwrap(), ExtReal::PosInf);
        assert_eq!(divergence(&kl, &pq), ExtReal::PosInf);
    }

    #[test]
    fn mutually_singular_gives_max_value() {
        let pq = pair(&[1.0, 0.0], &[0.0, 1.0]);
        for key in ["hellinger", "triangular", "capacitory"] {
            let g = make_generator(key, &[]).unwrap();
            let rep = integral_representation(&g, &psi(&pq), 1e-10).unwrap().to_f64();
            let max = g.max_divergence_value().to_f64();
            assert!((rep - max).abs() < 1e-7, "{key}: {rep} vs {max}");
        }
    }
}
