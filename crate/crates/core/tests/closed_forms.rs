use fdbounds::closed_forms::*;
use fdbounds::engine::{solve_b, ConstraintSpec, SolverOptions};
use fdbounds::{make_generator, ExtReal, Generator};

fn g(key: &str) -> Generator {
    make_generator(key, &[]).unwrap()
}

// Frozen from a dense scan of T(q, V) = (1-q) f((1-V-q)/(1-q)) + q f((q+V)/q)
// with f(x) = x log x at step 1e-7, polished by golden section.
const KL_B: [(f64, f64); 9] = [
    (0.1, 0.020044683157953463),
    (0.2, 0.08072672135917602),
    (0.3, 0.18378456526835413),
    (0.4, 0.3324739201897366),
    (0.5, 0.5322979088921695),
    (0.6, 0.792635294480869),
    (0.7, 1.1308920012586257),
    (0.8, 1.5864313242981407),
    (0.9, 2.302182884413005),
];

/// Independent oracle: plain scan of `T(q, V)` for KL, no convexity used.
fn kl_t_scan(v: f64, steps: usize) -> f64 {
    let xlogx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    let t = |q: f64| (1.0 - q) * xlogx((1.0 - v - q) / (1.0 - q)) + q * xlogx((q + v) / q);
    let hi = 1.0 - v;
    (1..steps).map(|i| t(hi * i as f64 / steps as f64)).fold(f64::INFINITY, f64::min)
}

#[test]
fn scan_oracle_reproduces_frozen_kl_values() {
    for (v, b) in KL_B {
        assert!((kl_t_scan(v, 200_000) - b).abs() < 1e-8, "V = {v}");
    }
}

#[test]
fn gilardoni_kl_matches_frozen_values() {
    let kl = g("kl");
    for (v, b) in KL_B {
        let r = gilardoni_b_tv(&kl, v).unwrap();
        assert!((r.value.to_f64() - b).abs() < 1e-9, "V = {v}: {}", r.value);
        let q = r.parameter.unwrap();
        assert!((0.0..=1.0 - v).contains(&q));
    }
}

#[test]
fn gilardoni_at_zero_is_zero() {
    for key in ["kl", "hellinger", "chi2", "triangular"] {
        assert_eq!(gilardoni_b_tv(&g(key), 0.0).unwrap().value, ExtReal::ZERO, "{key}");
    }
}

#[test]
fn hellinger_at_point_six_is_point_two() {
    let hel = g("hellinger");
    assert!((gilardoni_b_tv(&hel, 0.6).unwrap().value.to_f64() - 0.2).abs() < 1e-9);
    assert!((symmetric_b_tv(&hel, 0.6).unwrap().to_f64() - 0.2).abs() < 1e-12);
    assert!((primitive_constraint_b(&hel, 1.0, 0.6).unwrap().value.to_f64() - 0.2).abs() < 1e-9);
}

#[test]
fn symmetric_form_agrees_for_symmetric_generators() {
    for key in ["hellinger", "triangular", "capacitory", "tv"] {
        let gen = g(key);
        assert_eq!(symmetric_b_tv(&gen, 0.0).unwrap(), ExtReal::ZERO);
        for i in 1..=9 {
            let v = i as f64 / 10.0;
            let a = symmetric_b_tv(&gen, v).unwrap();
            let b = gilardoni_b_tv(&gen, v).unwrap().value;
            assert!(a.abs_diff(b) <= 1e-9, "{key} V = {v}: {a} vs {b}");
        }
        let top = symmetric_b_tv(&gen, 1.0).unwrap();
        assert!(top.abs_diff(gen.max_divergence_value()) < 1e-12, "{key}");
    }
}

#[test]
fn symmetric_form_refuses_kl() {
    assert!(symmetric_b_tv(&g("kl"), 0.5).is_err());
}

#[test]
fn out_of_range_arguments() {
    let kl = g("kl");
    assert!(gilardoni_b_tv(&kl, 1.5).is_err());
    assert!(gilardoni_b_tv(&kl, -0.1).is_err());
    assert!(primitive_constraint_b(&kl, 2.0, 1.2).is_err());
    assert!(primitive_constraint_b(&kl, 0.5, 0.6).is_err());
    assert!(power_chi2_a(2.0, 1.0).is_err());
    assert!(topsoe_bounds(2.5).is_err());
}

#[test]
fn primitive_constraint_reduces_to_tv_form_at_one() {
    for key in ["kl", "hellinger", "chi2"] {
        let gen = g(key);
        for i in 0..=9 {
            let d = i as f64 / 10.0;
            let a = primitive_constraint_b(&gen, 1.0, d).unwrap().value;
            let b = gilardoni_b_tv(&gen, d).unwrap().value;
            assert_eq!(a, b, "{key} D = {d}");
        }
    }
}

#[test]
fn primitive_constraint_zero_bound() {
    for s in [0.5, 1.0, 2.0, 3.0] {
        assert_eq!(primitive_constraint_b(&g("kl"), s, 0.0).unwrap().value.to_f64(), 0.0);
    }
}

// Dense scan of the s = 2 two-point family at step 1e-7.
const KL_S2_D03: f64 = 0.5107684749291217;

#[test]
fn primitive_constraint_kl_s2() {
    let r = primitive_constraint_b(&g("kl"), 2.0, 0.3).unwrap();
    assert!((r.value.to_f64() - KL_S2_D03).abs() < 1e-9, "{}", r.value);
    // H = min(1, s) - D = 0.7, q ranges over [0, H/s].
    let q = r.parameter.unwrap();
    assert!((0.0..=0.35).contains(&q));
}

#[test]
fn primitive_constraint_kl_s2_matches_engine() {
    let kl = g("kl");
    let prim = make_generator("primitive", &[2.0]).unwrap();
    let r = solve_b(&kl, &[ConstraintSpec::at_least(prim, 0.3)], &SolverOptions::default()).unwrap();
    assert_eq!(r.n_used, 2);
    assert!((r.value.to_f64() - KL_S2_D03).abs() < 5e-3, "{}", r.value);
}

#[test]
fn tv_constraint_upper_envelope() {
    let hel = g("hellinger");
    for v in [0.0, 0.25, 0.5, 1.0] {
        assert_eq!(tv_constraint_a(&hel, v).unwrap(), ExtReal::Finite(v));
    }
    assert_eq!(tv_constraint_a(&g("kl"), 0.5).unwrap(), ExtReal::PosInf);
    assert_eq!(tv_constraint_a(&g("kl"), 0.0).unwrap(), ExtReal::ZERO);
    let tri = tv_constraint_a(&g("triangular"), 0.5).unwrap().to_f64();
    assert!((tri - 1.0).abs() < 1e-12);
}

#[test]
fn power_formula_values() {
    assert!((power_chi2_a(3.0, 3.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((power_chi2_a(4.0, 7.0).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(power_chi2_a(3.0, 0.0).unwrap(), 0.0);
    let p3 = make_generator("power", &[3.0]).unwrap();
    let p4 = make_generator("power", &[4.0]).unwrap();
    assert!((chi2_a(&p3, 3.0).unwrap() - 1.0).abs() < 1e-12);
    assert!((chi2_a(&p4, 7.0).unwrap() - 1.0).abs() < 1e-12);
    assert!(chi2_a(&p3, 0.0).unwrap().abs() < 1e-12);
    for l in [2.5, 3.0, 3.5, 4.0, 6.0] {
        let p = make_generator("power", &[l]).unwrap();
        for d in [0.1, 0.5, 1.0, 3.0, 7.0, 20.0] {
            let a = chi2_a(&p, d).unwrap();
            let b = power_chi2_a(l, d).unwrap();
            assert!((a - b).abs() <= 1e-12 * (1.0 + b), "l = {l} D = {d}: {a} vs {b}");
        }
    }
}

#[test]
fn inverse_h_certificate_rejects_bad_generators() {
    assert!(chi2_a(&g("hellinger"), 0.5).is_err());
    assert!(chi2_a(&g("tv"), 0.5).is_err());
}

#[test]
fn pinsker_is_not_sharp() {
    assert_eq!(pinsker_reference(0.0).unwrap(), 0.0);
    assert_eq!(pinsker_reference(0.5).unwrap(), 0.5);
    let kl = g("kl");
    let gap = gilardoni_b_tv(&kl, 0.5).unwrap().value.to_f64() - pinsker_reference(0.5).unwrap();
    assert!((gap - 0.0323).abs() < 5e-4, "{gap}");
    for (v, b) in KL_B {
        assert!(b > pinsker_reference(v).unwrap());
    }
}

#[test]
fn topsoe_pairs() {
    assert_eq!(topsoe_bounds(0.0).unwrap(), (0.0, 0.0));
    let (lo, hi) = topsoe_bounds(2.0).unwrap();
    assert_eq!(lo, 1.0);
    assert!((hi - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
    assert!((g("capacitory").max_divergence_value().to_f64() - hi).abs() < 1e-12);
    assert!((g("triangular").max_divergence_value().to_f64() - 2.0).abs() < 1e-12);
}

#[test]
fn topsoe_lower_bound_not_attained_at_one() {
    let cap = g("capacitory");
    let tri = g("triangular");
    let r = solve_b(&cap, &[ConstraintSpec::at_least(tri, 1.0)], &SolverOptions::default()).unwrap();
    assert!(r.value.to_f64() > 0.5 + 0.05, "{}", r.value);
}

#[test]
fn closed_forms_nondecreasing() {
    let kl = g("kl");
    let mut prev = 0.0;
    for i in 0..=20 {
        let v = i as f64 / 20.0;
        let b = gilardoni_b_tv(&kl, v.min(0.99)).unwrap().value.to_f64();
        assert!(b >= prev);
        prev = b;
    }
    let mut prev = 0.0;
    for i in 0..=20 {
        let a = power_chi2_a(3.0, i as f64 * 0.5).unwrap();
        assert!(a >= prev);
        prev = a;
    }
}

#[test]
fn refined_pinsker_is_the_kl_form() {
    for (v, b) in KL_B {
        assert!((refined_pinsker(v).unwrap() - b).abs() < 1e-9);
    }
}
