use fdbounds::divergence::{merge_bins, primitive_divergence};
use fdbounds::representation::integral_representation;
use fdbounds::{divergence, make_generator, psi, DiscretePair, ExtReal, Generator};
use proptest::prelude::*;

const KEYS: [&str; 6] = ["kl", "tv", "hellinger", "chi2", "triangular", "capacitory"];

fn g(key: &str) -> Generator {
    make_generator(key, &[]).unwrap()
}

fn normalized(w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Pairs on 2..=6 points with some coordinates exactly zero.
fn pair_strategy() -> impl Strategy<Value = DiscretePair> {
    (2usize..=6).prop_flat_map(|n| {
        let w = || prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.01f64..1.0], n);
        (w(), w()).prop_filter_map("nonzero mass", |(p, q)| {
            if p.iter().sum::<f64>() == 0.0 || q.iter().sum::<f64>() == 0.0 {
                return None;
            }
            DiscretePair::new(normalized(p), normalized(q)).ok()
        })
    })
}

/// Direct sum `sum_{q>0} q f(p/q) + f'(inf) P{q = 0}`, written out here
/// without the library's perspective helper.
fn naive(key: &str, pair: &DiscretePair) -> f64 {
    let gen = g(key);
    let mut total = 0.0;
    for (&p, &q) in pair.p().iter().zip(pair.q()) {
        if q > 0.0 && p == 0.0 {
            total += q * gen.f_at_zero().to_f64();
        } else if q > 0.0 {
            total += q * gen.eval(p / q);
        } else if p > 0.0 {
            total += p * gen.f_prime_at_infinity().to_f64();
        }
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 200,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn nonnegative_and_bounded(pair in pair_strategy()) {
        for key in KEYS {
            let gen = g(key);
            let d = divergence(&gen, &pair);
            prop_assert!(d >= -1e-12, "{key}: {d}");
            prop_assert!(d <= gen.max_divergence_value() + 1e-12, "{key}: {d}");
        }
    }

    #[test]
    fn matches_direct_sum(pair in pair_strategy()) {
        for key in KEYS {
            let d = divergence(&g(key), &pair).to_f64();
            let n = naive(key, &pair);
            if n.is_infinite() {
                prop_assert!(d.is_infinite(), "{key}");
            } else {
                prop_assert!((d - n).abs() <= 1e-12 * (1.0 + n.abs()), "{key}: {d} vs {n}");
            }
        }
    }

    #[test]
    fn symmetric_generators_ignore_order(pair in pair_strategy()) {
        for key in ["tv", "hellinger", "triangular", "capacitory"] {
            let gen = g(key);
            let a = divergence(&gen, &pair);
            let b = divergence(&gen, &pair.swapped());
            prop_assert!(a.abs_diff(b) <= 1e-12, "{key}: {a} vs {b}");
        }
    }

    #[test]
    fn merging_bins_never_increases(pair in pair_strategy(), j in 0usize..5) {
        prop_assume!(j + 1 < pair.n());
        let merged = merge_bins(&pair, j).unwrap();
        for key in KEYS {
            let gen = g(key);
            let before = divergence(&gen, &pair);
            let after = divergence(&gen, &merged);
            prop_assert!(after <= before + 1e-12, "{key}: {after} > {before}");
        }
    }

    #[test]
    fn psi_is_concave_monotone_and_capped(pair in pair_strategy()) {
        let curve = psi(&pair);
        let pts = curve.sample(4.0, 401);
        for w in pts.windows(3) {
            let (s0, a) = w[0];
            let (s1, b) = w[1];
            let (s2, c) = w[2];
            prop_assert!(b + 1e-12 >= a && c + 1e-12 >= b);
            let chord = a + (c - a) * (s1 - s0) / (s2 - s0);
            prop_assert!(b >= chord - 1e-12);
            prop_assert!(b <= s1.min(1.0) + 1e-12);
            prop_assert!(c - b <= (s2 - s1) + 1e-12);
        }
    }

    #[test]
    fn primitive_divergence_is_min_one_s_minus_psi(pair in pair_strategy(), s in 0.05f64..5.0) {
        let direct = primitive_divergence(&pair, s).unwrap();
        let via_psi = s.min(1.0) - psi(&pair).eval(s);
        prop_assert!((direct - via_psi).abs() <= 1e-12);
        let gen = make_generator("primitive", &[s]).unwrap();
        prop_assert!((divergence(&gen, &pair).to_f64() - direct).abs() <= 1e-12);
    }

    #[test]
    fn representation_identity(pair in pair_strategy()) {
        let curve = psi(&pair);
        for key in KEYS {
            let gen = g(key);
            let d = divergence(&gen, &pair);
            let r = integral_representation(&gen, &curve, 1e-10).unwrap();
            match d {
                ExtReal::PosInf => prop_assert_eq!(r, ExtReal::PosInf, "{}", key),
                ExtReal::Finite(x) => {
                    prop_assert!(r.is_finite(), "{key}: representation infinite, direct {x}");
                    prop_assert!((r.to_f64() - x).abs() <= 1e-6 * (1.0 + x), "{key}: {r} vs {x}");
                }
            }
        }
    }
}

#[test]
fn mutually_singular_pair_reaches_max_values() {
    let pair = DiscretePair::new(vec![1.0, 0.0, 0.0], vec![0.0, 0.5, 0.5]).unwrap();
    for key in KEYS {
        let gen = g(key);
        assert!(divergence(&gen, &pair).abs_diff(gen.max_divergence_value()) < 1e-12, "{key}");
    }
}

#[test]
fn tightness_pair_values() {
    // P' = (0, 1 - V, V), Q' = (V, 1 - V, 0): TV = V and every finite
    // divergence equals V (f(0) + f'(inf)).
    for v in [0.1, 0.5, 0.9] {
        let pair = DiscretePair::new(vec![0.0, 1.0 - v, v], vec![v, 1.0 - v, 0.0]).unwrap();
        assert!((divergence(&g("tv"), &pair).to_f64() - v).abs() < 1e-15);
        assert!((divergence(&g("hellinger"), &pair).to_f64() - v).abs() < 1e-15);
        assert!((divergence(&g("triangular"), &pair).to_f64() - 2.0 * v).abs() < 1e-15);
    }
}

#[test]
fn invalid_pairs() {
    assert!(DiscretePair::new(vec![0.5, 0.6], vec![0.5, 0.5]).is_err());
    assert!(DiscretePair::new(vec![0.5, 0.5], vec![1.0]).is_err());
    assert!(DiscretePair::new(vec![-0.1, 1.1], vec![0.5, 0.5]).is_err());
}
