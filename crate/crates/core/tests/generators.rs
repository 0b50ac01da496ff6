use fdbounds::divergence::{merge_bins, primitive_divergence};
use fdbounds::generators::{check_invariants, Registry, REGISTRY_KEYS};
use fdbounds::representation::integral_representation;
use fdbounds::{divergence, make_generator, psi, DiscretePair, Error, ExtReal, Generator};

fn g(key: &str) -> Generator {
    make_generator(key, &[]).unwrap()
}

fn pair(p: &[f64], q: &[f64]) -> DiscretePair {
    DiscretePair::new(p.to_vec(), q.to_vec()).unwrap()
}

#[test]
fn limits_of_the_registry() {
    let tv = g("tv");
    assert_eq!(tv.f_at_zero(), ExtReal::Finite(0.5));
    assert_eq!(tv.f_prime_at_infinity(), ExtReal::Finite(0.5));
    let kl = g("kl");
    assert_eq!(kl.f_at_zero(), ExtReal::ZERO);
    assert_eq!(kl.f_prime_at_infinity(), ExtReal::PosInf);
    let cap = g("capacitory");
    let total = cap.f_at_zero().to_f64() + cap.f_prime_at_infinity().to_f64();
    assert!((total - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
    // Numeric confirmation of f(0) and f'(inf) at the ends of the range.
    assert!((cap.eval(1e-8) - cap.f_at_zero().to_f64()).abs() < 1e-6);
    let slope = cap.eval(1e8) / 1e8;
    assert!((slope - cap.f_prime_at_infinity().to_f64()).abs() < 1e-6);
}

#[test]
fn primitive_atoms() {
    let u = make_generator("primitive", &[2.0]).unwrap();
    assert_eq!(u.atoms().len(), 1);
    assert_eq!((u.atoms()[0].location, u.atoms()[0].mass), (2.0, 1.0));
    assert_eq!(u.f_at_zero(), ExtReal::Finite(1.0));
    assert_eq!(u.primitive_parameter(), Some(2.0));
}

#[test]
fn max_values_and_finiteness() {
    assert_eq!(g("tv").max_divergence_value(), ExtReal::Finite(1.0));
    assert_eq!(g("kl").max_divergence_value(), ExtReal::PosInf);
    assert!((g("triangular").max_divergence_value().to_f64() - 2.0).abs() < 1e-15);
    let singular = pair(&[1.0, 0.0], &[0.0, 1.0]);
    assert!((divergence(&g("triangular"), &singular).to_f64() - 2.0).abs() < 1e-15);
    assert!(g("hellinger").is_finite_divergence());
    assert!(!g("kl").is_finite_divergence());
    assert!(!g("chi2").is_finite_divergence());
    for s in [0.1, 1.0, 7.0] {
        assert!(make_generator("primitive", &[s]).unwrap().is_finite_divergence());
    }
}

#[test]
fn every_registry_generator_passes_its_checks() {
    for key in REGISTRY_KEYS {
        let params: &[f64] = match key {
            "power" => &[3.0],
            "primitive" => &[0.7],
            _ => &[],
        };
        let gen = make_generator(key, params).unwrap();
        check_invariants(&gen).unwrap_or_else(|e| panic!("{key}: {e}"));
        assert_eq!(gen.eval(1.0), 0.0, "{key}");
    }
}

#[test]
fn bad_keys_and_parameters() {
    assert!(matches!(make_generator("nope", &[]), Err(Error::UnknownGenerator(_))));
    assert!(make_generator("power", &[1.0]).is_err());
    assert!(make_generator("power", &[]).is_err());
    assert!(make_generator("primitive", &[0.0]).is_err());
    assert!(make_generator("kl", &[1.0]).is_err());
}

#[test]
fn divergence_examples() {
    for key in ["kl", "chi2", "tv", "capacitory"] {
        assert_eq!(divergence(&g(key), &pair(&[0.2, 0.8], &[0.2, 0.8])).to_f64(), 0.0, "{key}");
    }
    let singular = pair(&[1.0, 0.0], &[0.0, 1.0]);
    assert_eq!(divergence(&g("tv"), &singular), ExtReal::Finite(1.0));
    assert_eq!(divergence(&g("kl"), &singular), ExtReal::PosInf);
    let pr = pair(&[0.6, 0.4], &[0.5, 0.5]);
    let chi2 = divergence(&g("chi2"), &pr).to_f64();
    assert!((chi2 - 0.04).abs() < 1e-15);
    let curve = psi(&pr);
    let rep = integral_representation(&g("chi2"), &curve, 1e-10).unwrap().to_f64();
    assert!((rep - 0.04).abs() < 1e-9);
    let rep_kl = integral_representation(&g("kl"), &psi(&pair(&[0.3, 0.7], &[0.3, 0.7])), 1e-10).unwrap();
    assert!(rep_kl.to_f64().abs() < 1e-12);
}

#[test]
fn psi_examples() {
    let id = psi(&pair(&[1.0], &[1.0]));
    for s in [0.0, 0.3, 1.0, 2.5] {
        assert_eq!(id.eval(s), s.min(1.0));
    }
    let singular = psi(&pair(&[1.0, 0.0], &[0.0, 1.0]));
    for s in [0.0, 0.3, 1.0, 2.5, 1e6] {
        assert_eq!(singular.eval(s), 0.0);
    }
    let v = 0.3;
    let tight = psi(&pair(&[1.0 - v, v, 0.0], &[1.0 - v, 0.0, v]));
    for s in [0.0, 0.3, 1.0, 2.5] {
        assert!((tight.eval(s) - (1.0 - v) * s.min(1.0)).abs() < 1e-15);
    }
}

#[test]
fn primitive_divergence_examples() {
    let pr = pair(&[0.1, 0.5, 0.4], &[0.3, 0.3, 0.4]);
    let half_l1 = 0.5 * (0.2 + 0.2);
    assert!((primitive_divergence(&pr, 1.0).unwrap() - half_l1).abs() < 1e-15);
    assert_eq!(primitive_divergence(&pair(&[0.2, 0.8], &[0.2, 0.8]), 2.0).unwrap(), 0.0);
    assert_eq!(primitive_divergence(&pair(&[1.0, 0.0], &[0.0, 1.0]), 2.0).unwrap(), 1.0);
    let u = make_generator("primitive", &[0.6]).unwrap();
    let rep = integral_representation(&u, &psi(&pr), 1e-12).unwrap().to_f64();
    assert!((rep - (0.6 - psi(&pr).eval(0.6))).abs() < 1e-15);
}

#[test]
fn merging_bins() {
    // Indices are 0-based: `j` merges coordinates j and j + 1.
    let merged = merge_bins(&pair(&[0.3, 0.3, 0.4], &[0.2, 0.2, 0.6]), 0).unwrap();
    assert!((merged.p()[0] - 0.6).abs() < 1e-15 && (merged.p()[1] - 0.4).abs() < 1e-15);
    assert!((merged.q()[0] - 0.4).abs() < 1e-15 && (merged.q()[1] - 0.6).abs() < 1e-15);
    // Coordinates 0 and 1 share the ratio 3/2, so nothing changes.
    let orig = pair(&[0.3, 0.3, 0.4], &[0.2, 0.2, 0.6]);
    for key in ["kl", "chi2", "hellinger", "triangular"] {
        let a = divergence(&g(key), &orig).to_f64();
        let b = divergence(&g(key), &merged).to_f64();
        assert!((a - b).abs() < 1e-15, "{key}");
    }
    assert!(merge_bins(&orig, 2).is_err());
}

#[test]
fn custom_generators_from_json() {
    let mut reg = Registry::new();
    reg.load_json(
        r#"[{"name": "mix", "terms": [{"key": "kl", "weight": 1.0}, {"key": "power", "params": [3], "weight": 0.5}]},
            {"name": "sym", "terms": [{"key": "triangular", "weight": 3.0}], "symmetric": true}]"#,
    )
    .unwrap();
    let mix = reg.parse("mix").unwrap();
    let pr = pair(&[0.6, 0.4], &[0.5, 0.5]);
    let expect = divergence(&g("kl"), &pr).to_f64()
        + 0.5 * divergence(&make_generator("power", &[3.0]).unwrap(), &pr).to_f64();
    assert!((divergence(&mix, &pr).to_f64() - expect).abs() < 1e-14);
    assert!(!mix.is_finite_divergence());
    assert!(reg.parse("sym").unwrap().is_symmetric());
    assert!(reg.parse("sym(1)").is_err());
    assert_eq!(reg.parse("tv").unwrap().name(), "tv");
    assert!(reg.load_json(r#"{"name": "neg", "terms": [{"key": "kl", "weight": -1}]}"#).is_err());
    assert!(reg.load_json("{").is_err());
}
