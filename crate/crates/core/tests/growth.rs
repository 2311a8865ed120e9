use ritt::growth::{
    compose_along, compose_relative, compose_with, invert_modulus, sample_profile, GridSpec,
    ProfileCache, Source, Surrogate,
};
use ritt::{Error, ExtReal};

fn expexp(a: f64, c: f64) -> Source {
    Source::Expexp {
        a,
        c,
        log_scale: 0.0,
    }
}

/// `ln(exp(c e^{a sigma}) - 1)`.
fn closed_form(a: f64, c: f64, sigma: f64) -> f64 {
    let x = c * (a * sigma).exp();
    x + (-(-x).exp_m1()).ln()
}

/// Inverse of the closed form: `sigma = ln(ln(1 + e^y) / c) / a`.
fn closed_inverse(a: f64, c: f64, y: f64) -> f64 {
    let l = y + (-y).exp().ln_1p();
    (l / c).ln() / a
}

fn corpus_like_sources() -> Vec<Source> {
    vec![
        expexp(1.0, 1.0),
        expexp(2.0, 1.0),
        expexp(1.0, 3.0),
        expexp(3.0, 2.0),
        Source::Tower {
            k: 2,
            rho: 1.5,
            q: 0,
        },
        Source::Tower {
            k: 3,
            rho: 2.0,
            q: 0,
        },
        Source::Tower {
            k: 2,
            rho: 2.0,
            q: 1,
        },
        Source::Tower {
            k: 1,
            rho: 2.0,
            q: 1,
        },
        Source::OscProfile {
            rho: 2.0,
            lambda: 1.0,
            p: 2,
            q: 0,
        },
        Source::Power {
            coef: 1.0,
            exponent: 2.0,
        },
    ]
}

#[test]
fn parse_short_and_json_forms() {
    let a = Source::parse("expexp:a=2,c=1").unwrap();
    assert_eq!(a, expexp(2.0, 1.0));
    let b = Source::parse(r#"{"family":"expexp","a":1,"c":3}"#).unwrap();
    assert_eq!(b, expexp(1.0, 3.0));
    let c = Source::parse(r#"{"family":"osc_profile","rho":2,"lambda":1,"p":2,"q":0}"#).unwrap();
    assert_eq!(
        c,
        Source::OscProfile {
            rho: 2.0,
            lambda: 1.0,
            p: 2,
            q: 0
        }
    );
    assert_eq!(Source::parse("osc:rho=2,lambda=1,p=2,q=0").unwrap(), c);
    assert!(matches!(
        Source::parse(r#"{"family":"expexp","a":1,"c":3,"b":2}"#),
        Err(Error::Schema(_))
    ));
    assert!(matches!(
        Source::parse("bogus:a=1"),
        Err(Error::UnknownFamily(_))
    ));
    assert!(Source::parse("expexp:a=-1,c=1").is_err());
    for s in corpus_like_sources() {
        assert_eq!(Source::parse(&s.label()).unwrap(), s);
    }
}

#[test]
fn grid_parsing() {
    let g = GridSpec::parse("5:30:200").unwrap();
    let pts = g.points();
    assert_eq!(pts.len(), 200);
    assert_eq!(pts[0], 5.0);
    assert_eq!(pts[199], 30.0);
    let g = GridSpec::parse("1:1000:4:log").unwrap();
    let pts = g.points();
    assert!((pts[1] - 10.0).abs() < 1e-12 && (pts[2] - 100.0).abs() < 1e-10);
    assert!(GridSpec::parse("5:3:10").is_err());
    assert!(GridSpec::parse("5:30").is_err());
}

#[test]
fn profile_matches_closed_form() {
    let grid = GridSpec::linear(1.0, 5.0, 5).unwrap();
    let p = sample_profile(&expexp(1.0, 1.0), &grid, Surrogate::Upper).unwrap();
    for s in &p.samples {
        let v = s.log_m.to_real().unwrap();
        let exact = closed_form(1.0, 1.0, s.sigma);
        assert!((v - exact).abs() <= 1e-11 * exact.abs().max(1.0));
    }
    let first = p.samples[0].log_m.to_real().unwrap();
    assert!((first - 2.650015797211168).abs() < 1e-12);
}

#[test]
fn decreasing_rule_is_rejected() {
    let grid = GridSpec::linear(0.0, 3.0, 4).unwrap();
    let r = sample_profile(
        &Source::Linear {
            slope: -1.0,
            intercept: 0.0,
        },
        &grid,
        Surrogate::Upper,
    );
    assert!(matches!(r, Err(Error::Monotonicity { .. })));
}

#[test]
fn inversion_example() {
    let s = invert_modulus(
        &expexp(1.0, 1.0),
        Surrogate::Upper,
        ExtReal::from_real(std::f64::consts::E).unwrap(),
        None,
    )
    .unwrap();
    let exact = closed_inverse(1.0, 1.0, std::f64::consts::E);
    assert!((s - exact).abs() < 1e-10);
    assert!((s - 1.0232362058844582).abs() < 1e-10);
}

#[test]
fn inversion_below_range_is_an_error() {
    let r = invert_modulus(
        &expexp(1.0, 1.0),
        Surrogate::Upper,
        ExtReal::from_real(-5.0).unwrap(),
        None,
    );
    assert!(matches!(r, Err(Error::Range(_))));
}

#[test]
fn inversion_identity_on_integers() {
    for src in corpus_like_sources() {
        for sur in [Surrogate::Lower, Surrogate::Upper] {
            for i in 1..=30 {
                let sigma = i as f64;
                let y = src.log_modulus(sigma, sur).unwrap();
                let back = invert_modulus(&src, sur, y, None).unwrap();
                assert!(
                    (back - sigma).abs() <= 1e-9,
                    "{} {sur} sigma={sigma} back={back}",
                    src.label()
                );
            }
        }
    }
}

#[test]
fn composition_examples() {
    let g = expexp(1.0, 1.0);
    let up = Surrogate::Upper;
    let s = compose_with(&g, up, &expexp(2.0, 1.0), up, 5.0).unwrap();
    assert!((s - 10.0).abs() < 1e-9, "{s}");
    let s = compose_with(&g, up, &expexp(1.0, std::f64::consts::E), up, 5.0).unwrap();
    assert!((s - 6.0).abs() < 1e-9, "{s}");
    // the certified pairings bracket the value; the max term sits about
    // ln(2 pi x) / 2 below the sum, which moves the root by a few 1e-4 here
    let lo = compose_relative(&g, &expexp(2.0, 1.0), 5.0, Surrogate::Lower).unwrap();
    let hi = compose_relative(&g, &expexp(2.0, 1.0), 5.0, Surrogate::Upper).unwrap();
    assert!(lo < 10.0 && 10.0 < hi && hi - lo < 1e-3);
}

#[test]
fn composition_consistency_and_monotonicity() {
    let f = expexp(3.0, 2.0);
    let g = expexp(1.0, 3.0);
    let mut prev = f64::NEG_INFINITY;
    for i in 0..40 {
        let sigma = 1.0 + 0.5 * i as f64;
        let direct = compose_with(&g, Surrogate::Upper, &f, Surrogate::Upper, sigma).unwrap();
        let y = f.log_modulus(sigma, Surrogate::Upper).unwrap();
        let two_step = invert_modulus(&g, Surrogate::Upper, y, None).unwrap();
        assert_eq!(direct.to_bits(), two_step.to_bits());
        assert!(direct > prev);
        prev = direct;

        let lo = compose_relative(&g, &f, sigma, Surrogate::Lower).unwrap();
        let hi = compose_relative(&g, &f, sigma, Surrogate::Upper).unwrap();
        assert!(lo <= hi + 1e-9 * hi.abs().max(1.0));
    }
}

#[test]
fn sweep_matches_pointwise_composition() {
    let f = expexp(2.0, 1.0);
    let g = expexp(1.0, 1.0);
    let sigmas: Vec<f64> = (0..50).map(|i| 5.0 + 0.5 * i as f64).collect();
    let swept = compose_along(&g, &f, &sigmas, Surrogate::Lower);
    for (s, v) in sigmas.iter().zip(swept) {
        let p = compose_relative(&g, &f, *s, Surrogate::Lower).unwrap();
        let v = v.unwrap();
        assert!((v - p).abs() <= 1e-10 * p.abs().max(1.0));
        // the lower pairing sits below 2s by about ln(2 pi e^{2s}) / (2 e^{2s})
        let x = (2.0 * s).exp();
        let gap = 0.5 * (2.0 * std::f64::consts::PI * x).ln() / x;
        let eps = 1e-11 * s;
        assert!(v < 2.0 * s + eps && (2.0 * s - v) < 2.0 * gap + eps);
    }
}

#[test]
fn cache_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cache = ProfileCache::new(dir.path());
    let grid = GridSpec::linear(5.0, 30.0, 50).unwrap();
    let src = expexp(3.0, 2.0);
    let cold = cache.profile(&src, &grid, Surrogate::Upper).unwrap();
    let warm = cache.profile(&src, &grid, Surrogate::Upper).unwrap();
    assert_eq!(cold, warm);
    assert_eq!(cold, sample_profile(&src, &grid, Surrogate::Upper).unwrap());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
