use ritt::series::{
    log_sum_bounds, log_sum_enumerated, log_sum_upper, max_term_log, term_log, validate,
    SeriesSpec, Verdict,
};

/// `ln(exp(x) - 1)` for `x = c e^{a sigma}`, computed without overflow.
fn closed_form(a: f64, c: f64, sigma: f64) -> f64 {
    let x = c * (a * sigma).exp();
    x + (-(-x).exp_m1()).ln()
}

fn brute_max(spec: &SeriesSpec, sigma: f64, n: u64) -> (u64, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for k in 1..=n {
        let t = term_log(spec, k, sigma).unwrap();
        if t > best.1 {
            best = (k, t);
        }
    }
    best
}

#[test]
fn term_log_example() {
    let s = SeriesSpec::expexp(1.0, 3.0).unwrap();
    let expect = 2.0 * 3f64.ln() - 2f64.ln();
    assert!((term_log(&s, 2, 0.0).unwrap() - expect).abs() < 1e-14);
    assert!((expect - 1.504077).abs() < 1e-6);
}

#[test]
fn max_term_at_sigma_three() {
    let s = SeriesSpec::expexp(1.0, 1.0).unwrap();
    let m = max_term_log(&s, 3.0, 1000).unwrap();
    let (n, v) = brute_max(&s, 3.0, 1000);
    assert_eq!(m.index, n as f64);
    assert_eq!(n, 20);
    let ln20f: f64 = (1..=20).map(|k| (k as f64).ln()).sum();
    assert!((m.value.to_real().unwrap() - (60.0 - ln20f)).abs() < 1e-12);
    assert!((v - 17.6644).abs() < 1e-4);
}

#[test]
fn max_term_matches_enumeration() {
    for &(a, c) in &[(1.0, 1.0), (2.0, 1.0), (1.0, 3.0), (3.0, 2.0), (0.5, 0.1)] {
        let s = SeriesSpec::expexp(a, c).unwrap();
        for i in 0..40 {
            let sigma = -2.0 + 0.25 * i as f64;
            if c * (a * sigma).exp() > 15_000.0 {
                continue;
            }
            let m = max_term_log(&s, sigma, 100_000).unwrap();
            let (n, v) = brute_max(&s, sigma, 20_000);
            // exact ties (e.g. c^n/n! with integer c) may pick either neighbour
            assert!(
                (m.index - n as f64).abs() <= 1.0,
                "a={a} c={c} sigma={sigma}"
            );
            assert!((m.value.to_real().unwrap() - v).abs() < 1e-10 * v.abs().max(1.0));
        }
    }
}

#[test]
fn sum_examples() {
    let s = SeriesSpec::expexp(1.0, 1.0).unwrap();
    let v = log_sum_upper(&s, 0.0, 1e-12).unwrap().to_real().unwrap();
    assert!((v - (std::f64::consts::E - 1.0).ln()).abs() < 1e-11);
    assert!((v - 0.541325).abs() < 1e-6);

    let s = SeriesSpec::expexp(1.0, 2.0).unwrap();
    let v = log_sum_upper(&s, 1.0, 1e-12).unwrap().to_real().unwrap();
    let x = 2.0 * std::f64::consts::E;
    let reference = x + (-(-x).exp()).ln_1p();
    assert!((v - reference).abs() < 1e-11, "{v} vs {reference}");
}

#[test]
fn sum_agrees_with_enumeration() {
    for &(a, c) in &[(1.0, 1.0), (2.0, 1.0), (1.0, 3.0), (3.0, 2.0)] {
        let s = SeriesSpec::expexp(a, c).unwrap();
        for i in 0..30 {
            let sigma = -1.0 + 0.2 * i as f64;
            if c * (a * sigma).exp() > 20_000.0 {
                continue;
            }
            let e = log_sum_enumerated(&s, sigma, 40_000).unwrap();
            let (lo, hi) = log_sum_bounds(&s, sigma, 1e-12).unwrap();
            let slack = 1e-11 + 1e-14 * e.abs();
            assert!(lo <= e + slack && e <= hi + slack, "{lo} {e} {hi}");
            // the requested tolerance is floored at 1e-14 relative to the peak term
            assert!(
                hi - lo <= 1e-12f64.max(1e-14 * e.abs()) + 4.0 * f64::EPSILON * e.abs(),
                "a={a} c={c} sigma={sigma} {lo} {hi}"
            );
        }
    }
}

#[test]
fn sum_regression_against_closed_form() {
    for &(a, c) in &[(1.0, 1.0), (2.0, 1.0), (1.0, 3.0), (3.0, 2.0)] {
        let s = SeriesSpec::expexp(a, c).unwrap();
        for i in 0..=200 {
            let sigma = i as f64 * 0.15;
            let exact = closed_form(a, c, sigma);
            let tol = 1e-11 * exact.abs().max(1.0);
            let (lo, hi) = log_sum_bounds(&s, sigma, tol).unwrap();
            let scale = exact.abs().max(1.0);
            assert!(
                (hi - exact).abs() <= 1e-9 * scale,
                "a={a} c={c} sigma={sigma} hi={hi} exact={exact}"
            );
            assert!(lo <= exact + 1e-13 * scale && exact <= hi + 1e-13 * scale);
        }
    }
}

#[test]
fn sum_dominates_max_term_and_increases() {
    let s = SeriesSpec::expexp(2.0, 1.0).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for i in 0..100 {
        let sigma = i as f64 * 0.3;
        let m = max_term_log(&s, sigma, 1 << 26).unwrap().value;
        let u = log_sum_upper(&s, sigma, 1e-10).unwrap();
        assert!(m <= u);
        let uv = u.to_real().unwrap();
        assert!(uv > prev);
        prev = uv;
    }
}

#[test]
fn coefficient_scaling_shifts_sum() {
    let s = SeriesSpec::expexp(1.0, 3.0).unwrap();
    let t = s.clone().scaled(10.0);
    for sigma in [0.0, 2.5, 7.0] {
        let a = log_sum_upper(&s, sigma, 1e-12).unwrap().to_real().unwrap();
        let b = log_sum_upper(&t, sigma, 1e-12).unwrap().to_real().unwrap();
        assert!((b - a - 10.0).abs() < 1e-9 * a.abs().max(1.0));
    }
}

#[test]
fn validation_verdicts() {
    let r = validate(&SeriesSpec::expexp(1.0, 1.0).unwrap(), 100);
    assert_eq!(r.verdict, Verdict::Pass);
    assert!((r.d_estimate - 3f64.ln() / 3.0).abs() < 1e-12);
    assert!(r.coeff_decay_trend < 0.0);

    let lambda: Vec<f64> = (1..=100).map(|n| 1.0 / n as f64).collect();
    let norms = vec![0.0; 100];
    let r = validate(
        &SeriesSpec::table("reciprocal", lambda, norms).unwrap(),
        100,
    );
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(!r.monotone_ok);

    let lambda: Vec<f64> = (1..=100).map(|n| n as f64).collect();
    let r = validate(
        &SeriesSpec::table("flat", lambda.clone(), lambda).unwrap(),
        100,
    );
    assert_eq!(r.verdict, Verdict::Fail);
}

#[test]
fn table_requests_past_end_fail() {
    let s = SeriesSpec::table("t", vec![1.0, 2.0], vec![0.0, -1.0]).unwrap();
    assert!(term_log(&s, 3, 0.0).is_err());
    let v = log_sum_upper(&s, 1.0, 1e-12).unwrap().to_real().unwrap();
    assert!((v - (1f64.exp() + 1f64.exp()).ln()).abs() < 1e-14);
}
