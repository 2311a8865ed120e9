use ritt::corpus::{self, oscillation_grid};
use ritt::theorems::{
    check_batch, check_chain, check_degenerate, check_remark_swap, default_grid, load_batch,
    CheckReport, TheoremId, TheoremInstance, Verdict,
};
use ritt::Error;

const TOL: f64 = 2e-2;

fn run(id: TheoremId, f: &str, g: &str, h: Option<&str>) -> CheckReport {
    check_chain(&TheoremInstance::new(id, f, g, h, 0, 0, 0)).unwrap()
}

fn values(report: &CheckReport, chain: usize) -> Vec<f64> {
    report.chains[chain]
        .entries
        .iter()
        .map(|e| e.iv.value)
        .collect()
}

fn assert_all_near(vals: &[f64], want: f64, tol: f64) {
    for v in vals {
        assert!((v - want).abs() <= tol, "{vals:?} should all be {want}");
    }
}

#[test]
fn order_chain_on_regular_series() {
    // relative to h, f and g have orders 2/3 and 1/3 everywhere, so every bound is 2
    let r = run(TheoremId::T1, "ee-2-1", "ee-1-1", Some("ee-3-1"));
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.chains.len(), 1);
    let v = values(&r, 0);
    assert_eq!(v.len(), 6);
    assert_all_near(&v, 2.0 / 3.0 / (1.0 / 3.0), TOL);
    assert!(r.hypotheses.iter().all(|h| h.holds));
    assert!(r.worst_margin().unwrap() > 0.0);
}

#[test]
fn type_chain_on_regular_series() {
    // Delta_h(f) = 6/3, tau_h(g) = Delta_h(g) = 2/3, orders 1: every bound is 6/2
    let r = run(TheoremId::Tt1, "ee-1-6", "ee-1-2", Some("ee-1-3"));
    assert_eq!(r.verdict, Verdict::Pass);
    assert_all_near(&values(&r, 0), (6.0 / 3.0) / (2.0 / 3.0), TOL);

    let r = run(TheoremId::T41, "ee-1-6", "ee-1-2", Some("ee-1-3"));
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.chains.len(), 2);
    for c in 0..2 {
        assert_all_near(&values(&r, c), 3.0, TOL);
    }
}

#[test]
fn type_chain_with_nonunit_exponent() {
    // f = ee-3-2, g = ee-1-3 relative to ee-1-1: Delta_h(f) = 2, Delta_h(g) = 3, rho_h(g) = 1,
    // and Delta_g(f) = (2/3)^(1/1)
    let r = run(TheoremId::Tt1, "ee-3-2", "ee-1-3", Some("ee-1-1"));
    assert_eq!(r.verdict, Verdict::Pass);
    assert_all_near(&values(&r, 0), 2.0 / 3.0, TOL);
}

#[test]
fn every_type_statement_passes_on_regular_series() {
    let ids = [
        TheoremId::Tt1,
        TheoremId::Ct1,
        TheoremId::Tt2,
        TheoremId::Ct2,
        TheoremId::Tt3,
        TheoremId::Ct3,
        TheoremId::Tt4,
        TheoremId::Ct4,
        TheoremId::T41,
        TheoremId::T42,
    ];
    let batch: Vec<_> = ids
        .iter()
        .map(|&id| TheoremInstance::new(id, "ee-1-6", "ee-1-2", Some("ee-1-3"), 0, 0, 0))
        .collect();
    for (id, r) in ids.iter().zip(check_batch(&batch)) {
        let r = r.unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{id}");
        assert!(!r.chains.is_empty());
        if *id == TheoremId::Ct2 {
            assert_eq!(r.notes.len(), 1);
        }
    }
}

#[test]
fn order_products() {
    // rho_g(f) = 2 and rho_f(g) = 1/2 for ee-2-1 against ee-1-1
    for id in [TheoremId::C5, TheoremId::C6] {
        let r = run(id, "ee-2-1", "ee-1-1", None);
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.chains.len(), 2, "regular pairs add the equality");
        let prod = r.chains[1].entries[0].iv.value;
        assert!((prod - 1.0).abs() <= TOL, "{prod}");
    }
}

#[test]
fn order_products_for_an_oscillating_pair() {
    // f = osc(2,1) and g = e^{e^sigma}: rho_g(f) = 2, lambda_g(f) = 1, rho_f(g) = 1, lambda_f(g) = 1/2
    let grid = oscillation_grid();
    let inst =
        |id| TheoremInstance::new(id, "osc-2-1-2-0", "tower-2-1-0", None, 0, 0, 0).with_grid(grid);
    let rs = check_batch(&[inst(TheoremId::C5), inst(TheoremId::C6)]);
    let c5 = rs[0].as_ref().unwrap();
    let c6 = rs[1].as_ref().unwrap();
    assert_eq!(c5.verdict, Verdict::Pass);
    assert_eq!(c6.verdict, Verdict::Pass);
    assert_eq!(c5.chains.len(), 1, "no equality without regular growth");
    assert!((c5.chains[0].entries[1].iv.value - 2.0).abs() <= 5e-2);
    assert!((c6.chains[0].entries[0].iv.value - 0.5).abs() <= 5e-2);
}

#[test]
fn corollaries_on_regular_series() {
    let ids = [TheoremId::C1, TheoremId::C2, TheoremId::C3];
    let batch: Vec<_> = ids
        .iter()
        .map(|&id| TheoremInstance::new(id, "ee-2-1", "ee-1-1", Some("ee-3-1"), 0, 0, 0))
        .collect();
    for (id, r) in ids.iter().zip(check_batch(&batch)) {
        let r = r.unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{id}");
        for c in 0..r.chains.len() {
            assert_all_near(&values(&r, c), 2.0, TOL);
        }
    }
}

#[test]
fn equal_orders_give_unit_relative_orders() {
    let r = run(TheoremId::C4, "ee-1-5", "ee-1-2", Some("ee-1-1"));
    assert_eq!(r.verdict, Verdict::Pass);
    let v = values(&r, 0);
    assert_eq!(
        v.len(),
        5,
        "lambda, rho of g(f), lambda, rho of f(g), then 1"
    );
    assert_all_near(&v, 1.0, TOL);

    // C4 needs equal orders relative to h
    let r = run(TheoremId::C4, "ee-2-1", "ee-1-1", Some("ee-3-1"));
    assert_eq!(r.verdict, Verdict::Vacuous);
    assert!(r.chains.is_empty());
}

#[test]
fn mixed_orientation_unit_claims_are_reported_separately() {
    let r = run(TheoremId::C1, "ee-1-5", "ee-1-2", Some("ee-1-1"));
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.chains.len(), 4);
    assert!(!r.notes.is_empty());
    for c in &r.chains[2..] {
        assert!((c.entries[0].iv.value - 1.0).abs() <= TOL);
    }
}

#[test]
fn degenerate_cases() {
    let grid = default_grid();
    // rho_h(g) = 0.0005: lambda_g(f) = rho_g(f) = 2000
    let inst = TheoremInstance::new(
        TheoremId::C7,
        "tower-2-1-0",
        "tower-2-0.0005-0",
        Some("tower-2-1-0"),
        0,
        0,
        0,
    )
    .with_grid(grid);
    let r = check_degenerate(&inst).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.chains.len(), 2, "cases (i) and (ii) trigger");
    for c in &r.chains {
        let v = c.entries[1].iv.value;
        assert!((v - 2000.0).abs() < 1.0, "{v}");
        assert!(c.links.iter().all(|l| l.allowance == 0.0));
    }

    let inst = TheoremInstance::new(
        TheoremId::C8,
        "tower-2-0.0005-0",
        "tower-2-1-0",
        Some("tower-2-1-0"),
        0,
        0,
        0,
    );
    let r = check_degenerate(&inst).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.chains.len(), 2);
    for c in &r.chains {
        assert!((c.entries[0].iv.value - 0.0005).abs() < 1e-6);
    }

    // nothing degenerate about ordinary series
    let r = check_degenerate(&TheoremInstance::new(
        TheoremId::C7,
        "ee-2-1",
        "ee-1-1",
        Some("ee-3-1"),
        0,
        0,
        0,
    ))
    .unwrap();
    assert_eq!(r.verdict, Verdict::Vacuous);

    let err = check_degenerate(&TheoremInstance::new(
        TheoremId::T1,
        "ee-2-1",
        "ee-1-1",
        Some("ee-3-1"),
        0,
        0,
        0,
    ));
    assert!(matches!(err, Err(Error::InvalidInput(_))));
}

#[test]
fn regular_swap() {
    let r = check_remark_swap("ee-2-1", "ee-1-1", "ee-3-1", 0, 0, 0, default_grid()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.chains.len(), 4, "both branches apply");
    for c in 0..4 {
        assert_all_near(&values(&r, c), 2.0, TOL);
    }

    // f oscillates, g is regular relative to h: rho_g(f) = 4/2, lambda_g(f) = 2/2
    let grid = oscillation_grid();
    let r =
        check_remark_swap("osc-2-1-2-0", "tower-2-1-0", "tower-2-0.5-0", 0, 0, 0, grid).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.chains.len(), 2, "only the first branch applies");
    assert_all_near(&values(&r, 0), 2.0, 5e-2);
    assert_all_near(&values(&r, 1), 1.0, 5e-2);

    let r =
        check_remark_swap("osc-2-1-2-0", "osc-3-1.5-2-0", "tower-2-1-0", 0, 0, 0, grid).unwrap();
    assert_eq!(r.verdict, Verdict::Vacuous);
    assert!(r.chains.is_empty());
}

#[test]
fn missing_sources_are_reported() {
    let mut inst = TheoremInstance::new(TheoremId::T1, "ee-2-1", "ee-1-1", None, 0, 0, 0);
    assert!(matches!(
        check_chain(&inst),
        Err(Error::IncompleteInstance(_))
    ));
    inst.theorem = TheoremId::C5;
    assert!(check_chain(&inst).is_ok(), "C5 does not use h");
    inst.g = None;
    assert!(matches!(
        check_chain(&inst),
        Err(Error::IncompleteInstance(_))
    ));
}

#[test]
fn batch_files() {
    let text = r#"[
        {"theorem": "T1", "f": "ee-2-1", "g": "ee-1-1", "h": "ee-3-1"},
        {"theorem": "C5", "f": {"family": "expexp", "a": 2, "c": 1}, "g": "expexp:a=1,c=1",
         "grid": "5:30:200", "tolerance": 0.05}
    ]"#;
    let batch = load_batch(text).unwrap();
    assert_eq!(batch.len(), 2);
    assert_eq!(batch[1].tolerance, 0.05);
    let wrapped = format!("{{\"instances\": {text}}}");
    assert_eq!(load_batch(&wrapped).unwrap(), batch);
    let reports = check_batch(&batch);
    assert!(reports
        .iter()
        .all(|r| r.as_ref().unwrap().verdict == Verdict::Pass));

    assert!(matches!(
        load_batch(r#"[{"theorem": "T9"}]"#),
        Err(Error::Schema(_))
    ));
    assert!(matches!(
        load_batch(r#"[{"theorem": "T1", "k": 1}]"#),
        Err(Error::Schema(_))
    ));
}

#[test]
fn theorem_ids_parse() {
    for id in TheoremId::ALL {
        assert_eq!(
            id.to_string().to_lowercase().parse::<TheoremId>().unwrap(),
            id
        );
    }
    assert!("T5".parse::<TheoremId>().is_err());
}

#[test]
fn negative_tolerance_is_rejected() {
    let mut inst = TheoremInstance::new(TheoremId::C5, "ee-2-1", "ee-1-1", None, 0, 0, 0);
    inst.tolerance = -1.0;
    assert!(matches!(check_chain(&inst), Err(Error::InvalidInput(_))));
}

#[test]
fn suite_is_large_and_named() {
    let suite = corpus::theorem_suite();
    assert!(suite.len() >= 20);
    let mut names: Vec<_> = suite.iter().map(|i| i.name.clone().unwrap()).collect();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), suite.len());
}
