//! Built-in sources whose indicators are known in closed form.
//!
//! Entries are named `family-param-param...`:
//!
//! * `ee-a-c`: series with `ln M = c e^{a sigma} + o(1)`;
//! * `tower-k-rho-q`: `log^[k] M = rho log^[q] sigma`;
//! * `osc-rho-lambda-p-q`: `log^[p] M = (m0 + m1 sin ln sigma) log^[q] sigma`;
//! * `power-coef-exponent`: `ln M = coef sigma^exponent`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::{GridSpec, Source};
use crate::indicators::{IndexPair, IndicatorKind};
use crate::theorems::{TheoremId, TheoremInstance};

/// Tolerance for regular families on the default linear grid.
pub const REGULAR_TOL: f64 = 1e-3;
/// Tolerance for oscillating profiles on their log grid.
pub const OSC_TOL: f64 = 1e-2;
/// Tolerance for the shifted order `rho(p+1, q+1) = 1`, which converges like `1/log^[q+1] sigma`.
pub const SHIFT_TOL: f64 = 5e-2;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticValue {
    pub kind: IndicatorKind,
    pub p: u32,
    pub q: u32,
    /// Exponent used by type kinds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aux: Option<f64>,
    pub value: f64,
    pub tolerance: f64,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusEntry {
    pub id: String,
    pub source: Source,
    pub grid: GridSpec,
    pub regular: bool,
    pub index_pair: IndexPair,
    pub analytic: Vec<AnalyticValue>,
}

impl CorpusEntry {
    pub fn analytic_value(&self, kind: IndicatorKind, p: u32, q: u32) -> Option<f64> {
        self.analytic
            .iter()
            .find(|a| a.kind == kind && a.p == p && a.q == q)
            .map(|a| a.value)
    }
}

/// Linear grid used for regular families.
pub fn linear_grid() -> GridSpec {
    GridSpec::linear(5.0, 30.0, 200).expect("static grid is valid")
}

/// Log grid covering five periods of `sin ln sigma`.
pub fn oscillation_grid() -> GridSpec {
    GridSpec::log(0.5f64.exp(), (0.5 + 10.0 * PI).exp(), 600).expect("static grid is valid")
}

/// Log grid for towers over `log sigma`.
pub fn log_grid() -> GridSpec {
    GridSpec::log(2.0, 1e6, 200).expect("static grid is valid")
}

fn value(
    kind: IndicatorKind,
    p: u32,
    q: u32,
    aux: Option<f64>,
    v: f64,
    tol: f64,
    note: &str,
) -> AnalyticValue {
    AnalyticValue {
        kind,
        p,
        q,
        aux,
        value: v,
        tolerance: tol,
        note: note.into(),
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

/// Canonical corpus id of a source, if it belongs to a tabulated family.
pub fn id_of(source: &Source) -> Option<String> {
    match source {
        Source::Expexp { a, c, log_scale } if *log_scale == 0.0 => {
            Some(format!("ee-{}-{}", fmt_num(*a), fmt_num(*c)))
        }
        Source::Tower { k, rho, q } => Some(format!("tower-{k}-{}-{q}", fmt_num(*rho))),
        Source::OscProfile { rho, lambda, p, q } => Some(format!(
            "osc-{}-{}-{p}-{q}",
            fmt_num(*rho),
            fmt_num(*lambda)
        )),
        Source::Power { coef, exponent } if *coef == 1.0 => {
            Some(format!("power-1-{}", fmt_num(*exponent)))
        }
        _ => None,
    }
}

/// Builds the entry for a tabulated source.
pub fn entry_for(source: &Source) -> Result<CorpusEntry> {
    use IndicatorKind::*;
    source.check()?;
    let id = id_of(source)
        .ok_or_else(|| Error::UnknownFamily(format!("{} has no analytic table", source.label())))?;
    let entry = match *source {
        Source::Expexp { a, c, .. } => {
            let note = "ln M = c e^{a sigma} + o(1), so log^[2] M = a sigma + ln c + o(1)";
            let tnote = "ln M / (e^sigma)^a -> c";
            let mut analytic = vec![
                value(Order, 2, 0, None, a, REGULAR_TOL, note),
                value(LowerOrder, 2, 0, None, a, REGULAR_TOL, note),
            ];
            for k in [Type, LowerType, WeakTypeTau, WeakTypeTauBar] {
                analytic.push(value(k, 2, 0, Some(a), c, REGULAR_TOL, tnote));
            }
            analytic.push(value(
                Order,
                3,
                1,
                None,
                1.0,
                SHIFT_TOL,
                "log(a sigma + ln c) / log sigma -> 1",
            ));
            CorpusEntry {
                id,
                source: source.clone(),
                grid: linear_grid(),
                regular: true,
                index_pair: IndexPair { p: 2, q: 0 },
                analytic,
            }
        }
        Source::Tower { k, rho, q } => {
            let note = "the rule is log^[k] M = rho log^[q] sigma";
            let tnote = "log^[k-1] M = exp(rho log^[q] sigma) = (log^[q-1] sigma)^rho";
            let mut analytic = vec![
                value(Order, k, q, None, rho, REGULAR_TOL, note),
                value(LowerOrder, k, q, None, rho, REGULAR_TOL, note),
            ];
            for kind in [Type, LowerType, WeakTypeTau, WeakTypeTauBar] {
                analytic.push(value(kind, k, q, Some(rho), 1.0, REGULAR_TOL, tnote));
            }
            analytic.push(value(
                Order,
                k + 1,
                q + 1,
                None,
                1.0,
                SHIFT_TOL,
                "(ln rho + log^[q+1] sigma) / log^[q+1] sigma -> 1",
            ));
            CorpusEntry {
                id,
                source: source.clone(),
                grid: if q == 0 { linear_grid() } else { log_grid() },
                regular: true,
                index_pair: IndexPair { p: k, q },
                analytic,
            }
        }
        Source::OscProfile { rho, lambda, p, q } => {
            let note = "the multiplier (rho+lambda)/2 + (rho-lambda)/2 sin ln sigma ranges over [lambda, rho]";
            CorpusEntry {
                id,
                source: source.clone(),
                grid: oscillation_grid(),
                regular: rho == lambda,
                index_pair: IndexPair { p, q },
                analytic: vec![
                    value(Order, p, q, None, rho, OSC_TOL, note),
                    value(LowerOrder, p, q, None, lambda, OSC_TOL, note),
                    value(
                        Order,
                        p + 1,
                        q + 1,
                        None,
                        1.0,
                        SHIFT_TOL,
                        "(ln m(sigma) + log^[q+1] sigma) / log^[q+1] sigma -> 1 with m bounded",
                    ),
                ],
            }
        }
        Source::Power { coef, exponent } => {
            let note = "log^[2] M = exponent ln sigma + ln coef";
            let mut analytic = vec![
                value(Order, 2, 1, None, exponent, REGULAR_TOL, note),
                value(LowerOrder, 2, 1, None, exponent, REGULAR_TOL, note),
            ];
            for k in [Type, LowerType] {
                analytic.push(value(
                    k,
                    2,
                    1,
                    Some(exponent),
                    coef,
                    REGULAR_TOL,
                    "ln M / sigma^exponent = coef",
                ));
            }
            analytic.push(value(
                Order,
                3,
                2,
                None,
                1.0,
                SHIFT_TOL,
                "log(exponent ln sigma) / log log sigma -> 1",
            ));
            CorpusEntry {
                id,
                source: source.clone(),
                grid: linear_grid(),
                regular: true,
                index_pair: IndexPair { p: 2, q: 1 },
                analytic,
            }
        }
        _ => unreachable!("id_of only accepts tabulated families"),
    };
    Ok(entry)
}

/// Builds an entry from a family id and `key=value` parameters, e.g. `("expexp", "a=2,c=1")`.
pub fn instantiate(family: &str, params: &str) -> Result<CorpusEntry> {
    let source = Source::parse(&format!("{family}:{params}"))?;
    entry_for(&source)
}

/// Resolves a corpus name such as `ee-2-1` or `tower-3-1.5-0`.
pub fn lookup(name: &str) -> Option<CorpusEntry> {
    let mut parts = name.trim().split('-');
    let family = parts.next()?;
    let nums: Vec<f64> = parts.map(|p| p.parse().ok()).collect::<Option<_>>()?;
    let int = |x: f64| (x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64).then_some(x as u32);
    let source = match (family, nums.as_slice()) {
        ("ee", &[a, c]) => Source::Expexp {
            a,
            c,
            log_scale: 0.0,
        },
        ("tower", &[k, rho, q]) => Source::Tower {
            k: int(k)?,
            rho,
            q: int(q)?,
        },
        ("osc", &[rho, lambda, p, q]) => Source::OscProfile {
            rho,
            lambda,
            p: int(p)?,
            q: int(q)?,
        },
        ("power", &[coef, exponent]) => Source::Power { coef, exponent },
        _ => return None,
    };
    entry_for(&source).ok()
}

/// Ids listed by `corpus list`.
pub const REGISTERED: [&str; 14] = [
    "ee-1-1",
    "ee-2-1",
    "ee-1-3",
    "ee-3-2",
    "ee-1-2",
    "ee-1-5",
    "ee-1-6",
    "ee-3-1",
    "tower-3-2-0",
    "tower-2-2-1",
    "tower-1-2-1",
    "tower-3-1.5-1",
    "osc-2-1-2-0",
    "power-1-2",
];

pub fn registry() -> Vec<CorpusEntry> {
    REGISTERED
        .iter()
        .map(|id| lookup(id).expect("registered ids resolve"))
        .collect()
}

/// Closed-form relative indicator of `f` with respect to `g`, when one is known.
///
/// * Two series `c e^{a sigma}`: `M_g^{-1} M_f(sigma) = (a_f sigma + ln(c_f/c_g)) / a_g + o(1)`,
///   so at `(0,0)` the orders are `a_f/a_g` and every type is `(c_f/c_g)^{1/a_g}`.
/// * Two towers with the same `k` and `q`: the composition is
///   `(log^[q])^{-1}(rho_f/rho_g log^[q] sigma)`, so at `(q,q)` the orders are
///   `rho_f/rho_g` and every type is 1.
/// * An oscillating profile against a tower with `k = p` and the same `q`:
///   orders `rho/rho_g` and `lambda/rho_g` at `(q,q)`.
pub fn relative_analytic(
    f: &Source,
    g: &Source,
    kind: IndicatorKind,
    p: u32,
    q: u32,
) -> Option<f64> {
    use IndicatorKind::*;
    match (f, g) {
        (
            Source::Expexp {
                a: af,
                c: cf,
                log_scale: sf,
            },
            Source::Expexp {
                a: ag,
                c: cg,
                log_scale: sg,
            },
        ) if *sf == 0.0 && *sg == 0.0 && p == 0 && q == 0 => match kind {
            RelativeOrder | RelativeLowerOrder => Some(af / ag),
            RelativeType | RelativeLowerType | RelativeWeakTypeTau | RelativeWeakTypeTauBar => {
                Some((cf / cg).powf(1.0 / ag))
            }
            _ => None,
        },
        (
            Source::Tower {
                k: kf,
                rho: rf,
                q: qf,
            },
            Source::Tower {
                k: kg,
                rho: rg,
                q: qg,
            },
        ) if kf == kg && qf == qg && p == *qf && q == *qf => match kind {
            RelativeOrder | RelativeLowerOrder => Some(rf / rg),
            RelativeType | RelativeLowerType | RelativeWeakTypeTau | RelativeWeakTypeTauBar => {
                Some(1.0)
            }
            _ => None,
        },
        (
            Source::OscProfile {
                rho,
                lambda,
                p: pf,
                q: qf,
            },
            Source::Tower { k, rho: rg, q: qg },
        ) if pf == k && qf == qg && p == *qf && q == *qf => match kind {
            RelativeOrder => Some(rho / rg),
            RelativeLowerOrder => Some(lambda / rg),
            _ => None,
        },
        _ => None,
    }
}

/// The fixed batch of theorem instances exercised by the acceptance suite.
pub fn theorem_suite() -> Vec<TheoremInstance> {
    use TheoremId::*;
    let mut out = Vec::new();
    let mut add = |name: &str,
                   id: TheoremId,
                   f: &str,
                   g: &str,
                   h: Option<&str>,
                   mpq: (u32, u32, u32),
                   grid: GridSpec| {
        out.push(
            TheoremInstance::new(id, f, g, h, mpq.0, mpq.1, mpq.2)
                .with_grid(grid)
                .named(name),
        );
    };
    let lin = linear_grid();
    let osc = oscillation_grid();
    let zero = (0, 0, 0);

    // regular series triples
    let (f, g, h) = ("ee-2-1", "ee-1-1", "ee-3-1");
    for (name, id) in [
        ("order-chain", T1),
        ("f-regular", C1),
        ("g-regular", C2),
        ("both-regular", C3),
        ("regular-swap", R1),
    ] {
        add(&format!("series/{name}"), id, f, g, Some(h), zero, lin);
    }
    add(
        "series/equal-orders",
        C4,
        "ee-1-5",
        "ee-1-2",
        Some("ee-1-1"),
        zero,
        lin,
    );
    add("series/order-product", C5, f, g, None, zero, lin);
    add("series/lower-order-product", C6, f, g, None, zero, lin);
    let (f, g, h) = ("ee-1-6", "ee-1-2", "ee-1-3");
    for id in [Tt1, Ct1, Tt2, Ct2, Tt3, Ct3, Tt4, Ct4, T41, T42] {
        add(&format!("series/types-{id}"), id, f, g, Some(h), zero, lin);
    }
    add(
        "series/types-mixed-T41",
        T41,
        "ee-3-2",
        "ee-1-3",
        Some("ee-1-1"),
        zero,
        lin,
    );
    add(
        "series/types-mixed-Tt1",
        Tt1,
        "ee-3-2",
        "ee-1-3",
        Some("ee-1-1"),
        zero,
        lin,
    );

    // towers
    let (f, g, h) = ("tower-3-2-0", "tower-3-1-0", "tower-3-1.5-0");
    add("tower/order-chain", T1, f, g, Some(h), zero, lin);
    add("tower/types", Tt1, f, g, Some(h), zero, lin);
    add("tower/weak-types", Tt4, f, g, Some(h), zero, lin);
    let (f, g, h) = ("tower-2-2-1", "tower-2-1-1", "tower-2-1.5-1");
    add(
        "tower-log/order-chain",
        T1,
        f,
        g,
        Some(h),
        (1, 1, 1),
        log_grid(),
    );
    add(
        "tower-log/both-regular",
        C3,
        f,
        g,
        Some(h),
        (1, 1, 1),
        log_grid(),
    );
    add("tower-log/types", T42, f, g, Some(h), (1, 1, 1), log_grid());

    // oscillating f against regular towers
    let (f, g, h) = ("osc-2-1-2-0", "tower-2-1-0", "tower-2-0.5-0");
    add("osc/order-chain", T1, f, g, Some(h), zero, osc);
    add("osc/g-regular", C2, f, g, Some(h), zero, osc);
    add("osc/swap", R1, f, g, Some(h), zero, osc);
    add("osc/order-product", C5, f, g, None, zero, osc);
    add("osc/lower-order-product", C6, f, g, None, zero, osc);

    // zero and infinite relative orders
    add(
        "degenerate/slow-g",
        C7,
        "tower-2-1-0",
        "tower-2-0.0005-0",
        Some("tower-2-1-0"),
        zero,
        lin,
    );
    add(
        "degenerate/slow-f",
        C8,
        "tower-2-0.0005-0",
        "tower-2-1-0",
        Some("tower-2-1-0"),
        zero,
        lin,
    );
    out
}
