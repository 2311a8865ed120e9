//! Evaluation of the relative-growth inequality chains on concrete triples.
//!
//! Notation used in labels, for a triple `(f, g, h)` and indices `(m, p, q)`:
//!
//! * `*_h(f)`: `f` relative to `h` at `(m, q)`;
//! * `*_h(g)`: `g` relative to `h` at `(m, p)`;
//! * `*_g(f)`: `f` relative to `g` at `(p, q)`;
//! * `*_f(g)`: `g` relative to `f` at `(q, p)`.
//!
//! Every chain entry carries an interval from the surrogate pairings, and a
//! link `a <= b` passes when `b - a >= -(tol + halfwidth(a) + halfwidth(b))`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus;
use crate::error::{Error, Result};
use crate::growth::{GridSpec, Source};
use crate::indicators::{
    relative_indicators, CompositionCache, Form, IndicatorEstimate, RelativeSet, Settings,
};

pub const DEFAULT_TOLERANCE: f64 = 2e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    T1,
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    C8,
    R1,
    Tt1,
    Ct1,
    Tt2,
    Ct2,
    Tt3,
    Ct3,
    Tt4,
    Ct4,
    T41,
    T42,
}

impl TheoremId {
    pub const ALL: [TheoremId; 20] = [
        TheoremId::T1,
        TheoremId::C1,
        TheoremId::C2,
        TheoremId::C3,
        TheoremId::C4,
        TheoremId::C5,
        TheoremId::C6,
        TheoremId::C7,
        TheoremId::C8,
        TheoremId::R1,
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

    /// Whether the statement involves the third function `h`.
    pub fn needs_h(self) -> bool {
        !matches!(self, TheoremId::C5 | TheoremId::C6)
    }

    fn needs_types(self) -> bool {
        use TheoremId::*;
        matches!(
            self,
            Tt1 | Ct1 | Tt2 | Ct2 | Tt3 | Ct3 | Tt4 | Ct4 | T41 | T42
        )
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|id| id.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown theorem id '{s}'")))
    }
}

/// A source given inline, in short form, or by corpus name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceRef {
    Text(String),
    Inline(Source),
}

impl SourceRef {
    pub fn resolve(&self) -> Result<Source> {
        match self {
            SourceRef::Inline(s) => {
                s.check()?;
                Ok(s.clone())
            }
            SourceRef::Text(t) => match corpus::lookup(t) {
                Some(entry) => Ok(entry.source),
                None => Source::parse(t),
            },
        }
    }
}

/// A grid given as `lo:hi:count[:log]` or as an object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridRef {
    Text(String),
    Spec(GridSpec),
}

impl GridRef {
    pub fn resolve(&self) -> Result<GridSpec> {
        match self {
            GridRef::Text(t) => GridSpec::parse(t),
            GridRef::Spec(g) => g.checked(),
        }
    }
}

pub fn default_grid() -> GridSpec {
    GridSpec::linear(5.0, 30.0, 200).expect("static grid is valid")
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremInstance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub theorem: TheoremId,
    #[serde(default)]
    pub f: Option<SourceRef>,
    #[serde(default)]
    pub g: Option<SourceRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<SourceRef>,
    #[serde(default)]
    pub m: u32,
    #[serde(default)]
    pub p: u32,
    #[serde(default)]
    pub q: u32,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<Settings>,
}

impl TheoremInstance {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        theorem: TheoremId,
        f: &str,
        g: &str,
        h: Option<&str>,
        m: u32,
        p: u32,
        q: u32,
    ) -> Self {
        TheoremInstance {
            name: None,
            theorem,
            f: Some(SourceRef::Text(f.into())),
            g: Some(SourceRef::Text(g.into())),
            h: h.map(|h| SourceRef::Text(h.into())),
            m,
            p,
            q,
            tolerance: DEFAULT_TOLERANCE,
            grid: None,
            settings: None,
        }
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = Some(GridRef::Spec(grid));
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }
}

/// Parses a batch: either a JSON list of instances or `{"instances": [...]}`.
pub fn load_batch(text: &str) -> Result<Vec<TheoremInstance>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Batch {
        List(Vec<serde_json::Value>),
        Wrapped { instances: Vec<serde_json::Value> },
    }
    let batch: Batch = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let items = match batch {
        Batch::List(v) | Batch::Wrapped { instances: v } => v,
    };
    items
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            serde_json::from_value(v).map_err(|e| Error::Schema(format!("instance {i}: {e}")))
        })
        .collect()
}

/// A value with the interval spanned by the surrogate pairings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Iv {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Iv {
    pub fn exact(v: f64) -> Iv {
        Iv {
            value: v,
            lo: v,
            hi: v,
        }
    }

    fn of(e: &IndicatorEstimate) -> Iv {
        Iv {
            value: e.value,
            lo: e.lo.min(e.value),
            hi: e.hi.max(e.value),
        }
    }

    /// Half the interval width; zero when the interval is unbounded.
    pub fn half_width(&self) -> f64 {
        let w = 0.5 * (self.hi - self.lo);
        if w.is_finite() {
            w.max(0.0)
        } else {
            0.0
        }
    }

    fn from_corners(value: f64, corners: [f64; 4]) -> Iv {
        let good = corners.iter().copied().filter(|c| !c.is_nan());
        let lo = good.clone().fold(f64::INFINITY, f64::min);
        let hi = good.fold(f64::NEG_INFINITY, f64::max);
        if lo > hi {
            Iv::exact(value)
        } else {
            Iv {
                value,
                lo: lo.min(value),
                hi: hi.max(value),
            }
        }
    }

    fn div(self, o: Iv) -> Iv {
        Iv::from_corners(
            self.value / o.value,
            [
                self.lo / o.lo,
                self.lo / o.hi,
                self.hi / o.lo,
                self.hi / o.hi,
            ],
        )
    }

    fn mul(self, o: Iv) -> Iv {
        Iv::from_corners(
            self.value * o.value,
            [
                self.lo * o.lo,
                self.lo * o.hi,
                self.hi * o.lo,
                self.hi * o.hi,
            ],
        )
    }

    /// `self^(1/e)`.
    fn root(self, e: Iv) -> Iv {
        let r = |x: f64, y: f64| x.powf(1.0 / y);
        Iv::from_corners(
            r(self.value, e.value),
            [
                r(self.lo, e.lo),
                r(self.lo, e.hi),
                r(self.hi, e.lo),
                r(self.hi, e.hi),
            ],
        )
    }

    fn min(self, o: Iv) -> Iv {
        Iv {
            value: self.value.min(o.value),
            lo: self.lo.min(o.lo),
            hi: self.hi.min(o.hi),
        }
    }

    fn max(self, o: Iv) -> Iv {
        Iv {
            value: self.value.max(o.value),
            lo: self.lo.max(o.lo),
            hi: self.hi.max(o.hi),
        }
    }
}

/// A labelled term of a chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub label: String,
    #[serde(flatten)]
    pub iv: Iv,
}

impl Term {
    fn constant(v: f64) -> Term {
        Term {
            label: format!("{v}"),
            iv: Iv::exact(v),
        }
    }

    fn over(&self, o: &Term) -> Term {
        Term {
            label: format!("{}/{}", self.label, o.label),
            iv: self.iv.div(o.iv),
        }
    }

    fn times(&self, o: &Term) -> Term {
        Term {
            label: format!("{}*{}", self.label, o.label),
            iv: self.iv.mul(o.iv),
        }
    }

    fn root(&self, e: &Term) -> Term {
        Term {
            label: format!("[{}]^(1/{})", self.label, e.label),
            iv: self.iv.root(e.iv),
        }
    }

    fn fold(terms: &[Term], name: &str, pick: fn(Iv, Iv) -> Iv) -> Term {
        let iv = terms[1..]
            .iter()
            .fold(terms[0].iv, |acc, t| pick(acc, t.iv));
        let labels: Vec<&str> = terms.iter().map(|t| t.label.as_str()).collect();
        Term {
            label: format!("{name}{{{}}}", labels.join(", ")),
            iv,
        }
    }

    fn min_of(terms: &[Term]) -> Term {
        Term::fold(terms, "min", Iv::min)
    }

    fn max_of(terms: &[Term]) -> Term {
        Term::fold(terms, "max", Iv::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Link {
    pub relation: Relation,
    /// `right - left` for `<=`, `-|right - left|` for `=`.
    pub slack: f64,
    pub allowance: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Chain {
    pub title: String,
    pub entries: Vec<Term>,
    /// `links[i]` joins `entries[i]` and `entries[i + 1]`.
    pub links: Vec<Link>,
}

impl Chain {
    fn new(title: impl Into<String>, first: Term) -> Chain {
        Chain {
            title: title.into(),
            entries: vec![first],
            links: Vec::new(),
        }
    }

    fn push(mut self, relation: Relation, next: Term, tol: f64) -> Chain {
        let left = self.entries.last().expect("chains start with one entry");
        let diff = if left.iv.value == next.iv.value {
            0.0
        } else {
            next.iv.value - left.iv.value
        };
        let slack = match relation {
            Relation::Le => diff,
            Relation::Eq => -diff.abs(),
        };
        let allowance = tol + left.iv.half_width() + next.iv.half_width();
        self.links.push(Link {
            relation,
            slack,
            allowance,
            holds: slack >= -allowance,
        });
        self.entries.push(next);
        self
    }

    fn le(self, next: Term, tol: f64) -> Chain {
        self.push(Relation::Le, next, tol)
    }

    fn eq(self, next: Term, tol: f64) -> Chain {
        self.push(Relation::Eq, next, tol)
    }

    pub fn holds(&self) -> bool {
        self.links.iter().all(|l| l.holds)
    }

    /// Smallest `slack + allowance` over the links.
    pub fn margin(&self) -> f64 {
        self.links
            .iter()
            .map(|l| l.slack + l.allowance)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
    /// Required hypotheses gate the verdict; optional ones gate a sub-claim.
    pub required: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Vacuous,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Vacuous => "vacuous",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub theorem: TheoremId,
    pub f: String,
    pub g: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    pub m: u32,
    pub p: u32,
    pub q: u32,
    pub tolerance: f64,
    pub grid: String,
    pub chains: Vec<Chain>,
    pub hypotheses: Vec<Hypothesis>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

impl CheckReport {
    /// Smallest link margin over all chains; `None` when nothing was evaluated.
    pub fn worst_margin(&self) -> Option<f64> {
        self.chains
            .iter()
            .filter(|c| !c.links.is_empty())
            .map(Chain::margin)
            .reduce(f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Who {
    /// `f` relative to `h` at `(m, q)`.
    F,
    /// `g` relative to `h` at `(m, p)`.
    G,
    /// `f` relative to `g` at `(p, q)`.
    R,
    /// `g` relative to `f` at `(q, p)`.
    S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum What {
    Rho,
    Lambda,
    Delta,
    DeltaBar,
    Tau,
    TauBar,
}

fn label(who: Who, what: What) -> String {
    let sym = match what {
        What::Rho => "rho",
        What::Lambda => "lambda",
        What::Delta => "Delta",
        What::DeltaBar => "Delta_bar",
        What::Tau => "tau",
        What::TauBar => "tau_bar",
    };
    let rel = match who {
        Who::F => "h(f)",
        Who::G => "h(g)",
        Who::R => "g(f)",
        Who::S => "f(g)",
    };
    format!("{sym}_{rel}")
}

/// The four relative sets of a triple, filled on demand.
struct Quantities {
    sets: [Option<RelativeSet>; 4],
    settings: Settings,
    tol: f64,
}

impl Quantities {
    fn slot(who: Who) -> usize {
        match who {
            Who::F => 0,
            Who::G => 1,
            Who::R => 2,
            Who::S => 3,
        }
    }

    fn get(&self, who: Who, what: What) -> Option<Term> {
        let set = self.sets[Self::slot(who)].as_ref()?;
        let est = match what {
            What::Rho => Some(&set.rho),
            What::Lambda => Some(&set.lambda),
            What::Delta => set.delta.as_ref(),
            What::DeltaBar => set.delta_bar.as_ref(),
            What::Tau => set.tau.as_ref(),
            What::TauBar => set.tau_bar.as_ref(),
        }?;
        Some(Term {
            label: label(who, what),
            iv: Iv::of(est),
        })
    }

    /// Panics only if called for a symbol that the hypotheses did not check.
    fn t(&self, who: Who, what: What) -> Term {
        self.get(who, what)
            .unwrap_or_else(|| panic!("{} used without being checked", label(who, what)))
    }

    fn finite_nonzero(&self, who: Who, what: What) -> Hypothesis {
        let name = format!("0 < {} < inf", label(who, what));
        match self.get(who, what) {
            Some(t) => Hypothesis {
                name,
                holds: self.settings.finite_nonzero(t.iv.value),
                required: true,
                detail: format!("estimate {}", t.iv.value),
            },
            None => Hypothesis {
                name,
                holds: false,
                required: true,
                detail: "not defined by the estimates".into(),
            },
        }
    }

    fn present(&self, who: Who, what: What) -> Hypothesis {
        let name = format!("{} defined", label(who, what));
        let got = self.get(who, what);
        Hypothesis {
            name,
            holds: got.is_some(),
            required: true,
            detail: got.map_or("its order is not finite and nonzero".into(), |t| {
                format!("estimate {}", t.iv.value)
            }),
        }
    }

    fn equal(&self, a: Term, b: Term, name: String, required: bool) -> Hypothesis {
        let allowance = self.tol + a.iv.half_width() + b.iv.half_width();
        let gap = (a.iv.value - b.iv.value).abs();
        Hypothesis {
            name,
            holds: gap <= allowance || a.iv.value == b.iv.value,
            required,
            detail: format!(
                "|{} - {}| = {gap:.3e}, allowance {allowance:.3e}",
                a.label, b.label
            ),
        }
    }

    fn regular(&self, who: Who, required: bool) -> Hypothesis {
        let name = match who {
            Who::F => "f has regular growth relative to h",
            Who::G => "g has regular growth relative to h",
            Who::R => "f has regular growth relative to g",
            Who::S => "g has regular growth relative to f",
        };
        match (self.get(who, What::Lambda), self.get(who, What::Rho)) {
            (Some(l), Some(r)) => self.equal(l, r, name.into(), required),
            _ => Hypothesis {
                name: name.into(),
                holds: false,
                required,
                detail: "orders not available".into(),
            },
        }
    }
}

struct Resolved {
    f: Source,
    g: Source,
    h: Option<Source>,
    grid: GridSpec,
    settings: Settings,
}

fn resolve(inst: &TheoremInstance) -> Result<Resolved> {
    let need = |r: &Option<SourceRef>, which: &str| -> Result<Source> {
        r.as_ref()
            .ok_or_else(|| {
                Error::IncompleteInstance(format!("{} needs source '{which}'", inst.theorem))
            })?
            .resolve()
    };
    let f = need(&inst.f, "f")?;
    let g = need(&inst.g, "g")?;
    let h = if inst.theorem.needs_h() {
        Some(need(&inst.h, "h")?)
    } else {
        None
    };
    if !(inst.tolerance >= 0.0 && inst.tolerance.is_finite()) {
        return Err(Error::InvalidInput(format!("tolerance {}", inst.tolerance)));
    }
    let grid = match &inst.grid {
        Some(g) => g.resolve()?,
        None => default_grid(),
    };
    Ok(Resolved {
        f,
        g,
        h,
        grid,
        settings: inst.settings.unwrap_or_default(),
    })
}

fn quantities(
    inst: &TheoremInstance,
    r: &Resolved,
    cache: &mut CompositionCache,
) -> Result<Quantities> {
    use TheoremId::*;
    let (m, p, q) = (inst.m, inst.p, inst.q);
    let (want_f, want_g, want_r, want_s) = match inst.theorem {
        C5 | C6 => (false, false, true, true),
        C1 | C2 | C4 => (true, true, true, true),
        _ => (true, true, true, false),
    };
    let types = inst.theorem.needs_types();
    let mut compute =
        |want: bool, a: &Source, b: &Source, i: u32, j: u32| -> Result<Option<RelativeSet>> {
            if !want {
                return Ok(None);
            }
            let mut set =
                relative_indicators(cache, a, b, i, j, &r.grid, Form::Direct, &r.settings)?;
            if !types {
                set.delta = None;
                set.delta_bar = None;
                set.tau = None;
                set.tau_bar = None;
            }
            Ok(Some(set))
        };
    let h = r.h.as_ref();
    let sf = match h {
        Some(h) => compute(want_f, &r.f, h, m, q)?,
        None => None,
    };
    let sg = match h {
        Some(h) => compute(want_g, &r.g, h, m, p)?,
        None => None,
    };
    let sr = compute(want_r, &r.f, &r.g, p, q)?;
    let ss = compute(want_s, &r.g, &r.f, q, p)?;
    Ok(Quantities {
        sets: [sf, sg, sr, ss],
        settings: r.settings,
        tol: inst.tolerance,
    })
}

/// Evaluates one instance with a fresh composition cache.
pub fn check_chain(inst: &TheoremInstance) -> Result<CheckReport> {
    check_with(inst, &mut CompositionCache::new())
}

/// Evaluates one instance, reusing compositions from `cache`.
pub fn check_with(inst: &TheoremInstance, cache: &mut CompositionCache) -> Result<CheckReport> {
    let r = resolve(inst)?;
    let qs = quantities(inst, &r, cache)?;
    let (chains, hypotheses, notes) = evaluate(inst.theorem, &qs);
    let required_ok = hypotheses.iter().filter(|h| h.required).all(|h| h.holds);
    let verdict = if !required_ok || chains.is_empty() {
        Verdict::Vacuous
    } else if chains.iter().all(Chain::holds) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(CheckReport {
        name: inst.name.clone(),
        theorem: inst.theorem,
        f: r.f.label(),
        g: r.g.label(),
        h: r.h.as_ref().map(Source::label),
        m: inst.m,
        p: inst.p,
        q: inst.q,
        tolerance: inst.tolerance,
        grid: r.grid.label(),
        chains: if required_ok { chains } else { Vec::new() },
        hypotheses,
        notes,
        verdict,
    })
}

/// Zero/infinite cases; the same as [`check_chain`] for `C7` and `C8`.
pub fn check_degenerate(inst: &TheoremInstance) -> Result<CheckReport> {
    if !matches!(inst.theorem, TheoremId::C7 | TheoremId::C8) {
        return Err(Error::InvalidInput(format!(
            "{} is not a degenerate-case statement",
            inst.theorem
        )));
    }
    check_chain(inst)
}

/// The two equalities that hold when one of `f`, `g` grows regularly relative to `h`.
pub fn check_remark_swap(
    f: &str,
    g: &str,
    h: &str,
    m: u32,
    p: u32,
    q: u32,
    grid: GridSpec,
) -> Result<CheckReport> {
    check_chain(&TheoremInstance::new(TheoremId::R1, f, g, Some(h), m, p, q).with_grid(grid))
}

/// Evaluates a batch, sharing compositions between instances.
pub fn check_batch(instances: &[TheoremInstance]) -> Vec<Result<CheckReport>> {
    let mut cache = CompositionCache::new();
    instances
        .iter()
        .map(|i| check_with(i, &mut cache))
        .collect()
}

type Evaluation = (Vec<Chain>, Vec<Hypothesis>, Vec<String>);

fn evaluate(id: TheoremId, qs: &Quantities) -> Evaluation {
    use What::*;
    use Who::*;
    let tol = qs.tol;
    let mut hyps: Vec<Hypothesis> = Vec::new();
    let mut notes: Vec<String> = Vec::new();
    let mut chains: Vec<Chain> = Vec::new();

    let orders_fg = |hyps: &mut Vec<Hypothesis>| {
        for (w, k) in [(F, Rho), (F, Lambda), (G, Rho), (G, Lambda)] {
            hyps.push(qs.finite_nonzero(w, k));
        }
    };
    let all_ok = |hyps: &[Hypothesis]| hyps.iter().filter(|h| h.required).all(|h| h.holds);
    let t = |w, k| qs.t(w, k);
    let one = Term::constant(1.0);

    match id {
        TheoremId::T1 => {
            orders_fg(&mut hyps);
            hyps.push(qs.present(R, Rho));
            hyps.push(qs.present(R, Lambda));
            if all_ok(&hyps) {
                let (rf, lf, rg, lg) = (t(F, Rho), t(F, Lambda), t(G, Rho), t(G, Lambda));
                let a = lf.over(&lg);
                let b = rf.over(&rg);
                chains.push(
                    Chain::new("order chain", lf.over(&rg))
                        .le(t(R, Lambda), tol)
                        .le(Term::min_of(&[a.clone(), b.clone()]), tol)
                        .le(Term::max_of(&[a, b]), tol)
                        .le(t(R, Rho), tol)
                        .le(rf.over(&lg), tol),
                );
            }
        }
        TheoremId::C1 | TheoremId::C2 | TheoremId::C3 | TheoremId::C4 => {
            orders_fg(&mut hyps);
            hyps.push(qs.present(R, Rho));
            hyps.push(qs.present(R, Lambda));
            let need_f = matches!(id, TheoremId::C1 | TheoremId::C3 | TheoremId::C4);
            let need_g = matches!(id, TheoremId::C2 | TheoremId::C3 | TheoremId::C4);
            if need_f {
                hyps.push(qs.regular(F, true));
            }
            if need_g {
                hyps.push(qs.regular(G, true));
            }
            if all_ok(&hyps) {
                let (rf, lf, rg, lg) = (t(F, Rho), t(F, Lambda), t(G, Rho), t(G, Lambda));
                let same = qs.equal(
                    rf.clone(),
                    rg.clone(),
                    "rho_h(f) = rho_h(g)".into(),
                    id == TheoremId::C4,
                );
                let same_holds = same.holds;
                hyps.push(same);
                match id {
                    TheoremId::C1 => {
                        chains.push(Chain::new("lower order", t(R, Lambda)).eq(rf.over(&rg), tol));
                        chains.push(Chain::new("order", t(R, Rho)).eq(rf.over(&lg), tol));
                        if same_holds {
                            notes.push(
                                "the unit conclusion mixes orientations; lambda_g(f) and rho_f(g) are checked separately".into(),
                            );
                            chains.push(
                                Chain::new("unit lower order of f relative to g", t(R, Lambda))
                                    .eq(one.clone(), tol),
                            );
                            if let Some(s) = qs.get(S, Rho) {
                                chains.push(
                                    Chain::new("unit order of g relative to f", s)
                                        .eq(one.clone(), tol),
                                );
                            }
                        }
                    }
                    TheoremId::C2 => {
                        chains.push(Chain::new("lower order", t(R, Lambda)).eq(lf.over(&rg), tol));
                        chains.push(Chain::new("order", t(R, Rho)).eq(rf.over(&rg), tol));
                        if same_holds {
                            chains.push(
                                Chain::new("unit order of f relative to g", t(R, Rho))
                                    .eq(one.clone(), tol),
                            );
                            if let Some(s) = qs.get(S, Lambda) {
                                chains.push(
                                    Chain::new("unit lower order of g relative to f", s)
                                        .eq(one.clone(), tol),
                                );
                            }
                        }
                    }
                    TheoremId::C3 => {
                        chains.push(
                            Chain::new("orders", t(R, Lambda))
                                .eq(t(R, Rho), tol)
                                .eq(rf.over(&rg), tol),
                        );
                    }
                    _ => {
                        let mut c = Chain::new("unit orders", t(R, Lambda)).eq(t(R, Rho), tol);
                        if let (Some(ls), Some(rs)) = (qs.get(S, Lambda), qs.get(S, Rho)) {
                            c = c.eq(ls, tol).eq(rs, tol);
                        }
                        chains.push(c.eq(one.clone(), tol));
                    }
                }
            }
        }
        TheoremId::C5 | TheoremId::C6 => {
            let k = if id == TheoremId::C5 { Rho } else { Lambda };
            hyps.push(qs.finite_nonzero(R, k));
            hyps.push(qs.finite_nonzero(S, k));
            if all_ok(&hyps) {
                let prod = t(R, k).times(&t(S, k));
                let c = if id == TheoremId::C5 {
                    Chain::new("product of orders", one.clone()).le(prod.clone(), tol)
                } else {
                    Chain::new("product of lower orders", prod.clone()).le(one.clone(), tol)
                };
                chains.push(c);
                let rr = qs.regular(R, false);
                let rs = qs.regular(S, false);
                let both = rr.holds && rs.holds;
                hyps.push(rr);
                hyps.push(rs);
                if both {
                    chains.push(
                        Chain::new("product under regular growth", prod).eq(one.clone(), tol),
                    );
                }
            }
        }
        TheoremId::C7 | TheoremId::C8 => {
            let eps = qs.settings.eps;
            let big = 1.0 / eps;
            let cases: [(Who, What, bool, What, bool); 4] = if id == TheoremId::C7 {
                [
                    (G, Rho, false, Lambda, true),
                    (G, Lambda, false, Rho, true),
                    (G, Rho, true, Lambda, false),
                    (G, Lambda, true, Rho, false),
                ]
            } else {
                [
                    (F, Rho, false, Rho, false),
                    (F, Lambda, false, Lambda, false),
                    (F, Rho, true, Rho, true),
                    (F, Lambda, true, Lambda, true),
                ]
            };
            let mut any = false;
            for (i, (who, what, hyp_inf, concl, concl_inf)) in cases.into_iter().enumerate() {
                let Some(h) = qs.get(who, what) else { continue };
                let triggered = if hyp_inf {
                    h.iv.value > big
                } else {
                    h.iv.value < eps
                };
                hyps.push(Hypothesis {
                    name: format!(
                        "case ({}): {} {}",
                        ["i", "ii", "iii", "iv"][i],
                        h.label,
                        if hyp_inf { "= inf" } else { "= 0" }
                    ),
                    holds: triggered,
                    required: false,
                    detail: format!("estimate {}, thresholds [{eps}, {big}]", h.iv.value),
                });
                if !triggered {
                    continue;
                }
                any = true;
                let Some(c) = qs.get(R, concl) else { continue };
                let chain = if concl_inf {
                    Chain::new(format!("{} = inf", c.label), Term::constant(big)).le(c, 0.0)
                } else {
                    Chain::new(format!("{} = 0", c.label), c).le(Term::constant(eps), 0.0)
                };
                chains.push(chain);
            }
            hyps.push(Hypothesis {
                name: "some degenerate case applies".into(),
                holds: any,
                required: true,
                detail: String::new(),
            });
            // thresholds are crisp: interval widths do not widen them
            for l in chains.iter_mut().flat_map(|c| c.links.iter_mut()) {
                l.allowance = 0.0;
                l.holds = l.slack >= 0.0;
            }
        }
        TheoremId::R1 => {
            orders_fg(&mut hyps);
            hyps.push(qs.present(R, Rho));
            hyps.push(qs.present(R, Lambda));
            if all_ok(&hyps) {
                let (rf, lf, rg, lg) = (t(F, Rho), t(F, Lambda), t(G, Rho), t(G, Lambda));
                let g_reg = qs.regular(G, false);
                let f_reg = qs.regular(F, false);
                let (gh, fh) = (g_reg.holds, f_reg.holds);
                hyps.push(g_reg);
                hyps.push(f_reg);
                if gh {
                    chains.push(Chain::new("g regular: order", t(R, Rho)).eq(rf.over(&rg), tol));
                    chains.push(
                        Chain::new("g regular: lower order", t(R, Lambda)).eq(lf.over(&lg), tol),
                    );
                }
                if fh {
                    chains.push(Chain::new("f regular: order", t(R, Rho)).eq(lf.over(&lg), tol));
                    chains.push(
                        Chain::new("f regular: lower order", t(R, Lambda)).eq(rf.over(&rg), tol),
                    );
                }
                hyps.push(Hypothesis {
                    name: "f or g has regular growth relative to h".into(),
                    holds: gh || fh,
                    required: true,
                    detail: String::new(),
                });
            }
        }
        _ => type_chains(id, qs, &mut chains, &mut hyps, &mut notes),
    }
    (chains, hyps, notes)
}

fn type_chains(
    id: TheoremId,
    qs: &Quantities,
    chains: &mut Vec<Chain>,
    hyps: &mut Vec<Hypothesis>,
    notes: &mut Vec<String>,
) {
    use What::*;
    use Who::*;
    let tol = qs.tol;
    for w in [F, G] {
        for k in [Rho, Lambda, Delta, DeltaBar, Tau, TauBar] {
            hyps.push(qs.finite_nonzero(w, k));
        }
    }
    let r_needed: &[What] = match id {
        TheoremId::Tt1 | TheoremId::Ct1 => &[Delta],
        TheoremId::Tt2 | TheoremId::Ct2 => &[DeltaBar],
        TheoremId::Tt3 | TheoremId::Ct3 => &[TauBar],
        TheoremId::Tt4 | TheoremId::Ct4 => &[Tau],
        _ => &[Delta, DeltaBar, Tau, TauBar],
    };
    for &k in r_needed {
        hyps.push(qs.present(R, k));
    }
    match id {
        TheoremId::T41 => hyps.push(qs.regular(G, true)),
        TheoremId::T42 => hyps.push(qs.regular(F, true)),
        TheoremId::Ct2 => notes.push(
            "the undefined sigma_h(g) and sigma_bar_h(g) in this bound are read as Delta_h(g) and Delta_bar_h(g)".into(),
        ),
        _ => {}
    }
    if !hyps.iter().filter(|h| h.required).all(|h| h.holds) {
        return;
    }
    let t = |w, k| qs.t(w, k);
    let (rg, lg) = (t(G, Rho), t(G, Lambda));
    // [x_F / y_G]^(1/e_G)
    let b = |x: What, y: What, e: &Term| t(F, x).over(&t(G, y)).root(e);
    match id {
        TheoremId::Tt1 => chains.push(
            Chain::new(
                "type",
                Term::max_of(&[b(DeltaBar, Tau, &lg), b(Delta, TauBar, &lg)]),
            )
            .le(t(R, Delta), tol)
            .le(b(Delta, DeltaBar, &rg), tol),
        ),
        TheoremId::Ct1 => chains.push(Chain::new("type upper bound", t(R, Delta)).le(
            Term::min_of(&[b(TauBar, Tau, &lg), b(TauBar, DeltaBar, &rg)]),
            tol,
        )),
        TheoremId::Tt2 => chains.push(
            Chain::new("lower type", b(DeltaBar, TauBar, &lg))
                .le(t(R, DeltaBar), tol)
                .le(
                    Term::min_of(&[b(DeltaBar, DeltaBar, &rg), b(Delta, Delta, &rg)]),
                    tol,
                ),
        ),
        TheoremId::Ct2 => chains.push(Chain::new("lower type upper bound", t(R, DeltaBar)).le(
            Term::min_of(&[
                b(Tau, Tau, &lg),
                b(TauBar, TauBar, &lg),
                b(TauBar, Delta, &rg),
                b(Tau, DeltaBar, &rg),
            ]),
            tol,
        )),
        TheoremId::Tt3 => chains.push(
            Chain::new(
                "weak type tau_bar",
                Term::max_of(&[b(TauBar, TauBar, &lg), b(Tau, Tau, &lg)]),
            )
            .le(t(R, TauBar), tol)
            .le(b(TauBar, DeltaBar, &rg), tol),
        ),
        TheoremId::Ct3 => chains.push(
            Chain::new(
                "weak type tau_bar lower bound",
                Term::max_of(&[
                    b(DeltaBar, DeltaBar, &rg),
                    b(Delta, Delta, &rg),
                    b(Delta, TauBar, &lg),
                    b(DeltaBar, Tau, &lg),
                ]),
            )
            .le(t(R, TauBar), tol),
        ),
        TheoremId::Tt4 => chains.push(
            Chain::new("weak type tau", b(Tau, TauBar, &lg))
                .le(t(R, Tau), tol)
                .le(
                    Term::min_of(&[b(Tau, DeltaBar, &rg), b(TauBar, Delta, &rg)]),
                    tol,
                ),
        ),
        TheoremId::Ct4 => chains.push(
            Chain::new(
                "weak type tau lower bound",
                Term::max_of(&[b(DeltaBar, Delta, &rg), b(DeltaBar, TauBar, &lg)]),
            )
            .le(t(R, Tau), tol),
        ),
        TheoremId::T41 | TheoremId::T42 => {
            let delta_mid = [b(DeltaBar, DeltaBar, &rg), b(Delta, Delta, &rg)];
            let tau_mid = [b(Tau, Tau, &lg), b(TauBar, TauBar, &lg)];
            let (delta_targets, tau_targets) = if id == TheoremId::T41 {
                ((DeltaBar, Delta), (Tau, TauBar))
            } else {
                ((Tau, TauBar), (DeltaBar, Delta))
            };
            chains.push(
                Chain::new("type bounds", b(DeltaBar, Delta, &rg))
                    .le(t(R, delta_targets.0), tol)
                    .le(Term::min_of(&delta_mid), tol)
                    .le(Term::max_of(&delta_mid), tol)
                    .le(t(R, delta_targets.1), tol)
                    .le(b(Delta, DeltaBar, &rg), tol),
            );
            chains.push(
                Chain::new("weak type bounds", b(Tau, TauBar, &lg))
                    .le(t(R, tau_targets.0), tol)
                    .le(Term::min_of(&tau_mid), tol)
                    .le(Term::max_of(&tau_mid), tol)
                    .le(t(R, tau_targets.1), tol)
                    .le(b(TauBar, Tau, &lg), tol),
            );
        }
        _ => unreachable!("type_chains is only called for type statements"),
    }
}
