//! Finite-grid estimates of orders, types and weak types, absolute and relative.
//!
//! Every indicator is a `lim sup` or `lim inf` of a ratio `num(sigma) / den(sigma)`
//! as `sigma -> inf`. On a grid the limit is replaced by the extremum over a
//! tail window. When `num` is, within rounding, an affine function of `den`
//! over the window, the constant term is subtracted first: it does not change
//! the limit but dominates the error on short grids.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{compose_along, GridSpec, Source, Surrogate};
use crate::levelindex::ExtReal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexPair {
    pub p: u32,
    pub q: u32,
}

impl fmt::Display for IndexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorKind {
    Order,
    LowerOrder,
    Type,
    LowerType,
    WeakTypeTau,
    WeakTypeTauBar,
    RelativeOrder,
    RelativeLowerOrder,
    RelativeType,
    RelativeLowerType,
    RelativeWeakTypeTau,
    RelativeWeakTypeTauBar,
}

impl IndicatorKind {
    pub fn mode(self) -> Mode {
        use IndicatorKind::*;
        match self {
            Order
            | Type
            | WeakTypeTauBar
            | RelativeOrder
            | RelativeType
            | RelativeWeakTypeTauBar => Mode::Limsup,
            _ => Mode::Liminf,
        }
    }

    /// Order kinds use `log^[p] / log^[q]`; the others `log^[p-1] / (log^[q-1])^aux`.
    pub fn is_order(self) -> bool {
        use IndicatorKind::*;
        matches!(
            self,
            Order | LowerOrder | RelativeOrder | RelativeLowerOrder
        )
    }

    pub fn is_relative(self) -> bool {
        use IndicatorKind::*;
        matches!(
            self,
            RelativeOrder
                | RelativeLowerOrder
                | RelativeType
                | RelativeLowerType
                | RelativeWeakTypeTau
                | RelativeWeakTypeTauBar
        )
    }

    pub fn name(self) -> &'static str {
        use IndicatorKind::*;
        match self {
            Order => "order",
            LowerOrder => "lower_order",
            Type => "type",
            LowerType => "lower_type",
            WeakTypeTau => "weak_type_tau",
            WeakTypeTauBar => "weak_type_tau_bar",
            RelativeOrder => "relative_order",
            RelativeLowerOrder => "relative_lower_order",
            RelativeType => "relative_type",
            RelativeLowerType => "relative_lower_type",
            RelativeWeakTypeTau => "relative_weak_type_tau",
            RelativeWeakTypeTauBar => "relative_weak_type_tau_bar",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Limsup,
    Liminf,
}

/// Which of the two equivalent relative-order displays is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// `log^[p] M_g^{-1}(M_f(sigma)) / log^[q] sigma`.
    Direct,
    /// `log^[p] t / log^[q] M_f^{-1}(M_g(t))`, obtained by substituting `sigma = M_g(t)`.
    Dual,
}

/// One point of a ratio sequence.
///
/// `num` and `den` are kept when both fit in an `f64`; the offset fit needs them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioPoint {
    pub sigma: f64,
    pub ratio: f64,
    pub num: Option<f64>,
    pub den: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioSequence {
    pub points: Vec<RatioPoint>,
    /// Grid points skipped because an iterated logarithm was undefined there.
    pub dropped: usize,
}

/// Tuning of the tail estimator and of index-pair detection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Fraction of the usable grid forming the tail window.
    pub window: f64,
    /// Smallest tail window, in points.
    pub min_window: usize,
    /// Largest residual of the offset fit, relative to the fitted limit.
    pub fit_tol: f64,
    pub offset_fit: bool,
    /// Largest relative change between the last two windows of a converged estimate.
    pub drift_tol: f64,
    /// Values in `[eps, 1/eps]` count as finite and nonzero.
    pub eps: f64,
    /// Margin above the threshold 1 that applies when `p == q`.
    pub margin: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            window: 0.4,
            min_window: 16,
            fit_tol: 2e-3,
            offset_fit: true,
            drift_tol: 0.05,
            eps: 1e-3,
            margin: 0.1,
        }
    }
}

impl Settings {
    pub fn finite_nonzero(&self, v: f64) -> bool {
        v >= self.eps && v <= 1.0 / self.eps
    }
}

/// Tail statistic of a single sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailStat {
    pub value: f64,
    /// Least-squares slope of the ratio against point index over the window.
    pub trend: f64,
    /// Relative change from the preceding window of the same length.
    pub drift: f64,
    pub converged: bool,
    pub window_points: usize,
    pub offset_corrected: bool,
}

/// Minimum number of usable ratio points.
pub const MIN_POINTS: usize = 8;

/// `lim sup` or `lim inf` of a ratio sequence approximated on its tail.
pub fn tail_estimate(seq: &[RatioPoint], mode: Mode, settings: &Settings) -> Result<TailStat> {
    let n = seq.len();
    if n < MIN_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_POINTS,
            got: n,
        });
    }
    if !(settings.window > 0.0 && settings.window <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "window fraction {}",
            settings.window
        )));
    }
    let w = ((settings.window * n as f64).ceil() as usize)
        .max(settings.min_window)
        .min(n);
    let tail = &seq[n - w..];

    let before = |end: usize| &seq[end.saturating_sub(w)..end];
    let corrected = if settings.offset_fit {
        offset_corrected(tail, before(n - w), settings.fit_tol)
    } else {
        None
    };
    let corrected_flag = corrected.is_some();
    let values: Vec<f64> = corrected.unwrap_or_else(|| tail.iter().map(|p| p.ratio).collect());
    let value = extremum(&values, mode);
    let trend = slope(&values);

    let drift = if n >= 2 * w {
        let prev_tail = &seq[n - 2 * w..n - w];
        let prev: Vec<f64> = if corrected_flag {
            offset_corrected(prev_tail, before(n - 2 * w), settings.fit_tol)
                .unwrap_or_else(|| prev_tail.iter().map(|p| p.ratio).collect())
        } else {
            prev_tail.iter().map(|p| p.ratio).collect()
        };
        relative_change(value, extremum(&prev, mode))
    } else {
        relative_change(value, value - trend * w as f64)
    };
    Ok(TailStat {
        value,
        trend,
        drift,
        converged: drift <= settings.drift_tol,
        window_points: w,
        offset_corrected: corrected_flag,
    })
}

fn extremum(values: &[f64], mode: Mode) -> f64 {
    match mode {
        Mode::Limsup => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Mode::Liminf => values.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let d = (a - b).abs() / a.abs().max(b.abs());
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

/// Least-squares slope of `values` against `0, 1, 2, ...`.
fn slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in values.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Ratios with the fitted constant of `num = L den + C` removed, if the fit is tight.
///
/// The fit is done as `r = L + C u` with `u = 1/den`, so every point is weighted
/// by its relative error; a single unweighted fit over a window where `den`
/// spans many orders of magnitude would let rounding in `C` swamp the small points.
/// `before` holds the points preceding `tail`. The fitted model has to explain
/// them as well, so that a curved sequence is not extrapolated to a wrong limit.
fn offset_corrected(tail: &[RatioPoint], before: &[RatioPoint], fit_tol: f64) -> Option<Vec<f64>> {
    let mut us = Vec::with_capacity(tail.len());
    let mut rs = Vec::with_capacity(tail.len());
    for p in tail {
        let den = p.den.unwrap_or(f64::INFINITY);
        if !(p.ratio.is_finite() && den > 0.0) {
            return None;
        }
        us.push(1.0 / den);
        rs.push(p.ratio);
    }
    let n = us.len() as f64;
    let mu = us.iter().sum::<f64>() / n;
    let mr = rs.iter().sum::<f64>() / n;
    let (mut sur, mut suu) = (0.0, 0.0);
    for (u, r) in us.iter().zip(&rs) {
        sur += (u - mu) * (r - mr);
        suu += (u - mu) * (u - mu);
    }
    if !(suu > 0.0 && suu.is_finite() && sur.is_finite()) {
        return None;
    }
    let c = sur / suu;
    let l = mr - c * mu;
    if !(l.is_finite() && l != 0.0) {
        return None;
    }
    let resid = us
        .iter()
        .zip(&rs)
        .map(|(u, r)| (r - l - c * u).abs())
        .fold(0.0, f64::max);
    let resid_before = before
        .iter()
        .filter(|p| p.ratio.is_finite())
        .map(|p| (p.ratio - l - c / p.den.unwrap_or(f64::INFINITY)).abs())
        .fold(0.0, f64::max);
    let spread = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - rs.iter().copied().fold(f64::INFINITY, f64::min);
    // a flat window carries no offset worth fitting, only rounding noise
    // lower-order terms grow going back, so the earlier points get twice the room
    if resid > fit_tol * l.abs()
        || resid_before > 2.0 * fit_tol * l.abs()
        || spread <= 1e-9 * l.abs()
    {
        return None;
    }
    Some(us.iter().zip(&rs).map(|(u, r)| r - c * u).collect())
}

/// Builds `num / den` with `num = log^[kn](a)` and `den = (log^[kd](b))^exponent`.
///
/// Points where either side is undefined, or `den <= 0`, are dropped.
fn build_ratios<I>(bases: I, kn: i32, kd: i32, exponent: f64) -> RatioSequence
where
    I: IntoIterator<Item = (f64, Option<ExtReal>, Option<ExtReal>)>,
{
    let mut points = Vec::new();
    let mut dropped = 0;
    for (sigma, a, b) in bases {
        let point = (|| {
            let num = a?.iter_log(kn).ok()?;
            let mut den = b?.iter_log(kd).ok()?;
            if !den.is_positive() {
                return None;
            }
            if exponent != 1.0 {
                den = den.pow_scale(exponent).ok()?;
                if !den.is_positive() {
                    return None;
                }
            }
            let ratio = num.ratio(den).ok()?;
            if ratio.is_nan() {
                return None;
            }
            let (nf, df) = (num.to_real().ok(), den.to_real().ok());
            Some(RatioPoint {
                sigma,
                ratio,
                num: nf.filter(|_| df.is_some()),
                den: df.filter(|_| nf.is_some()),
            })
        })();
        match point {
            Some(p) => points.push(p),
            None => dropped += 1,
        }
    }
    RatioSequence { points, dropped }
}

fn log_shifts(kind: IndicatorKind, p: u32, q: u32, aux: Option<f64>) -> Result<(i32, i32, f64)> {
    if kind.is_order() {
        Ok((p as i32, q as i32, 1.0))
    } else {
        let e = aux.ok_or_else(|| {
            Error::InvalidInput(format!("{} needs the order as exponent", kind.name()))
        })?;
        Ok((p as i32 - 1, q as i32 - 1, e))
    }
}

/// Ratio sequence of an absolute indicator under one surrogate.
///
/// The profile stores `ln M`, so `log^[p] M` is `log^[p-1]` of the stored value.
pub fn ratio_sequence(
    source: &Source,
    surrogate: Surrogate,
    grid: &GridSpec,
    kind: IndicatorKind,
    p: u32,
    q: u32,
    aux: Option<f64>,
) -> Result<RatioSequence> {
    if kind.is_relative() {
        return Err(Error::InvalidInput(format!(
            "{} needs two sources; use relative_ratio_sequence",
            kind.name()
        )));
    }
    let (kn, kd, e) = log_shifts(kind, p, q, aux)?;
    let bases: Vec<_> = grid
        .points()
        .into_iter()
        .map(|s| {
            (
                s,
                source.log_modulus(s, surrogate).ok(),
                ExtReal::from_real(s).ok(),
            )
        })
        .collect();
    let seq = build_ratios(bases, kn - 1, kd, e);
    if seq.points.is_empty() {
        return Err(Error::domain(
            "ratio_sequence",
            format!(
                "no grid point of {} admits the ({p},{q}) logarithms",
                grid.label()
            ),
        ));
    }
    Ok(seq)
}

/// Sampled compositions needed by relative indicators.
///
/// For the direct form the values are `M_g^{-1}(M_f(sigma))`; for the dual
/// form `M_f^{-1}(M_g(t))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Composition {
    pub sigmas: Vec<f64>,
    pub values: Vec<Option<f64>>,
}

/// In-memory store of compositions keyed by sources, grid, pairing and form.
#[derive(Debug, Default)]
pub struct CompositionCache {
    map: HashMap<String, Composition>,
}

impl CompositionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// The composition for `f` relative to `g`; `pairing` refers to `f`'s surrogate.
    pub fn get(
        &mut self,
        f: &Source,
        g: &Source,
        grid: &GridSpec,
        pairing: Surrogate,
        form: Form,
    ) -> &Composition {
        let key = format!(
            "{}|{}|{}|{pairing}|{form:?}",
            f.digest(),
            g.digest(),
            grid.label()
        );
        self.map.entry(key).or_insert_with(|| {
            let sigmas = grid.points();
            let values = match form {
                Form::Direct => compose_along(g, f, &sigmas, pairing),
                // the inner modulus is now g's, so the pairing flips to keep
                // `Lower` meaning the smaller relative ratio
                Form::Dual => compose_along(f, g, &sigmas, pairing.other()),
            };
            Composition { sigmas, values }
        })
    }
}

/// Ratio sequence of a relative indicator from a sampled composition.
pub fn relative_ratio_sequence(
    comp: &Composition,
    form: Form,
    kind: IndicatorKind,
    p: u32,
    q: u32,
    aux: Option<f64>,
) -> Result<RatioSequence> {
    let (kn, kd, e) = log_shifts(kind, p, q, aux)?;
    let bases = comp.sigmas.iter().zip(&comp.values).map(|(&s, c)| {
        let s_ext = ExtReal::from_real(s).ok();
        let c_ext = c.and_then(|v| ExtReal::from_real(v).ok());
        match form {
            Form::Direct => (s, c_ext, s_ext),
            Form::Dual => (s, s_ext, c_ext),
        }
    });
    let seq = build_ratios(bases, kn, kd, e);
    if seq.points.is_empty() {
        return Err(Error::domain(
            "relative_ratio_sequence",
            format!("no grid point admits the ({p},{q}) logarithms"),
        ));
    }
    Ok(seq)
}

/// A tail estimate with the spread between the two surrogates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndicatorEstimate {
    pub kind: IndicatorKind,
    pub p: u32,
    pub q: u32,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub trend: f64,
    pub drift: f64,
    pub converged: bool,
    pub window: f64,
    pub grid: String,
    pub offset_corrected: bool,
    pub dropped: usize,
}

impl IndicatorEstimate {
    pub fn half_width(&self) -> f64 {
        let w = 0.5 * (self.hi - self.lo);
        if w.is_nan() {
            0.0
        } else {
            w
        }
    }

    fn combine(
        kind: IndicatorKind,
        p: u32,
        q: u32,
        grid: &GridSpec,
        settings: &Settings,
        parts: [(TailStat, usize); 2],
    ) -> Self {
        let [(a, da), (b, db)] = parts;
        let lo = a.value.min(b.value);
        let hi = a.value.max(b.value);
        let value = if lo == hi { lo } else { 0.5 * (lo + hi) };
        let value = if value.is_nan() { hi } else { value };
        let worst = if a.drift >= b.drift { a } else { b };
        IndicatorEstimate {
            kind,
            p,
            q,
            value,
            lo,
            hi,
            trend: worst.trend,
            drift: worst.drift,
            converged: a.converged && b.converged,
            window: settings.window,
            grid: grid.label(),
            offset_corrected: a.offset_corrected && b.offset_corrected,
            dropped: da.max(db),
        }
    }
}

/// Absolute indicator from both surrogates.
pub fn estimate(
    source: &Source,
    grid: &GridSpec,
    kind: IndicatorKind,
    p: u32,
    q: u32,
    aux: Option<f64>,
    settings: &Settings,
) -> Result<IndicatorEstimate> {
    let mode = kind.mode();
    let mut parts = Vec::with_capacity(2);
    for sur in [Surrogate::Lower, Surrogate::Upper] {
        let seq = ratio_sequence(source, sur, grid, kind, p, q, aux)?;
        parts.push((tail_estimate(&seq.points, mode, settings)?, seq.dropped));
    }
    let parts: [(TailStat, usize); 2] = [parts[0], parts[1]];
    Ok(IndicatorEstimate::combine(
        kind, p, q, grid, settings, parts,
    ))
}

/// Relative indicator of `f` with respect to `g` from both pairings.
#[allow(clippy::too_many_arguments)]
pub fn estimate_relative(
    cache: &mut CompositionCache,
    f: &Source,
    g: &Source,
    grid: &GridSpec,
    form: Form,
    kind: IndicatorKind,
    p: u32,
    q: u32,
    aux: Option<f64>,
    settings: &Settings,
) -> Result<IndicatorEstimate> {
    let mode = kind.mode();
    let mut parts = Vec::with_capacity(2);
    for pairing in [Surrogate::Lower, Surrogate::Upper] {
        let comp = cache.get(f, g, grid, pairing, form);
        let seq = relative_ratio_sequence(comp, form, kind, p, q, aux)?;
        parts.push((tail_estimate(&seq.points, mode, settings)?, seq.dropped));
    }
    let parts: [(TailStat, usize); 2] = [parts[0], parts[1]];
    Ok(IndicatorEstimate::combine(
        kind, p, q, grid, settings, parts,
    ))
}

fn require_finite_nonzero(v: f64, what: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::IndicatorUndefined(format!(
            "{what} must satisfy 0 < {what} < inf, got {v}"
        )))
    }
}

/// `(rho, lambda)` at `(p, q)`.
pub fn order_pair(
    source: &Source,
    p: u32,
    q: u32,
    grid: &GridSpec,
    settings: &Settings,
) -> Result<(IndicatorEstimate, IndicatorEstimate)> {
    Ok((
        estimate(source, grid, IndicatorKind::Order, p, q, None, settings)?,
        estimate(
            source,
            grid,
            IndicatorKind::LowerOrder,
            p,
            q,
            None,
            settings,
        )?,
    ))
}

/// `(Delta, Delta_bar)`, the type and lower type relative to order `rho`.
pub fn type_pair(
    source: &Source,
    p: u32,
    q: u32,
    rho: f64,
    grid: &GridSpec,
    settings: &Settings,
) -> Result<(IndicatorEstimate, IndicatorEstimate)> {
    require_finite_nonzero(rho, "rho")?;
    Ok((
        estimate(source, grid, IndicatorKind::Type, p, q, Some(rho), settings)?,
        estimate(
            source,
            grid,
            IndicatorKind::LowerType,
            p,
            q,
            Some(rho),
            settings,
        )?,
    ))
}

/// `(tau_bar, tau)`, the weak types relative to the lower order `lambda`.
pub fn weak_type_pair(
    source: &Source,
    p: u32,
    q: u32,
    lambda: f64,
    grid: &GridSpec,
    settings: &Settings,
) -> Result<(IndicatorEstimate, IndicatorEstimate)> {
    require_finite_nonzero(lambda, "lambda")?;
    Ok((
        estimate(
            source,
            grid,
            IndicatorKind::WeakTypeTauBar,
            p,
            q,
            Some(lambda),
            settings,
        )?,
        estimate(
            source,
            grid,
            IndicatorKind::WeakTypeTau,
            p,
            q,
            Some(lambda),
            settings,
        )?,
    ))
}

/// The six relative indicators of `f` with respect to `g`.
///
/// Types need a finite nonzero order estimate and weak types a finite nonzero
/// lower order; otherwise they are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelativeSet {
    pub form: Form,
    pub rho: IndicatorEstimate,
    pub lambda: IndicatorEstimate,
    pub delta: Option<IndicatorEstimate>,
    pub delta_bar: Option<IndicatorEstimate>,
    pub tau: Option<IndicatorEstimate>,
    pub tau_bar: Option<IndicatorEstimate>,
}

#[allow(clippy::too_many_arguments)]
pub fn relative_indicators(
    cache: &mut CompositionCache,
    f: &Source,
    g: &Source,
    p: u32,
    q: u32,
    grid: &GridSpec,
    form: Form,
    settings: &Settings,
) -> Result<RelativeSet> {
    use IndicatorKind::*;
    let mut est = |kind, aux| estimate_relative(cache, f, g, grid, form, kind, p, q, aux, settings);
    let rho = est(RelativeOrder, None)?;
    let lambda = est(RelativeLowerOrder, None)?;
    let (delta, delta_bar) = if settings.finite_nonzero(rho.value) {
        (
            Some(est(RelativeType, Some(rho.value))?),
            Some(est(RelativeLowerType, Some(rho.value))?),
        )
    } else {
        (None, None)
    };
    let (tau, tau_bar) = if settings.finite_nonzero(lambda.value) {
        (
            Some(est(RelativeWeakTypeTau, Some(lambda.value))?),
            Some(est(RelativeWeakTypeTauBar, Some(lambda.value))?),
        )
    } else {
        (None, None)
    };
    Ok(RelativeSet {
        form,
        rho,
        lambda,
        delta,
        delta_bar,
        tau,
        tau_bar,
    })
}

/// One scanned candidate during detection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanEntry {
    pub pair: IndexPair,
    /// `None` when no grid point admits the logarithms.
    pub rho: Option<f64>,
    pub converged: bool,
    pub threshold: f64,
    pub admissible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Detection {
    pub pair: IndexPair,
    pub rho: f64,
    pub evidence: Vec<ScanEntry>,
}

fn check_caps(p_max: u32, q_max: u32) -> Result<()> {
    if p_max > 6 || q_max > 6 {
        return Err(Error::InvalidInput(
            "p_max and q_max are limited to 6".into(),
        ));
    }
    Ok(())
}

fn scan<F>(
    candidates: impl IntoIterator<Item = IndexPair>,
    threshold: impl Fn(u32, u32) -> f64,
    settings: &Settings,
    mut rho_at: F,
) -> Result<Detection>
where
    F: FnMut(u32, u32) -> Result<IndicatorEstimate>,
{
    let mut evidence = Vec::new();
    for pair in candidates {
        let IndexPair { p, q } = pair;
        {
            let b = threshold(p, q);
            let entry = match rho_at(p, q) {
                Ok(e) => {
                    let admissible = e.converged
                        && settings.finite_nonzero(e.value)
                        && (b == 0.0 || e.value > b + settings.margin);
                    ScanEntry {
                        pair,
                        rho: Some(e.value),
                        converged: e.converged,
                        threshold: b,
                        admissible,
                    }
                }
                Err(Error::Domain { .. }) | Err(Error::InsufficientData { .. }) => ScanEntry {
                    pair,
                    rho: None,
                    converged: false,
                    threshold: b,
                    admissible: false,
                },
                Err(e) => return Err(e),
            };
            let hit = entry.admissible.then(|| entry.rho.unwrap_or_default());
            evidence.push(entry);
            if let Some(rho) = hit {
                return Ok(Detection {
                    pair,
                    rho,
                    evidence,
                });
            }
        }
    }
    let summary: Vec<String> = evidence
        .iter()
        .map(|e| {
            format!(
                "{}={}",
                e.pair,
                e.rho.map_or("undefined".into(), |v| format!("{v:.4}"))
            )
        })
        .collect();
    Err(Error::DetectionFailed(summary.join(", ")))
}

/// Smallest admissible index-pair.
///
/// `(1,1)` is tried first; then `p` ascends from 1 and, for each `p`, `q`
/// descends from `p - 1`. A candidate needs a converged order estimate in
/// `[eps, 1/eps]`; at `(1,1)` it must also exceed `1 + margin`.
pub fn detect_index_pair(
    source: &Source,
    p_max: u32,
    q_max: u32,
    grid: &GridSpec,
    settings: &Settings,
) -> Result<Detection> {
    check_caps(p_max, q_max)?;
    let diagonal = (q_max >= 1 && p_max >= 1).then_some(IndexPair { p: 1, q: 1 });
    let rest =
        (1..=p_max).flat_map(|p| (0..p.min(q_max + 1)).rev().map(move |q| IndexPair { p, q }));
    scan(
        diagonal.into_iter().chain(rest),
        |p, q| if p == q { 1.0 } else { 0.0 },
        settings,
        |p, q| estimate(source, grid, IndicatorKind::Order, p, q, None, settings),
    )
}

/// Relative index-pair of `f` with respect to `g`: `p` ascends from 0, `q` descends from `p`.
///
/// The threshold 1 applies when `p == q == m`; without `m` it never applies.
#[allow(clippy::too_many_arguments)]
pub fn detect_relative_index_pair(
    cache: &mut CompositionCache,
    f: &Source,
    g: &Source,
    m: Option<u32>,
    p_max: u32,
    q_max: u32,
    grid: &GridSpec,
    settings: &Settings,
) -> Result<Detection> {
    check_caps(p_max, q_max)?;
    let candidates =
        (0..=p_max).flat_map(|p| (0..=p.min(q_max)).rev().map(move |q| IndexPair { p, q }));
    scan(
        candidates,
        |p, q| if p == q && Some(p) == m { 1.0 } else { 0.0 },
        settings,
        |p, q| {
            estimate_relative(
                cache,
                f,
                g,
                grid,
                Form::Direct,
                IndicatorKind::RelativeOrder,
                p,
                q,
                None,
                settings,
            )
        },
    )
}
