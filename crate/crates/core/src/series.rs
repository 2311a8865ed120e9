//! Vector-valued Dirichlet series described by their exponents and coefficient norms.
//!
//! Only the norms `||a_n||` matter for growth, so a series is specified by
//! the pair of sequences `lambda_n` and `ln ||a_n||`. Two surrogates of the
//! log-modulus are provided: the maximal term (a lower bound) and a
//! certified upper bound on `ln sum ||a_n|| exp(sigma lambda_n)`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::levelindex::{lse_accumulate, ExtReal, LseAccumulator};

/// Largest number of terms enumerated for non log-concave families.
pub const TERM_CAP: u64 = 1 << 26;

/// Coefficient rule of a series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesFamily {
    /// `lambda_n = a n`, `||a_n|| = c^n / n!`; the sum is `exp(c e^{a sigma}) - 1`.
    ExpExp { a: f64, c: f64 },
    /// A finite Dirichlet polynomial given term by term (index `n` is entry `n - 1`).
    Table {
        lambda: Vec<f64>,
        log_norm: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub name: String,
    pub family: SeriesFamily,
    /// Added to every `ln ||a_n||`; scales all coefficients by `exp(log_scale)`.
    #[serde(default)]
    pub log_scale: f64,
}

/// Location and value of the maximal term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaxTerm {
    /// Index of the first maximising term. Exact as an integer below `2^53`.
    pub index: f64,
    /// `ln(||a_n|| exp(sigma lambda_n))` at that index.
    pub value: ExtReal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub monotone_ok: bool,
    /// `max ln n / lambda_n` over the inspected window.
    pub d_estimate: f64,
    /// Least-squares slope of `ln ||a_n|| / lambda_n` over the second half of the window.
    pub coeff_decay_trend: f64,
    pub notes: Vec<String>,
}

impl SeriesSpec {
    pub fn expexp(a: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "expexp needs positive finite a and c, got a={a}, c={c}"
            )));
        }
        Ok(SeriesSpec {
            name: format!("expexp(a={a},c={c})"),
            family: SeriesFamily::ExpExp { a, c },
            log_scale: 0.0,
        })
    }

    pub fn table(name: impl Into<String>, lambda: Vec<f64>, log_norm: Vec<f64>) -> Result<Self> {
        if lambda.len() != log_norm.len() || lambda.is_empty() {
            return Err(Error::InvalidInput(
                "table needs equally long, non-empty lambda and log_norm".into(),
            ));
        }
        if lambda.iter().any(|l| !l.is_finite()) || log_norm.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidInput(
                "table contains non-finite entries".into(),
            ));
        }
        Ok(SeriesSpec {
            name: name.into(),
            family: SeriesFamily::Table { lambda, log_norm },
            log_scale: 0.0,
        })
    }

    /// Returns a copy whose coefficients are all multiplied by `exp(k)`.
    pub fn scaled(mut self, k: f64) -> Self {
        self.log_scale += k;
        self
    }

    pub fn check(&self) -> Result<()> {
        match &self.family {
            SeriesFamily::ExpExp { a, c } => SeriesSpec::expexp(*a, *c).map(|_| ()),
            SeriesFamily::Table { lambda, log_norm } => {
                SeriesSpec::table("", lambda.clone(), log_norm.clone()).map(|_| ())
            }
        }
        .and_then(|_| {
            if self.log_scale.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput("log_scale must be finite".into()))
            }
        })
    }

    /// Exponent `lambda_n` for `n >= 1`.
    pub fn lambda(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidInput("term indices start at 1".into()));
        }
        match &self.family {
            SeriesFamily::ExpExp { a, .. } => Ok(a * n as f64),
            SeriesFamily::Table { lambda, .. } => {
                lambda
                    .get((n - 1) as usize)
                    .copied()
                    .ok_or(Error::TableExhausted {
                        n,
                        len: lambda.len(),
                    })
            }
        }
    }

    /// `ln ||a_n||`, possibly `-inf` for vanishing coefficients.
    pub fn log_norm(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidInput("term indices start at 1".into()));
        }
        let v = match &self.family {
            SeriesFamily::ExpExp { c, .. } => n as f64 * c.ln() - ln_factorial(n as f64),
            SeriesFamily::Table { log_norm, .. } => {
                *log_norm
                    .get((n - 1) as usize)
                    .ok_or(Error::TableExhausted {
                        n,
                        len: log_norm.len(),
                    })?
            }
        };
        Ok(v + self.log_scale)
    }

    fn table_len(&self) -> Option<usize> {
        match &self.family {
            SeriesFamily::Table { lambda, .. } => Some(lambda.len()),
            SeriesFamily::ExpExp { .. } => None,
        }
    }
}

/// `ln n!` for real `n >= 0`.
pub fn ln_factorial(n: f64) -> f64 {
    if n < 2.0 {
        0.0
    } else {
        ln_gamma(n + 1.0)
    }
}

/// `ln((n + k)! / n!)` for `n >= 0` and `n + k >= 0`, accurate for large `n`.
///
/// The shifted index `n + k` is never formed explicitly, so offsets far below
/// the resolution of `n` still produce the right curvature.
pub fn ln_factorial_diff(n: f64, k: f64) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    let big = n + 1.0;
    if big < 1e3 || big + k < 1e3 {
        return ln_factorial(n + k) - ln_factorial(n);
    }
    // Stirling difference lnGamma(big + k) - lnGamma(big)
    let rel = (k / big).ln_1p();
    let ln_top = big.ln() + rel;
    let main = (big - 0.5) * rel + k * ln_top - k;
    main + stirling_tail(big + k) - stirling_tail(big)
}

fn stirling_tail(z: f64) -> f64 {
    let z2 = z * z;
    (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / (1260.0 * z2)) / z2) / z
}

/// `ln(||a_n|| exp(sigma lambda_n))`.
pub fn term_log(spec: &SeriesSpec, n: u64, sigma: f64) -> Result<f64> {
    let ln = spec.log_norm(n)?;
    if ln == f64::NEG_INFINITY {
        return Ok(ln);
    }
    Ok(ln + sigma * spec.lambda(n)?)
}

/// Checks the standing assumptions on the exponents and coefficients over `1..=n_max`.
pub fn validate(spec: &SeriesSpec, n_max: u64) -> ValidationReport {
    let mut notes = Vec::new();
    let mut lambdas = Vec::new();
    let mut norms = Vec::new();
    for n in 1..=n_max.max(2) {
        match (spec.lambda(n), spec.log_norm(n)) {
            (Ok(l), Ok(v)) => {
                lambdas.push(l);
                norms.push(v);
            }
            (Err(e), _) | (_, Err(e)) => {
                notes.push(format!("generator stopped: {e}"));
                break;
            }
        }
    }
    if lambdas.len() < 2 {
        notes.push("fewer than two terms available".into());
        return ValidationReport {
            verdict: Verdict::Fail,
            monotone_ok: false,
            d_estimate: f64::NAN,
            coeff_decay_trend: f64::NAN,
            notes,
        };
    }

    let monotone_ok = lambdas[0] > 0.0 && lambdas.windows(2).all(|w| w[1] > w[0]);
    if !monotone_ok {
        notes.push("exponents are not positive and strictly increasing".into());
    }

    let mut d_estimate = f64::NEG_INFINITY;
    let mut d_arg = 0;
    for (i, l) in lambdas.iter().enumerate() {
        let d = ((i + 1) as f64).ln() / l;
        if d > d_estimate {
            d_estimate = d;
            d_arg = i;
        }
    }

    let half = lambdas.len() / 2;
    let pts: Vec<(f64, f64)> = (half..lambdas.len())
        .filter(|&i| norms[i].is_finite())
        .map(|i| ((i + 1) as f64, norms[i] / lambdas[i]))
        .collect();
    let coeff_decay_trend = ls_slope(&pts).unwrap_or(f64::NEG_INFINITY);
    let decaying = coeff_decay_trend < 0.0;
    if !decaying {
        notes.push("ln||a_n|| / lambda_n is not decreasing".into());
    }

    let verdict = if !monotone_ok || !decaying {
        Verdict::Fail
    } else if d_arg + 1 > lambdas.len() * 3 / 4 {
        notes.push("ln n / lambda_n still growing at the end of the window".into());
        Verdict::Warn
    } else {
        Verdict::Pass
    };
    ValidationReport {
        verdict,
        monotone_ok,
        d_estimate,
        coeff_decay_trend,
        notes,
    }
}

/// Least-squares slope of `y` against `x`; `None` for fewer than two points.
pub(crate) fn ls_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Log-concave profile `phi(n) = ln ||a_n|| + sigma lambda_n` with analytic increments.
struct Concave {
    /// `ln c + a sigma`
    slope: f64,
    scale: f64,
}

impl Concave {
    fn for_spec(spec: &SeriesSpec, sigma: f64) -> Option<Concave> {
        match spec.family {
            SeriesFamily::ExpExp { a, c } => Some(Concave {
                slope: c.ln() + a * sigma,
                scale: spec.log_scale,
            }),
            SeriesFamily::Table { .. } => None,
        }
    }

    fn phi(&self, n: f64) -> f64 {
        n * self.slope - ln_factorial(n) + self.scale
    }

    /// `phi(n + k) - phi(n)`.
    fn delta(&self, n: f64, k: f64) -> f64 {
        k * self.slope - ln_factorial_diff(n, k)
    }

    /// First index whose successor is not larger.
    fn peak(&self) -> Result<f64> {
        if self.slope > 700.0 {
            return Err(Error::IndexOverflow(self.slope.exp()));
        }
        let step = |n: f64| self.slope - (n + 1.0).ln();
        let mut n = (self.slope.exp() - 1.0).ceil().max(1.0);
        if n > 1e12 {
            // unit steps are at the resolution of the logarithm; keep the closed form
            return Ok(n);
        }
        while n > 1.0 && step(n - 1.0) <= 0.0 {
            n -= 1.0;
        }
        while step(n) > 0.0 {
            n += 1.0;
        }
        Ok(n)
    }
}

/// Maximal term of the series at `sigma`, scanning at most `n_max` terms when enumeration is needed.
pub fn max_term_log(spec: &SeriesSpec, sigma: f64, n_max: u64) -> Result<MaxTerm> {
    if let Some(cv) = Concave::for_spec(spec, sigma) {
        let n = cv.peak()?;
        return Ok(MaxTerm {
            index: n,
            value: ExtReal::from_real(cv.phi(n))?,
        });
    }
    let len = spec.table_len().map(|l| l as u64).unwrap_or(n_max);
    let mut best = (0u64, f64::NEG_INFINITY);
    for n in 1..=len.min(n_max.max(1)) {
        let t = term_log(spec, n, sigma)?;
        if t > best.1 {
            best = (n, t);
        }
    }
    if best.0 == 0 {
        return Err(Error::SearchCap(n_max));
    }
    Ok(MaxTerm {
        index: best.0 as f64,
        value: ExtReal::from_real(best.1)?,
    })
}

/// Upper bound on `ln sum ||a_n|| exp(sigma lambda_n)` exceeding the true value by at most `tail_tol`.
pub fn log_sum_upper(spec: &SeriesSpec, sigma: f64, tail_tol: f64) -> Result<ExtReal> {
    let (_, hi) = log_sum_bounds(spec, sigma, tail_tol)?;
    ExtReal::from_real(hi)
}

/// Certified lower and upper bounds on the log-sum, at most `tail_tol` apart.
///
/// Tolerances below `1e-14` relative to the maximal term are raised to that floor.
pub fn log_sum_bounds(spec: &SeriesSpec, sigma: f64, tail_tol: f64) -> Result<(f64, f64)> {
    if tail_tol.is_nan() || tail_tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "tail_tol must be positive, got {tail_tol}"
        )));
    }
    match Concave::for_spec(spec, sigma) {
        Some(cv) => concave_sum(&cv, tail_tol),
        None => {
            let len = spec.table_len().unwrap_or(0) as u64;
            if len > TERM_CAP {
                return Err(Error::TailBound(TERM_CAP));
            }
            let terms = (1..=len)
                .map(|n| term_log(spec, n, sigma))
                .collect::<Result<Vec<_>>>()?;
            let s = lse_accumulate(terms);
            Ok((s, s))
        }
    }
}

/// Upper bound on the log-sum with tolerance `rel_tol * max(1, |ln mu|)`.
pub fn log_sum_upper_relative(spec: &SeriesSpec, sigma: f64, rel_tol: f64) -> Result<ExtReal> {
    let tol = match Concave::for_spec(spec, sigma) {
        Some(cv) => rel_tol * cv.phi(cv.peak()?).abs().max(1.0),
        None => rel_tol,
    };
    log_sum_upper(spec, sigma, tol)
}

fn concave_sum(cv: &Concave, tail_tol: f64) -> Result<(f64, f64)> {
    let n_star = cv.peak()?;
    let peak = cv.phi(n_star);
    let tol = tail_tol.max(1e-14 * peak.abs().max(1.0));
    // Budgets are fractions of the allowed relative gap between the linear sums.
    // hi / lo <= 1 + 3 rtol <= exp(tol)
    let rtol = (tol.exp_m1() / 8.0).min(1e100);

    let right = sum_side(|k| cv.delta(n_star, k), None, rtol)?;
    let left = if n_star > 1.0 {
        sum_side(|k| cv.delta(n_star, -(k + 1.0)), Some(n_star - 1.0), rtol)?
    } else {
        (0.0, 0.0)
    };
    Ok((
        peak + (right.0 + left.0).ln(),
        peak + (right.1 + left.1).ln(),
    ))
}

/// `sum_{j < len} exp(j d)` in linear scale.
fn geom(d: f64, len: f64) -> f64 {
    if d == 0.0 {
        len
    } else {
        (len * d).exp_m1() / d.exp_m1()
    }
}

/// Sums `exp(rel(k))` over `k = 0, 1, ...` (fewer than `len` terms if given) for a
/// non-increasing concave `rel` with `rel(0) <= 0`.
///
/// Blocks are bounded below by their chord and above by the extension of the
/// previous chord, so only values of `rel` are needed.
fn sum_side(rel: impl Fn(f64) -> f64, len: Option<f64>, rtol: f64) -> Result<(f64, f64)> {
    const MAX_BLOCKS: u64 = 50_000_000;
    let v0 = rel(0.0);
    let mut lo = v0.exp();
    let mut hi = lo;
    let end = len.unwrap_or(f64::INFINITY);
    if end <= 1.0 {
        return Ok((lo, hi));
    }
    let mut k = 1.0;
    let mut vk = rel(1.0);
    let mut dprev = vk - v0;
    let mut gap_used = 0.0;
    let mut b = 1.0f64;
    let mut blocks = 0u64;

    while k < end {
        blocks += 1;
        if blocks > MAX_BLOCKS {
            return Err(Error::TailBound(MAX_BLOCKS));
        }
        // tail from k onwards, bounded by the chord extension
        let remaining = end - k;
        let mut tail = f64::INFINITY;
        if dprev < 0.0 {
            tail = vk.exp() / -dprev.exp_m1();
        }
        if remaining.is_finite() {
            tail = tail.min(vk.exp() * remaining);
        }
        if tail.is_finite() && tail <= rtol * lo {
            hi += tail;
            return Ok((lo, hi));
        }

        let bl = b.min(remaining).max(1.0).floor();
        let (blk_lo, blk_hi, v_last) = if bl == 1.0 {
            let t = vk.exp();
            (t, t, vk)
        } else {
            let v_last = rel(k + bl - 1.0);
            let chord = (v_last - vk) / (bl - 1.0);
            let lower = vk.exp() * geom(chord, bl);
            let upper = (vk.exp() * bl).min(vk.exp() * geom(dprev.min(0.0), bl));
            (lower, upper.max(lower), v_last)
        };
        let gap = blk_hi - blk_lo;
        let budget = rtol * (lo + blk_lo) - gap_used;
        if bl > 1.0 && gap > rtol * blk_lo && gap > 0.5 * budget {
            b = (bl / 2.0).floor().max(1.0);
            continue;
        }
        lo += blk_lo;
        hi += blk_hi;
        gap_used += gap;
        let next = k + bl;
        if next >= end {
            break;
        }
        let vn = rel(next);
        if vn.is_nan() {
            return Err(Error::TailBound(blocks));
        }
        // The chord over the whole block stays resolvable when single steps
        // are below rounding noise.
        dprev = if bl == 1.0 {
            vn - v_last
        } else {
            (vn - vk) / bl
        };
        let _ = v_last;
        k = next;
        vk = vn;
        b = bl * 2.0;
    }
    Ok((lo, hi))
}

/// Plain enumeration with a running log-sum-exp; used as a reference for small cases.
pub fn log_sum_enumerated(spec: &SeriesSpec, sigma: f64, n_terms: u64) -> Result<f64> {
    let mut acc = LseAccumulator::default();
    for n in 1..=n_terms {
        acc.push(term_log(spec, n, sigma)?);
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stirling_difference_matches_direct() {
        for &n in &[1e3, 5e3, 1e5] {
            for &k in &[1.0, 7.0, 100.0, 2500.0] {
                let direct = ((n as u64 + 1)..=(n as u64 + k as u64))
                    .map(|j| (j as f64).ln())
                    .sum::<f64>();
                let fast = ln_factorial_diff(n, k);
                assert!((fast - direct).abs() < 1e-9 * direct.max(1.0), "{n} {k}");
            }
        }
    }

    #[test]
    fn geometric_sum_matches_loop() {
        let d = -0.3f64;
        let s: f64 = (0..17).map(|j| (j as f64 * d).exp()).sum();
        assert!((geom(d, 17.0) - s).abs() < 1e-13);
    }

    #[test]
    fn peak_is_first_maximiser() {
        let spec = SeriesSpec::expexp(1.0, 1.0).unwrap();
        let m = max_term_log(&spec, 3.0, 1000).unwrap();
        assert_eq!(m.index, 20.0);
    }
}
