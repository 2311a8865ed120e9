//! Extended-range positive reals in level-index form.
//!
//! A value is stored as `exp^[level](mantissa)`. Level 0 holds ordinary
//! reals below `e` (including zero and negatives); every higher level keeps
//! its mantissa in `[1, e)`. Towers such as `exp(exp(exp(30)))` therefore
//! stay exact enough to take iterated logarithms of.

use std::cmp::Ordering;
use std::f64::consts::E;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real number in level-index representation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtReal {
    level: u32,
    mantissa: f64,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal {
        level: 0,
        mantissa: 0.0,
    };

    /// Builds `exp^[level](mantissa)` and normalises it into the canonical band.
    pub fn new(level: u32, mantissa: f64) -> Result<Self> {
        if mantissa.is_nan() {
            return Err(Error::InvalidInput("NaN mantissa".into()));
        }
        if mantissa.is_infinite() {
            return Err(Error::Overflow { level, mantissa });
        }
        let mut level = level;
        let mut m = mantissa;
        loop {
            if m >= E {
                level += 1;
                m = m.ln();
            } else if level >= 1 && m < 1.0 {
                level -= 1;
                m = m.exp();
            } else {
                break;
            }
        }
        Ok(ExtReal { level, mantissa: m })
    }

    /// Converts a finite real, taking logarithms while the value is at least `e`.
    pub fn from_real(v: f64) -> Result<Self> {
        if v.is_nan() {
            return Err(Error::InvalidInput("NaN".into()));
        }
        if v.is_infinite() {
            return Err(Error::Overflow {
                level: 0,
                mantissa: v,
            });
        }
        Self::new(0, v)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn is_positive(&self) -> bool {
        self.level > 0 || self.mantissa > 0.0
    }

    /// Evaluates the tower as an ordinary `f64`.
    pub fn to_real(&self) -> Result<f64> {
        let mut v = self.mantissa;
        for _ in 0..self.level {
            v = v.exp();
            if !v.is_finite() {
                return Err(Error::Overflow {
                    level: self.level,
                    mantissa: self.mantissa,
                });
            }
        }
        Ok(v)
    }

    /// Like [`to_real`](Self::to_real) but saturates to `+inf` instead of failing.
    pub fn to_real_saturating(&self) -> f64 {
        self.to_real().unwrap_or(f64::INFINITY)
    }

    /// Applies the natural logarithm `k` times.
    pub fn log_iter(self, k: u32) -> Result<Self> {
        let mut x = self;
        for _ in 0..k {
            x = if x.level >= 1 {
                ExtReal {
                    level: x.level - 1,
                    mantissa: x.mantissa,
                }
            } else if x.mantissa > 0.0 {
                ExtReal {
                    level: 0,
                    mantissa: x.mantissa.ln(),
                }
            } else {
                return Err(Error::domain(
                    "log_iter",
                    format!("logarithm of non-positive value {}", x.mantissa),
                ));
            };
        }
        Ok(x)
    }

    /// Applies the exponential `k` times.
    pub fn exp_iter(self, k: u32) -> Self {
        let mut x = self;
        for _ in 0..k {
            x = if x.level >= 1 {
                ExtReal {
                    level: x.level + 1,
                    mantissa: x.mantissa,
                }
            } else if x.mantissa >= 1.0 {
                ExtReal {
                    level: 1,
                    mantissa: x.mantissa,
                }
            } else {
                ExtReal {
                    level: 0,
                    mantissa: x.mantissa.exp(),
                }
            };
        }
        x
    }

    /// `log^[k]` for `k >= 0`, `exp^[-k]` for negative `k`.
    pub fn iter_log(self, k: i32) -> Result<Self> {
        if k >= 0 {
            self.log_iter(k as u32)
        } else {
            Ok(self.exp_iter(k.unsigned_abs()))
        }
    }

    /// `x^alpha = exp(alpha * ln x)` for positive `x`, kept in extended range.
    pub fn pow_scale(self, alpha: f64) -> Result<Self> {
        if !self.is_positive() {
            return Err(Error::domain(
                "pow_scale",
                "base must be positive".to_string(),
            ));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("exponent {alpha}")));
        }
        if alpha == 0.0 {
            return Ok(ExtReal {
                level: 0,
                mantissa: 1.0,
            });
        }
        if alpha < 0.0 {
            let z = self.pow_scale(-alpha)?;
            return match z.to_real() {
                Ok(v) => ExtReal::from_real(1.0 / v),
                Err(_) => Ok(ExtReal::ZERO),
            };
        }
        let ln = self.log_iter(1)?;
        Ok(ln.mul_real(alpha)?.exp_iter(1))
    }

    /// Multiplies by a finite positive real.
    pub fn mul_real(self, alpha: f64) -> Result<Self> {
        if alpha == 0.0 {
            return Ok(ExtReal::ZERO);
        }
        if let Ok(v) = self.to_real() {
            let prod = v * alpha;
            if prod.is_finite() {
                return ExtReal::from_real(prod);
            }
        }
        if alpha < 0.0 || !self.is_positive() {
            return Err(Error::Overflow {
                level: self.level,
                mantissa: self.mantissa,
            });
        }
        // alpha * y = exp(ln y + ln alpha)
        let ln = self.log_iter(1)?;
        Ok(ln.add_real(alpha.ln())?.exp_iter(1))
    }

    /// Adds a finite real. Beyond `f64` range the shift is below resolution.
    pub fn add_real(self, c: f64) -> Result<Self> {
        match self.to_real() {
            Ok(v) => ExtReal::from_real(v + c),
            Err(_) if c.abs() < 1e290 => Ok(self),
            Err(e) => Err(e),
        }
    }

    /// Continuous, strictly increasing real coordinate of the value.
    ///
    /// For `v < 1` this is `v` itself; above that it is the generalised
    /// logarithm, roughly the height of the exponential tower.
    pub fn level_index(&self) -> f64 {
        if self.level >= 1 {
            (self.level + 1) as f64 + self.mantissa.ln()
        } else if self.mantissa >= 1.0 {
            1.0 + self.mantissa.ln()
        } else {
            self.mantissa
        }
    }

    /// `self / other` as an `f64`, saturating at `0` or `+inf`.
    pub fn ratio(self, other: ExtReal) -> Result<f64> {
        if !other.is_positive() {
            return Err(Error::domain(
                "ratio",
                "denominator must be positive".to_string(),
            ));
        }
        if let (Ok(a), Ok(b)) = (self.to_real(), other.to_real()) {
            return Ok(a / b);
        }
        if !self.is_positive() {
            // the numerator is an ordinary real and the denominator is huge
            return Ok(self.mantissa / other.to_real_saturating());
        }
        let la = self.log_iter(1)?;
        let lb = other.log_iter(1)?;
        match (la.to_real(), lb.to_real()) {
            (Ok(a), Ok(b)) => Ok((a - b).exp()),
            _ => Ok(if la > lb { f64::INFINITY } else { 0.0 }),
        }
    }
}

impl Eq for ExtReal {}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        let neg_a = self.level == 0 && self.mantissa < 1.0;
        let neg_b = other.level == 0 && other.mantissa < 1.0;
        match (neg_a, neg_b) {
            (true, true) => self.mantissa.total_cmp(&other.mantissa),
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self
                .level
                .cmp(&other.level)
                .then(self.mantissa.total_cmp(&other.mantissa)),
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_real() {
            Ok(v) => write!(f, "{v}"),
            Err(_) => write!(f, "exp^[{}]({})", self.level, self.mantissa),
        }
    }
}

/// Numerically stable `ln(sum exp(t_i))` accumulated in a single pass.
///
/// Terms equal to `-inf` are skipped; an empty or all-vanishing input gives `-inf`.
pub fn lse_accumulate<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = LseAccumulator::default();
    for t in terms {
        acc.push(t);
    }
    acc.value()
}

/// Streaming log-sum-exp state.
#[derive(Clone, Copy, Debug)]
pub struct LseAccumulator {
    max: f64,
    scaled: f64,
}

impl Default for LseAccumulator {
    fn default() -> Self {
        LseAccumulator {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LseAccumulator {
    pub fn push(&mut self, t: f64) {
        if t == f64::NEG_INFINITY {
            return;
        }
        if t > self.max {
            self.scaled = self.scaled * (self.max - t).exp() + 1.0;
            self.max = t;
        } else {
            self.scaled += (t - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}
