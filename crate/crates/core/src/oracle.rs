//! Exact limsup/liminf arithmetic on eventually periodic sequences.
//!
//! A [`TailSequence`] repeats its cycle forever after a finite transient, so its
//! upper and lower limits are the cycle's maximum and minimum. Differences of two
//! such sequences are again eventually periodic, over the least common cycle length.
//! Rounding is monotone, so every rule checked here must hold with zero slack or better.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSequence {
    #[serde(default)]
    pub transient: Vec<f64>,
    pub cycle: Vec<f64>,
}

impl TailSequence {
    pub fn new(transient: Vec<f64>, cycle: Vec<f64>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidInput(
                "a tail sequence needs a non-empty cycle".into(),
            ));
        }
        if transient.iter().chain(&cycle).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("sequence values must be finite".into()));
        }
        Ok(TailSequence { transient, cycle })
    }

    pub fn constant(c: f64) -> Self {
        TailSequence {
            transient: Vec::new(),
            cycle: vec![c],
        }
    }

    /// The `n`-th term, counting from zero.
    pub fn get(&self, n: usize) -> f64 {
        match self.transient.get(n) {
            Some(&x) => x,
            None => self.cycle[(n - self.transient.len()) % self.cycle.len()],
        }
    }

    pub fn limsup(&self) -> f64 {
        self.cycle.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn liminf(&self) -> f64 {
        self.cycle.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Pointwise `self - other`.
    pub fn minus(&self, other: &TailSequence) -> TailSequence {
        let start = self.transient.len().max(other.transient.len());
        let period = lcm(self.cycle.len(), other.cycle.len());
        let at = |n| self.get(n) - other.get(n);
        TailSequence {
            transient: (0..start).map(at).collect(),
            cycle: (start..start + period).map(at).collect(),
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// `(limsup, liminf)` of `s`.
pub fn exact_limits(s: &TailSequence) -> (f64, f64) {
    (s.limsup(), s.liminf())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `lhs >= rhs`
    Ge,
    /// `lhs <= rhs`
    Le,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleCheck {
    pub rule: &'static str,
    pub side: Side,
    pub lhs: f64,
    pub rhs: f64,
    /// Non-negative exactly when the rule holds.
    pub slack: f64,
    pub holds: bool,
}

impl RuleCheck {
    fn new(rule: &'static str, side: Side, lhs: f64, rhs: f64) -> Self {
        let slack = match side {
            Side::Ge => lhs - rhs,
            Side::Le => rhs - lhs,
        };
        RuleCheck {
            rule,
            side,
            lhs,
            rhs,
            slack,
            holds: slack >= 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DifferenceReport {
    /// `(limsup, liminf)` of `A`, `B` and `A - B`.
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub diff: (f64, f64),
    pub rules: Vec<RuleCheck>,
}

impl DifferenceReport {
    pub fn all_hold(&self) -> bool {
        self.rules.iter().all(|r| r.holds)
    }

    pub fn min_slack(&self) -> f64 {
        self.rules
            .iter()
            .map(|r| r.slack)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Evaluates the four bounds on the limits of `A - B`.
pub fn check_difference_rules(a: &TailSequence, b: &TailSequence) -> DifferenceReport {
    let (sa, ia) = exact_limits(a);
    let (sb, ib) = exact_limits(b);
    let (sd, id) = exact_limits(&a.minus(b));
    DifferenceReport {
        a: (sa, ia),
        b: (sb, ib),
        diff: (sd, id),
        rules: vec![
            RuleCheck::new("liminf(A-B) >= liminf A - limsup B", Side::Ge, id, ia - sb),
            RuleCheck::new("limsup(A-B) <= limsup A - liminf B", Side::Le, sd, sa - ib),
            RuleCheck::new(
                "liminf(A-B) <= min(liminf A - liminf B, limsup A - limsup B)",
                Side::Le,
                id,
                (ia - ib).min(sa - sb),
            ),
            RuleCheck::new(
                "limsup(A-B) >= max(liminf A - liminf B, limsup A - limsup B)",
                Side::Ge,
                sd,
                (ia - ib).max(sa - sb),
            ),
        ],
    }
}

/// With a constant `B = c`, the limits of `A - c` are exactly those of `A` shifted by `c`.
pub fn regular_collapse_holds(a: &TailSequence, c: f64) -> bool {
    let (sd, id) = exact_limits(&a.minus(&TailSequence::constant(c)));
    sd == a.limsup() - c && id == a.liminf() - c
}

pub const MAX_TRANSIENT: usize = 4;
pub const MAX_CYCLE: usize = 6;
pub const VALUE_BOUND: f64 = 10.0;

/// A random sequence with transient length `0..=4`, cycle length `1..=6` and values in `[-10, 10]`.
///
/// Half of the values are whole numbers so that ties between cycle entries are common.
pub fn random_sequence<R: Rng>(rng: &mut R) -> TailSequence {
    let value = |rng: &mut R| {
        if rng.gen_bool(0.5) {
            rng.gen_range(-10i32..=10) as f64
        } else {
            rng.gen_range(-VALUE_BOUND..=VALUE_BOUND)
        }
    };
    let t = rng.gen_range(0..=MAX_TRANSIENT);
    let c = rng.gen_range(1..=MAX_CYCLE);
    let transient = (0..t).map(|_| value(rng)).collect();
    let cycle = (0..c).map(|_| value(rng)).collect();
    TailSequence { transient, cycle }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub seed: u64,
    pub instances: usize,
    pub checks: usize,
    pub violations: usize,
    pub collapse_violations: usize,
    /// Smallest rule slack over the sweep; zero when some rule is tight.
    pub min_slack: f64,
    pub tight_rules: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<(TailSequence, TailSequence)>,
}

/// Checks the difference rules on `count` seeded random pairs, plus the
/// regular-case collapse with `B` replaced by the constant `B_0`.
pub fn sweep(seed: u64, count: usize) -> SweepSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = SweepSummary {
        seed,
        instances: count,
        checks: 0,
        violations: 0,
        collapse_violations: 0,
        min_slack: f64::INFINITY,
        tight_rules: 0,
        first_violation: None,
    };
    for _ in 0..count {
        let a = random_sequence(&mut rng);
        let b = random_sequence(&mut rng);
        let report = check_difference_rules(&a, &b);
        for r in &report.rules {
            summary.checks += 1;
            summary.min_slack = summary.min_slack.min(r.slack);
            if r.slack == 0.0 {
                summary.tight_rules += 1;
            }
            if !r.holds {
                summary.violations += 1;
            }
        }
        if !report.all_hold() && summary.first_violation.is_none() {
            summary.first_violation = Some((a.clone(), b.clone()));
        }
        if !regular_collapse_holds(&a, b.get(0)) {
            summary.collapse_violations += 1;
        }
    }
    summary
}
