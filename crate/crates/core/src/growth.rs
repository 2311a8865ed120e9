//! Growth sources, sampled log-modulus profiles, inversion and relative composition.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::levelindex::ExtReal;
use crate::series::{self, SeriesSpec};

/// Relative tolerance used for the upper surrogate of series-backed sources.
pub const SUM_REL_TOL: f64 = 1e-12;

/// Bracket expansions allowed before inversion gives up.
pub const MAX_EXPANSIONS: u32 = 120;

/// Where a log-modulus comes from.
///
/// Series-backed families carry two surrogates (maximal term and sum); the
/// synthetic rules define `ln M(sigma)` directly and ignore the surrogate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    /// Series with `lambda_n = a n` and `||a_n|| = c^n / n!`.
    Expexp {
        a: f64,
        c: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        log_scale: f64,
    },
    /// Finite Dirichlet polynomial given term by term.
    Table {
        lambda: Vec<f64>,
        log_norm: Vec<f64>,
    },
    /// `log^[k] M(sigma) = rho * log^[q] sigma`.
    Tower { k: u32, rho: f64, q: u32 },
    /// `log^[p] M(sigma) = (m0 + m1 sin ln sigma) * log^[q] sigma` with
    /// `m0 = (rho + lambda) / 2` and `m1 = (rho - lambda) / 2`.
    OscProfile {
        rho: f64,
        lambda: f64,
        p: u32,
        q: u32,
    },
    /// `ln M(sigma) = coef * sigma^exponent`.
    Power { coef: f64, exponent: f64 },
    /// `ln M(sigma) = slope * sigma + intercept`.
    Linear { slope: f64, intercept: f64 },
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

/// Which surrogate of the log-modulus a series-backed source uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surrogate {
    /// Logarithm of the maximal term.
    Lower,
    /// Certified upper bound on the logarithm of the sum of term norms.
    Upper,
}

impl Surrogate {
    pub fn other(self) -> Surrogate {
        match self {
            Surrogate::Lower => Surrogate::Upper,
            Surrogate::Upper => Surrogate::Lower,
        }
    }
}

impl fmt::Display for Surrogate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Surrogate::Lower => "lower",
            Surrogate::Upper => "upper",
        })
    }
}

impl Source {
    /// Parses either a JSON object or the short form `family:key=value,...`.
    pub fn parse(text: &str) -> Result<Source> {
        let text = text.trim();
        let source: Source = if text.starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?
        } else {
            let (family, rest) = text.split_once(':').unwrap_or((text, ""));
            let family = match family {
                "osc" => "osc_profile",
                other => other,
            };
            let mut obj = serde_json::Map::new();
            obj.insert("family".into(), family.into());
            for pair in rest.split(',').filter(|p| !p.is_empty()) {
                let (k, v) = pair
                    .split_once('=')
                    .ok_or_else(|| Error::Schema(format!("expected key=value, got '{pair}'")))?;
                let value = if let Ok(i) = v.parse::<i64>() {
                    serde_json::Value::from(i)
                } else {
                    let x: f64 = v
                        .parse()
                        .map_err(|_| Error::Schema(format!("'{v}' is not a number")))?;
                    serde_json::Value::from(x)
                };
                obj.insert(k.trim().to_string(), value);
            }
            serde_json::from_value(serde_json::Value::Object(obj)).map_err(|e| {
                let msg = e.to_string();
                if msg.starts_with("unknown variant") {
                    Error::UnknownFamily(family.to_string())
                } else {
                    Error::Schema(msg)
                }
            })?
        };
        source.check()?;
        Ok(source)
    }

    /// Validates the parameters of the source.
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        match self {
            Source::Expexp { .. } | Source::Table { .. } => self.series().map(|_| ()),
            Source::Tower { k, rho, .. } => {
                if *k == 0 || !(*rho > 0.0 && rho.is_finite()) {
                    bad(format!(
                        "tower needs k >= 1 and rho > 0, got k={k}, rho={rho}"
                    ))
                } else {
                    Ok(())
                }
            }
            Source::OscProfile { rho, lambda, p, .. } => {
                if *p == 0 || !(*lambda > 0.0 && rho >= lambda && rho.is_finite()) {
                    bad(format!(
                        "osc_profile needs p >= 1 and 0 < lambda <= rho, got p={p}, rho={rho}, lambda={lambda}"
                    ))
                } else {
                    Ok(())
                }
            }
            Source::Power { coef, exponent } => {
                if !(*coef > 0.0 && *exponent > 0.0 && coef.is_finite() && exponent.is_finite()) {
                    bad(format!(
                        "power needs positive coef and exponent, got {coef}, {exponent}"
                    ))
                } else {
                    Ok(())
                }
            }
            Source::Linear { slope, intercept } => {
                if !(slope.is_finite() && intercept.is_finite()) {
                    bad("linear needs finite slope and intercept".into())
                } else {
                    Ok(())
                }
            }
        }
    }

    /// The underlying series for series-backed sources.
    pub fn series(&self) -> Result<SeriesSpec> {
        match self {
            Source::Expexp { a, c, log_scale } => {
                Ok(SeriesSpec::expexp(*a, *c)?.scaled(*log_scale))
            }
            Source::Table { lambda, log_norm } => {
                SeriesSpec::table("table", lambda.clone(), log_norm.clone())
            }
            _ => Err(Error::InvalidInput(format!(
                "{} is not series-backed",
                self.label()
            ))),
        }
    }

    pub fn is_series(&self) -> bool {
        matches!(self, Source::Expexp { .. } | Source::Table { .. })
    }

    /// Short human-readable name, also accepted by [`Source::parse`].
    pub fn label(&self) -> String {
        match self {
            Source::Expexp { a, c, log_scale } if *log_scale == 0.0 => {
                format!("expexp:a={a},c={c}")
            }
            Source::Expexp { a, c, log_scale } => {
                format!("expexp:a={a},c={c},log_scale={log_scale}")
            }
            Source::Table { lambda, .. } => format!("table[{}]", lambda.len()),
            Source::Tower { k, rho, q } => format!("tower:k={k},rho={rho},q={q}"),
            Source::OscProfile { rho, lambda, p, q } => {
                format!("osc:rho={rho},lambda={lambda},p={p},q={q}")
            }
            Source::Power { coef, exponent } => format!("power:coef={coef},exponent={exponent}"),
            Source::Linear { slope, intercept } => {
                format!("linear:slope={slope},intercept={intercept}")
            }
        }
    }

    /// Stable hash of the canonical JSON form, used as a cache key.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("sources always serialise");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// `ln M(sigma)` under the given surrogate.
    pub fn log_modulus(&self, sigma: f64, surrogate: Surrogate) -> Result<ExtReal> {
        if !sigma.is_finite() {
            return Err(Error::InvalidInput(format!("sigma={sigma}")));
        }
        match self {
            Source::Expexp { .. } | Source::Table { .. } => {
                let spec = self.series()?;
                match surrogate {
                    Surrogate::Lower => {
                        Ok(series::max_term_log(&spec, sigma, series::TERM_CAP)?.value)
                    }
                    Surrogate::Upper => series::log_sum_upper_relative(&spec, sigma, SUM_REL_TOL),
                }
            }
            Source::Tower { k, rho, q } => {
                let base = positive_log_iter(sigma, *q, "tower")?;
                Ok(base.mul_real(*rho)?.exp_iter(k - 1))
            }
            Source::OscProfile { rho, lambda, p, q } => {
                if sigma <= 0.0 {
                    return Err(Error::domain("osc_profile", "sigma must be positive"));
                }
                let m = 0.5 * (rho + lambda) + 0.5 * (rho - lambda) * sigma.ln().sin();
                let base = positive_log_iter(sigma, *q, "osc_profile")?;
                Ok(base.mul_real(m)?.exp_iter(p - 1))
            }
            Source::Power { coef, exponent } => {
                if sigma <= 0.0 {
                    return Err(Error::domain("power", "sigma must be positive"));
                }
                Ok(ExtReal::from_real(sigma.ln() * exponent + coef.ln())?.exp_iter(1))
            }
            Source::Linear { slope, intercept } => ExtReal::from_real(slope * sigma + intercept),
        }
    }
}

/// `log^[q] sigma` requiring every intermediate logarithm argument to be positive.
fn positive_log_iter(sigma: f64, q: u32, op: &'static str) -> Result<ExtReal> {
    ExtReal::from_real(sigma)?
        .log_iter(q)
        .map_err(|_| Error::domain(op, format!("log^[{q}] undefined at sigma={sigma}")))
}

/// Spacing of grid points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// A finite sampling grid `lo = sigma_0 < ... < sigma_{count-1} = hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Linear
}

impl GridSpec {
    pub fn linear(lo: f64, hi: f64, count: usize) -> Result<GridSpec> {
        GridSpec {
            lo,
            hi,
            count,
            spacing: Spacing::Linear,
        }
        .checked()
    }

    pub fn log(lo: f64, hi: f64, count: usize) -> Result<GridSpec> {
        GridSpec {
            lo,
            hi,
            count,
            spacing: Spacing::Log,
        }
        .checked()
    }

    pub fn checked(self) -> Result<GridSpec> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi && self.count >= 2) {
            return Err(Error::InvalidInput(format!(
                "grid needs finite lo < hi and at least two points, got {}:{}:{}",
                self.lo, self.hi, self.count
            )));
        }
        if self.spacing == Spacing::Log && self.lo <= 0.0 {
            return Err(Error::InvalidInput("log grids need lo > 0".into()));
        }
        Ok(self)
    }

    /// Parses `lo:hi:count` with an optional `:log` suffix.
    pub fn parse(text: &str) -> Result<GridSpec> {
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Schema(format!("bad grid field '{s}'")))
        };
        let spacing = match parts.get(3).map(|s| s.trim()) {
            None | Some("lin") | Some("linear") => Spacing::Linear,
            Some("log") => Spacing::Log,
            Some(other) => return Err(Error::Schema(format!("unknown grid spacing '{other}'"))),
        };
        if parts.len() < 3 || parts.len() > 4 {
            return Err(Error::Schema(format!(
                "grid must look like lo:hi:count[:log], got '{text}'"
            )));
        }
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Schema(format!("bad grid count '{}'", parts[2])))?;
        GridSpec {
            lo: num(parts[0])?,
            hi: num(parts[1])?,
            count,
            spacing,
        }
        .checked()
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    return self.hi;
                }
                let t = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.lo + t * (self.hi - self.lo),
                    Spacing::Log => (self.lo.ln() + t * (self.hi.ln() - self.lo.ln())).exp(),
                }
            })
            .collect()
    }

    pub fn label(&self) -> String {
        match self.spacing {
            Spacing::Linear => format!("{}:{}:{}", self.lo, self.hi, self.count),
            Spacing::Log => format!("{}:{}:{}:log", self.lo, self.hi, self.count),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub sigma: f64,
    pub log_m: ExtReal,
}

/// `ln M` sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthProfile {
    pub source: Source,
    pub surrogate: Surrogate,
    pub grid: GridSpec,
    pub samples: Vec<Sample>,
}

/// Samples the log-modulus on every grid point and checks strict monotonicity.
pub fn sample_profile(
    source: &Source,
    grid: &GridSpec,
    surrogate: Surrogate,
) -> Result<GrowthProfile> {
    let mut samples: Vec<Sample> = Vec::with_capacity(grid.count);
    for sigma in grid.points() {
        let log_m = source.log_modulus(sigma, surrogate)?;
        if let Some(prev) = samples.last() {
            if log_m <= prev.log_m {
                return Err(Error::Monotonicity {
                    lo: prev.sigma,
                    hi: sigma,
                });
            }
        }
        samples.push(Sample { sigma, log_m });
    }
    Ok(GrowthProfile {
        source: source.clone(),
        surrogate,
        grid: *grid,
        samples,
    })
}

/// Smallest sigma the inversion searches.
const SIGMA_FLOOR: f64 = 0.0;

/// Solves `ln M(sigma) = y` for sigma by bracketing in the level-index coordinate.
///
/// The bracket starts from `hint` (or `[0, 1]`) and its width doubles while
/// expanding. Points where the source is undefined near the floor count as
/// lying below every target, points that overflow count as above.
pub fn invert_modulus(
    source: &Source,
    surrogate: Surrogate,
    y: ExtReal,
    hint: Option<(f64, f64)>,
) -> Result<f64> {
    let target = y.level_index();
    let eval = |s: f64| -> Result<f64> {
        match source.log_modulus(s, surrogate) {
            Ok(v) => Ok(v.level_index() - target),
            Err(Error::Domain { .. }) => Ok(f64::NEG_INFINITY),
            Err(Error::Overflow { .. }) | Err(Error::IndexOverflow(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };

    let (mut lo, mut hi) = hint.unwrap_or((SIGMA_FLOOR, 1.0));
    lo = lo.max(SIGMA_FLOOR);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let mut flo = eval(lo)?;
    let mut fhi = eval(hi)?;
    let mut width = (hi - lo).max(1.0);
    let mut expansions = 0;
    while flo > 0.0 {
        if lo <= SIGMA_FLOOR {
            return Err(Error::Range(format!(
                "target {y} lies below ln M({SIGMA_FLOOR})"
            )));
        }
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            return Err(Error::Range(format!("no lower bracket for target {y}")));
        }
        hi = lo;
        fhi = flo;
        lo = (lo - width).max(SIGMA_FLOOR);
        width *= 2.0;
        flo = eval(lo)?;
    }
    while fhi < 0.0 {
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            return Err(Error::Range(format!("no upper bracket for target {y}")));
        }
        lo = hi;
        flo = fhi;
        hi += width;
        width *= 2.0;
        fhi = eval(hi)?;
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }

    // Illinois iteration; two slow steps in a row force a bisection.
    let mut side = 0i8;
    let mut stall = 0;
    for _ in 0..400 {
        let tol = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let mut x = if flo.is_finite() && fhi.is_finite() && stall < 2 {
            hi - fhi * (hi - lo) / (fhi - flo)
        } else {
            mid
        };
        if !(x > lo && x < hi) {
            x = mid;
        }
        let fx = eval(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        let old_width = hi - lo;
        if fx < 0.0 {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        stall = if hi - lo > 0.5 * old_width && stall < 2 {
            stall + 1
        } else {
            0
        };
    }
    Ok(0.5 * (lo + hi))
}

/// Which surrogates are combined in a relative composition.
///
/// `Lower` pairs the lower surrogate of `f` with the inverse of the upper
/// surrogate of `g`, so it never exceeds the true composition; `Upper` does
/// the opposite.
pub type Pairing = Surrogate;

fn pair_surrogates(pairing: Pairing) -> (Surrogate, Surrogate) {
    (pairing, pairing.other())
}

/// `M_g^{-1}(M_f(sigma))` with the surrogates chosen by `pairing`.
pub fn compose_relative(g: &Source, f: &Source, sigma: f64, pairing: Pairing) -> Result<f64> {
    let (sf, sg) = pair_surrogates(pairing);
    compose_with(g, sg, f, sf, sigma)
}

/// `M_g^{-1}(M_f(sigma))` with explicitly chosen surrogates for each side.
pub fn compose_with(
    g: &Source,
    sg: Surrogate,
    f: &Source,
    sf: Surrogate,
    sigma: f64,
) -> Result<f64> {
    let y = f.log_modulus(sigma, sf)?;
    invert_modulus(g, sg, y, None)
}

/// Composition evaluated along an increasing grid, reusing each result as the next bracket.
///
/// Points where `f` is undefined or the inversion fails are reported as `None`.
pub fn compose_along(g: &Source, f: &Source, sigmas: &[f64], pairing: Pairing) -> Vec<Option<f64>> {
    let (sf, sg) = pair_surrogates(pairing);
    let mut out = Vec::with_capacity(sigmas.len());
    let mut prev: Option<f64> = None;
    for &sigma in sigmas {
        let r = f.log_modulus(sigma, sf).and_then(|y| {
            let hint = match prev {
                Some(p) => (p, p + (p.abs() * 0.05).max(1.0)),
                None => (sigma.max(0.0), sigma.max(0.0) + 1.0),
            };
            invert_modulus(g, sg, y, Some(hint))
        });
        match r {
            Ok(v) => {
                prev = Some(v);
                out.push(Some(v));
            }
            Err(_) => out.push(None),
        }
    }
    out
}

/// On-disk cache of sampled profiles, one CSV file per (source, surrogate, grid).
#[derive(Clone, Debug)]
pub struct ProfileCache {
    dir: PathBuf,
}

/// Environment variable overriding the default cache directory.
pub const CACHE_ENV: &str = "RITT_CACHE_DIR";

impl ProfileCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ProfileCache { dir: dir.into() }
    }

    /// Uses `$RITT_CACHE_DIR`, falling back to `./.ritt-cache`.
    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".ritt-cache"));
        ProfileCache { dir }
    }

    fn path(&self, source: &Source, grid: &GridSpec, surrogate: Surrogate) -> PathBuf {
        let grid_json = serde_json::to_string(grid).expect("grids always serialise");
        let mut h = Sha256::new();
        h.update(source.digest().as_bytes());
        h.update(surrogate.to_string().as_bytes());
        h.update(grid_json.as_bytes());
        self.dir.join(format!("{}.csv", hex::encode(h.finalize())))
    }

    /// Returns the cached profile or samples it and writes the cache file.
    pub fn profile(
        &self,
        source: &Source,
        grid: &GridSpec,
        surrogate: Surrogate,
    ) -> Result<GrowthProfile> {
        let path = self.path(source, grid, surrogate);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Some(samples) = parse_csv(&text, grid) {
                return Ok(GrowthProfile {
                    source: source.clone(),
                    surrogate,
                    grid: *grid,
                    samples,
                });
            }
        }
        let profile = sample_profile(source, grid, surrogate)?;
        std::fs::create_dir_all(&self.dir)?;
        let mut text = String::from("sigma,level,mantissa\n");
        for s in &profile.samples {
            text.push_str(&format!(
                "{},{},{}\n",
                s.sigma,
                s.log_m.level(),
                s.log_m.mantissa()
            ));
        }
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, &path)?;
        Ok(profile)
    }
}

fn parse_csv(text: &str, grid: &GridSpec) -> Option<Vec<Sample>> {
    let mut samples = Vec::with_capacity(grid.count);
    for line in text.lines().skip(1) {
        let mut it = line.split(',');
        let sigma: f64 = it.next()?.parse().ok()?;
        let level: u32 = it.next()?.parse().ok()?;
        let mantissa: f64 = it.next()?.parse().ok()?;
        samples.push(Sample {
            sigma,
            log_m: ExtReal::new(level, mantissa).ok()?,
        });
    }
    (samples.len() == grid.count).then_some(samples)
}
