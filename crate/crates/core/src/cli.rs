//! Command-line front end.
//!
//! Every command builds a JSON document and a flat table; `--format` picks
//! which one is printed. Exit status: 0 success, 1 a check or sweep failed,
//! 2 usage error, 3 numerical error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::corpus;
use crate::error::{Error, Result};
use crate::growth::{GridSpec, ProfileCache, Source, Surrogate};
use crate::indicators::{
    self, detect_index_pair, detect_relative_index_pair, relative_indicators, CompositionCache,
    Detection, Form, IndicatorEstimate, IndicatorKind, RelativeSet, Settings,
};
use crate::oracle;
use crate::theorems::{self, CheckReport, TheoremInstance, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "ritt",
    version,
    about = "Growth indicators of Dirichlet series and checks of their inequalities"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub tuning: Tuning,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Tail-estimator settings shared by all estimating commands.
#[derive(Args, Debug, Clone, Default)]
pub struct Tuning {
    /// Fraction of the grid used as the tail window.
    #[arg(long, global = true)]
    pub window: Option<f64>,
    /// Relative drift below which an estimate counts as converged.
    #[arg(long, global = true)]
    pub drift_tol: Option<f64>,
    /// Values below eps or above 1/eps count as zero or infinite.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Disable the offset fit in the tail estimator.
    #[arg(long, global = true)]
    pub no_offset_fit: bool,
}

impl Tuning {
    fn settings(&self) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(w) = self.window {
            s.window = w;
        }
        if let Some(d) = self.drift_tol {
            s.drift_tol = d;
        }
        if let Some(e) = self.eps {
            s.eps = e;
        }
        s.offset_fit = !self.no_offset_fit;
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !(positive(s.window) && s.window <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "--window must lie in (0, 1], got {}",
                s.window
            )));
        }
        if !positive(s.drift_tol) {
            return Err(Error::InvalidInput(format!(
                "--drift-tol must be positive, got {}",
                s.drift_tol
            )));
        }
        if !(positive(s.eps) && s.eps < 1.0) {
            return Err(Error::InvalidInput(format!(
                "--eps must lie in (0, 1), got {}",
                s.eps
            )));
        }
        Ok(s)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a source or a theorem batch and print its normalised form.
    Validate {
        /// Source: corpus id, `family:key=value,...`, inline JSON or a file path.
        #[arg(long, required_unless_present = "batch")]
        spec: Option<String>,
        /// Theorem batch file.
        #[arg(long, conflicts_with = "spec")]
        batch: Option<PathBuf>,
    },
    /// Sample ln M on a grid.
    Profile {
        /// Corpus id, `family:key=value,...`, inline JSON or a file path.
        #[arg(long)]
        spec: String,
        /// Grid `lo:hi:count[:log]`; defaults to the corpus grid of the source, else `5:30:200`.
        #[arg(long)]
        sigma: Option<String>,
        /// Which certified bound on ln M to print.
        #[arg(long, value_enum, default_value_t = SurrogateArg::Upper)]
        surrogate: SurrogateArg,
        /// Read and write sampled profiles in this directory (default `$RITT_CACHE_DIR`).
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Use the profile cache.
        #[arg(long)]
        cache: bool,
    },
    /// Estimate (p,q) indicators of one source.
    Indicator {
        /// Corpus id, `family:key=value,...`, inline JSON or a file path.
        #[arg(long)]
        spec: String,
        /// Number of logarithms applied to ln M (or to ln M_f).
        #[arg(long)]
        p: u32,
        /// Number of logarithms applied to sigma (or to ln M_g).
        #[arg(long)]
        q: u32,
        /// Grid `lo:hi:count[:log]`; defaults to the corpus grid of the source, else `5:30:200`.
        #[arg(long)]
        sigma: Option<String>,
        /// A single indicator; by default orders, types and weak types are all estimated.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        /// Exponent for type kinds; defaults to the estimated (lower) order.
        #[arg(long)]
        aux: Option<f64>,
        /// Print the ratio sequence as whitespace-separated columns instead.
        #[arg(long)]
        plot: bool,
    },
    /// Estimate indicators of f relative to g.
    Relative {
        /// The source being measured.
        #[arg(long)]
        f: String,
        /// The reference source.
        #[arg(long)]
        g: String,
        /// Number of logarithms applied to ln M (or to ln M_f).
        #[arg(long)]
        p: u32,
        /// Number of logarithms applied to sigma (or to ln M_g).
        #[arg(long)]
        q: u32,
        /// Grid `lo:hi:count[:log]`; defaults to the corpus grid of the source, else `5:30:200`.
        #[arg(long)]
        sigma: Option<String>,
        /// `dual` substitutes sigma = M_g(t) and inverts f instead of g.
        #[arg(long, value_enum, default_value_t = FormArg::Direct)]
        form: FormArg,
    },
    /// Find the index-pair of a source, or of f relative to g.
    Detect {
        /// Corpus id, `family:key=value,...`, inline JSON or a file path.
        #[arg(long)]
        spec: String,
        /// Detect the relative index-pair with respect to this source.
        #[arg(long)]
        g: Option<String>,
        /// Fix the first index of a relative index-pair.
        #[arg(long, requires = "g")]
        m: Option<u32>,
        /// Largest p tried.
        #[arg(long, default_value_t = 4)]
        p_max: u32,
        /// Largest q tried.
        #[arg(long, default_value_t = 3)]
        q_max: u32,
        /// Grid `lo:hi:count[:log]`; defaults to the corpus grid of the source, else `5:30:200`.
        #[arg(long)]
        sigma: Option<String>,
    },
    /// Evaluate theorem chains on a batch of triples.
    Check {
        /// JSON batch file.
        #[arg(long, required_unless_present = "suite")]
        batch: Option<PathBuf>,
        /// Use the built-in batch instead.
        #[arg(long, conflicts_with = "batch")]
        suite: bool,
        /// Override the tolerance of every instance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Check the limsup/liminf difference rules on random eventually periodic sequences.
    Oracle {
        /// Number of random sequence pairs.
        #[arg(long, default_value_t = 10_000)]
        instances: usize,
        /// Seed of the ChaCha8 generator.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Built-in sources with closed-form indicators.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand, Debug)]
pub enum CorpusAction {
    /// Registered ids with their families and grids.
    List,
    /// Analytic table of one id (registered or any well-formed name).
    Describe { id: String },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SurrogateArg {
    Lower,
    Upper,
}

impl From<SurrogateArg> for Surrogate {
    fn from(s: SurrogateArg) -> Self {
        match s {
            SurrogateArg::Lower => Surrogate::Lower,
            SurrogateArg::Upper => Surrogate::Upper,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormArg {
    Direct,
    Dual,
}

impl From<FormArg> for Form {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Direct => Form::Direct,
            FormArg::Dual => Form::Dual,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Order,
    LowerOrder,
    Type,
    LowerType,
    WeakTypeTau,
    WeakTypeTauBar,
}

impl From<KindArg> for IndicatorKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Order => IndicatorKind::Order,
            KindArg::LowerOrder => IndicatorKind::LowerOrder,
            KindArg::Type => IndicatorKind::Type,
            KindArg::LowerType => IndicatorKind::LowerType,
            KindArg::WeakTypeTau => IndicatorKind::WeakTypeTau,
            KindArg::WeakTypeTauBar => IndicatorKind::WeakTypeTauBar,
        }
    }
}

/// Reads a source from a file, or parses the argument itself.
///
/// Arguments naming an existing file are read; otherwise corpus ids, the short
/// form and inline JSON are accepted.
pub fn load_spec(arg: &str) -> Result<Source> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return Source::parse(&text).map_err(|e| match e {
            Error::Schema(m) => Error::Schema(format!("{}: {m}", path.display())),
            other => other,
        });
    }
    if let Some(entry) = corpus::lookup(arg) {
        return Ok(entry.source);
    }
    Source::parse(arg)
}

fn grid_for(arg: &Option<String>, spec: &str) -> Result<GridSpec> {
    match arg {
        Some(text) => GridSpec::parse(text),
        None => Ok(corpus::lookup(spec).map_or_else(corpus::linear_grid, |e| e.grid)),
    }
}

/// What a command produced.
pub struct Output {
    json: Value,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    /// Extra lines after the table in `table` format.
    footer: Vec<String>,
    /// Replaces the whole output when set.
    raw: Option<String>,
    status: i32,
}

impl Output {
    fn new(json: Value, header: Vec<&'static str>) -> Self {
        Output {
            json,
            header,
            rows: Vec::new(),
            footer: Vec::new(),
            raw: None,
            status: EXIT_OK,
        }
    }

    fn render(&self, format: Format) -> Result<String> {
        if let Some(raw) = &self.raw {
            return Ok(raw.clone());
        }
        Ok(match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json)?;
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Error::InvalidInput(e.to_string());
                w.write_record(&self.header).map_err(io)?;
                for r in &self.rows {
                    w.write_record(r).map_err(io)?;
                }
                let bytes = w
                    .into_inner()
                    .map_err(|e| Error::InvalidInput(e.to_string()))?;
                String::from_utf8(bytes).expect("csv output is utf-8")
            }
            Format::Table => {
                let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
                for r in &self.rows {
                    for (w, c) in widths.iter_mut().zip(r) {
                        *w = (*w).max(c.len());
                    }
                }
                let line = |cells: Vec<&str>| {
                    let padded: Vec<String> = cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:<w$}"))
                        .collect();
                    padded.join("  ").trim_end().to_string() + "\n"
                };
                let mut s = line(self.header.clone());
                s += &line(
                    widths
                        .iter()
                        .map(|w| "-".repeat(*w))
                        .collect::<Vec<_>>()
                        .iter()
                        .map(String::as_str)
                        .collect(),
                );
                for r in &self.rows {
                    s += &line(r.iter().map(String::as_str).collect());
                }
                for f in &self.footer {
                    s += f;
                    s.push('\n');
                }
                s
            }
        })
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), num)
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialise")
}

const ESTIMATE_HEADER: [&str; 11] = [
    "kind",
    "p",
    "q",
    "value",
    "lo",
    "hi",
    "converged",
    "drift",
    "window",
    "offset_corrected",
    "dropped",
];

fn estimate_row(e: &IndicatorEstimate) -> Vec<String> {
    vec![
        e.kind.name().into(),
        e.p.to_string(),
        e.q.to_string(),
        num(e.value),
        num(e.lo),
        num(e.hi),
        e.converged.to_string(),
        num(e.drift),
        num(e.window),
        e.offset_corrected.to_string(),
        e.dropped.to_string(),
    ]
}

fn validate(spec: &Option<String>, batch: &Option<PathBuf>) -> Result<Output> {
    if let Some(path) = batch {
        let instances = theorems::load_batch(&std::fs::read_to_string(path)?)?;
        let mut out = Output::new(
            json!({ "instances": instances }),
            vec!["name", "theorem", "f", "g", "h"],
        );
        for (i, inst) in instances.iter().enumerate() {
            let show = |r: &Option<theorems::SourceRef>| -> Result<String> {
                r.as_ref()
                    .map_or(Ok("-".into()), |r| r.resolve().map(|s| s.label()))
            };
            out.rows.push(vec![
                inst.name.clone().unwrap_or_else(|| format!("#{i}")),
                inst.theorem.to_string(),
                show(&inst.f)?,
                show(&inst.g)?,
                show(&inst.h)?,
            ]);
        }
        return Ok(out);
    }
    let arg = spec.as_deref().expect("clap requires --spec or --batch");
    let source = load_spec(arg)?;
    let mut out = Output::new(
        json!({ "source": source, "label": source.label(), "digest": source.digest() }),
        vec!["field", "value"],
    );
    out.rows.push(vec!["label".into(), source.label()]);
    out.rows.push(vec!["digest".into(), source.digest()]);
    out.rows
        .push(vec!["json".into(), serde_json::to_string(&source)?]);
    Ok(out)
}

fn profile(
    spec: &str,
    sigma: &Option<String>,
    surrogate: Surrogate,
    cache: bool,
    cache_dir: &Option<PathBuf>,
) -> Result<Output> {
    let source = load_spec(spec)?;
    let grid = grid_for(sigma, spec)?;
    let profile = match (cache, cache_dir) {
        (_, Some(dir)) => ProfileCache::new(dir).profile(&source, &grid, surrogate)?,
        (true, None) => ProfileCache::from_env().profile(&source, &grid, surrogate)?,
        (false, None) => crate::growth::sample_profile(&source, &grid, surrogate)?,
    };
    let mut out = Output::new(
        to_json(&profile),
        vec!["sigma", "level", "mantissa", "level_index"],
    );
    for s in &profile.samples {
        out.rows.push(vec![
            num(s.sigma),
            s.log_m.level().to_string(),
            num(s.log_m.mantissa()),
            num(s.log_m.level_index()),
        ]);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn indicator(
    spec: &str,
    p: u32,
    q: u32,
    sigma: &Option<String>,
    kind: Option<KindArg>,
    aux: Option<f64>,
    plot: bool,
    settings: &Settings,
) -> Result<Output> {
    let source = load_spec(spec)?;
    let grid = grid_for(sigma, spec)?;
    let (rho, lambda) = indicators::order_pair(&source, p, q, &grid, settings)?;
    let mut estimates = Vec::new();
    match kind.map(IndicatorKind::from) {
        Some(k) => {
            let aux = match (k, aux) {
                (IndicatorKind::Order | IndicatorKind::LowerOrder, _) => None,
                (_, Some(a)) => Some(a),
                (IndicatorKind::Type | IndicatorKind::LowerType, None) => Some(rho.value),
                (_, None) => Some(lambda.value),
            };
            if plot {
                let seq =
                    indicators::ratio_sequence(&source, Surrogate::Upper, &grid, k, p, q, aux)?;
                let mut text = format!(
                    "# {} ({p},{q}) of {}\n# sigma ratio\n",
                    k.name(),
                    source.label()
                );
                for pt in &seq.points {
                    text += &format!("{} {}\n", pt.sigma, pt.ratio);
                }
                let mut out = Output::new(Value::Null, Vec::new());
                out.raw = Some(text);
                return Ok(out);
            }
            estimates.push(indicators::estimate(
                &source, &grid, k, p, q, aux, settings,
            )?);
        }
        None => {
            let (r, l) = (rho.value, lambda.value);
            estimates.push(rho);
            estimates.push(lambda);
            if settings.finite_nonzero(r) {
                let (d, db) = indicators::type_pair(&source, p, q, r, &grid, settings)?;
                estimates.extend([d, db]);
            }
            if settings.finite_nonzero(l) {
                let (tb, t) = indicators::weak_type_pair(&source, p, q, l, &grid, settings)?;
                estimates.extend([tb, t]);
            }
            if plot {
                return Err(Error::InvalidInput("--plot needs --kind".into()));
            }
        }
    }
    let mut doc = json!({
        "source": source.label(),
        "grid": grid.label(),
        "p": p,
        "q": q,
    });
    for e in &estimates {
        let key = match e.kind {
            IndicatorKind::Order => "rho",
            IndicatorKind::LowerOrder => "lambda",
            IndicatorKind::Type => "delta",
            IndicatorKind::LowerType => "delta_bar",
            IndicatorKind::WeakTypeTau => "tau",
            _ => "tau_bar",
        };
        doc[key] = json!(e.value);
    }
    doc["estimates"] = to_json(&estimates);
    let mut out = Output::new(doc, ESTIMATE_HEADER.to_vec());
    out.rows = estimates.iter().map(estimate_row).collect();
    Ok(out)
}

fn relative_output(f: &Source, g: &Source, grid: &GridSpec, set: &RelativeSet) -> Output {
    let estimates: Vec<&IndicatorEstimate> = [Some(&set.rho), Some(&set.lambda)]
        .into_iter()
        .chain([&set.delta, &set.delta_bar, &set.tau, &set.tau_bar].map(Option::as_ref))
        .flatten()
        .collect();
    let doc = json!({
        "f": f.label(),
        "g": g.label(),
        "grid": grid.label(),
        "form": set.form,
        "rho": set.rho.value,
        "lambda": set.lambda.value,
        "estimates": to_json(&estimates),
    });
    let mut out = Output::new(doc, ESTIMATE_HEADER.to_vec());
    out.rows = estimates.into_iter().map(estimate_row).collect();
    out
}

fn relative(
    f: &str,
    g: &str,
    p: u32,
    q: u32,
    sigma: &Option<String>,
    form: Form,
    settings: &Settings,
) -> Result<Output> {
    let (sf, sg) = (load_spec(f)?, load_spec(g)?);
    let grid = grid_for(sigma, f)?;
    let set = relative_indicators(
        &mut CompositionCache::new(),
        &sf,
        &sg,
        p,
        q,
        &grid,
        form,
        settings,
    )?;
    Ok(relative_output(&sf, &sg, &grid, &set))
}

fn detect(
    spec: &str,
    g: &Option<String>,
    m: Option<u32>,
    p_max: u32,
    q_max: u32,
    sigma: &Option<String>,
    settings: &Settings,
) -> Result<Output> {
    let source = load_spec(spec)?;
    let grid = grid_for(sigma, spec)?;
    let (det, against): (Detection, Option<Source>) = match g {
        Some(g) => {
            let sg = load_spec(g)?;
            let det = detect_relative_index_pair(
                &mut CompositionCache::new(),
                &source,
                &sg,
                m,
                p_max,
                q_max,
                &grid,
                settings,
            )?;
            (det, Some(sg))
        }
        None => (
            detect_index_pair(&source, p_max, q_max, &grid, settings)?,
            None,
        ),
    };
    let doc = json!({
        "source": source.label(),
        "relative_to": against.as_ref().map(Source::label),
        "grid": grid.label(),
        "pair": det.pair,
        "rho": det.rho,
        "evidence": det.evidence,
    });
    let mut out = Output::new(
        doc,
        vec!["p", "q", "rho", "converged", "threshold", "admissible"],
    );
    for e in &det.evidence {
        out.rows.push(vec![
            e.pair.p.to_string(),
            e.pair.q.to_string(),
            opt_num(e.rho),
            e.converged.to_string(),
            num(e.threshold),
            e.admissible.to_string(),
        ]);
    }
    out.footer
        .push(format!("index-pair {} with order {}", det.pair, det.rho));
    Ok(out)
}

fn check(batch: &Option<PathBuf>, tol: Option<f64>) -> Result<Output> {
    let mut instances: Vec<TheoremInstance> = match batch {
        Some(path) => theorems::load_batch(&std::fs::read_to_string(path)?)?,
        None => corpus::theorem_suite(),
    };
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "--tol must be positive, got {t}"
            )));
        }
        for i in &mut instances {
            i.tolerance = t;
        }
    }
    let reports: Vec<CheckReport> = theorems::check_batch(&instances)
        .into_iter()
        .collect::<Result<_>>()?;
    let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    let (pass, vacuous, fail) = (
        count(Verdict::Pass),
        count(Verdict::Vacuous),
        count(Verdict::Fail),
    );
    let doc = json!({
        "summary": { "instances": reports.len(), "pass": pass, "vacuous": vacuous, "fail": fail },
        "reports": reports,
    });
    let mut out = Output::new(
        doc,
        vec!["name", "theorem", "verdict", "worst_margin", "chains"],
    );
    for (i, r) in reports.iter().enumerate() {
        out.rows.push(vec![
            r.name.clone().unwrap_or_else(|| format!("#{i}")),
            r.theorem.to_string(),
            r.verdict.to_string(),
            opt_num(r.worst_margin()),
            r.chains.len().to_string(),
        ]);
    }
    out.footer
        .push(format!("{pass} pass, {vacuous} vacuous, {fail} fail"));
    if fail > 0 {
        out.status = EXIT_FAILED;
    }
    Ok(out)
}

fn run_oracle(instances: usize, seed: u64) -> Output {
    let s = oracle::sweep(seed, instances);
    let summary = format!("{} violations", s.violations + s.collapse_violations);
    let mut doc = to_json(&s);
    doc["summary"] = json!(summary);
    let mut out = Output::new(
        doc,
        vec![
            "seed",
            "instances",
            "checks",
            "violations",
            "collapse_violations",
            "min_slack",
            "tight_rules",
        ],
    );
    out.rows.push(vec![
        s.seed.to_string(),
        s.instances.to_string(),
        s.checks.to_string(),
        s.violations.to_string(),
        s.collapse_violations.to_string(),
        num(s.min_slack),
        s.tight_rules.to_string(),
    ]);
    out.footer.push(summary);
    if s.violations + s.collapse_violations > 0 {
        out.status = EXIT_FAILED;
    }
    out
}

fn corpus_cmd(action: &CorpusAction) -> Result<Output> {
    match action {
        CorpusAction::List => {
            let entries = corpus::registry();
            let mut out = Output::new(
                to_json(&entries),
                vec!["id", "source", "index_pair", "regular", "grid"],
            );
            for e in &entries {
                out.rows.push(vec![
                    e.id.clone(),
                    e.source.label(),
                    e.index_pair.to_string(),
                    e.regular.to_string(),
                    e.grid.label(),
                ]);
            }
            Ok(out)
        }
        CorpusAction::Describe { id } => {
            let e = corpus::lookup(id)
                .ok_or_else(|| Error::UnknownFamily(format!("no corpus entry '{id}'")))?;
            let mut out = Output::new(
                to_json(&e),
                vec!["kind", "p", "q", "aux", "value", "tolerance", "note"],
            );
            for a in &e.analytic {
                out.rows.push(vec![
                    a.kind.name().into(),
                    a.p.to_string(),
                    a.q.to_string(),
                    opt_num(a.aux),
                    num(a.value),
                    num(a.tolerance),
                    a.note.clone(),
                ]);
            }
            Ok(out)
        }
    }
}

/// Executes a parsed command.
pub fn execute(cli: &Cli) -> Result<Output> {
    let settings = cli.tuning.settings()?;
    match &cli.command {
        Command::Validate { spec, batch } => validate(spec, batch),
        Command::Profile {
            spec,
            sigma,
            surrogate,
            cache_dir,
            cache,
        } => profile(spec, sigma, (*surrogate).into(), *cache, cache_dir),
        Command::Indicator {
            spec,
            p,
            q,
            sigma,
            kind,
            aux,
            plot,
        } => indicator(spec, *p, *q, sigma, *kind, *aux, *plot, &settings),
        Command::Relative {
            f,
            g,
            p,
            q,
            sigma,
            form,
        } => relative(f, g, *p, *q, sigma, (*form).into(), &settings),
        Command::Detect {
            spec,
            g,
            m,
            p_max,
            q_max,
            sigma,
        } => detect(spec, g, *m, *p_max, *q_max, sigma, &settings),
        Command::Check { batch, tol, .. } => check(batch, *tol),
        Command::Oracle { instances, seed } => Ok(run_oracle(*instances, *seed)),
        Command::Corpus { action } => corpus_cmd(action),
    }
}

/// Parses `args`, runs the command and writes its output; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = execute(&cli).and_then(|o| Ok((o.render(cli.format)?, o.status)));
    match result {
        Ok((text, status)) => match out.write_all(text.as_bytes()) {
            Ok(()) => status,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_usage() {
                EXIT_USAGE
            } else {
                EXIT_NUMERIC
            }
        }
    }
}
