//! Experiment harness behind the `wplab` binary.
//!
//! Every experiment walks a grid of signatures, evaluates one family of
//! quantities per grid point on a worker pool and emits rows in input order.
//! The rows share one schema:
//!
//! | column      | meaning                                              |
//! |-------------|------------------------------------------------------|
//! | `experiment`| experiment name                                      |
//! | `input`     | `name=value` pairs joined by `;`                     |
//! | `exact`     | exact value in `Q[pi]`, or a label                   |
//! | `numeric`   | decimal value of the main quantity                   |
//! | `reference` | value the main quantity is compared against          |
//! | `deviation` | distance between `numeric` and `reference`           |
//! | `statistic` | a derived scalar, see [`describe`]                   |
//! | `status`    | `PASS` or `FAIL`                                     |
//! | `warnings`  | hypothesis violations joined by ` | `                |

use std::cmp::Ordering;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{compare, eval_numeric, parse_rat, rat, PiPoly, PiScalar, Rat};
use crate::error::{out_of_range, Error, Result};
use crate::geometry::{
    collar_halfwidth, phi_grid_min, phi_min, regime_constants, sphere_h_upper,
};
use crate::intersection::{dimension, is_stable, BracketEngine, WarmStats};
use crate::random_model::{
    cheeger_prob_upper, cheeger_regime_limit, factorial_moment, poisson_lambda, pvol2_sum,
    second_moment_bound, two_curve_expectation_bound, CutoffLength,
};
use crate::topology::{enumerate_splits, euler};
use crate::volumes::{cor1_bound_check, identity_check, lratio_check, mz_ratio, ratio_r, volume};

pub const EXPERIMENTS: [&str; 12] = [
    "volume-table",
    "mz-ratio",
    "ratio-R",
    "identity",
    "poisson-moments",
    "second-moment",
    "cheeger-upper",
    "pvol2",
    "two-curve",
    "geometry-constants",
    "lratio",
    "cache-warm",
];

pub const DEFAULT_BUDGET: u32 = 18;
pub const BUDGET_WARN_ABOVE: u32 = 22;
pub const MIN_DIGITS: u32 = 15;
pub const DEFAULT_DIGITS: u32 = 30;
pub const CACHE_FILE: &str = "brackets.wpc";
pub const CACHE_ENV: &str = "WPLAB_CACHE";

/// One line of help per experiment: input columns and the meaning of the
/// reference and statistic columns.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "volume-table" => "g;n | exact V_{g,n} | statistic: V_{g,n} sqrt(chi)/((chi-1)! (4pi^2)^(chi-1)) | PASS if V > 0",
        "mz-ratio" => "g;n (n >= 1) | numeric 4pi^2 (2g-2+n)V_{g,n}/V_{g,n+1}, reference 1 | statistic: implied c2 = |ratio - 1/(4pi^2)| chi/n",
        "ratio-R" => "g;n | exact V_{g,n}^2/(V_{g,n-1}V_{g,n+1}), reference 1/2 - pi^2/20 | PASS if R lies in [1/2 - pi^2/20, 1]",
        "identity" => "g;n | lhs (2g-2+n)V_{g,n}/V_{g,n+1}, reference the alternating b_m c_m sum, deviation the exact residual | PASS if residual is 0",
        "poisson-moments" => "g;n;r with n = floor(a sqrt g) | exact r-th factorial moment at L = 2pi C (or --L), reference main term, deviation relative | statistic lambda(a,C)^r",
        "second-moment" => "g;n (n >= 4) | exact E[N^2], numeric E[N]^2/E[N^2], reference V_{g,n-1}^2/(V_{g,n}V_{g,n-2}) | statistic E[N] | PASS if E[N^2] = E[N] + E[(N)_2] and 0 <= bound <= 1",
        "cheeger-upper" => "g;n | numeric upper bound on P(H <= C), reference log2/(2pi) | PASS if finite",
        "pvol2" => "g;n | numeric sum over m >= 2 at u | statistic sum * sqrt(g) | PASS if finite",
        "two-curve" => "g;n (g >= 1) | exact two-curve expectation bound at C | statistic bound * (g + n) | PASS if finite and >= 0",
        "geometry-constants" => "k | regime constants to 30 digits, phi grid minima, collar fixed point, sphere scaling | PASS within the stated tolerance",
        "lratio" => "g;n;m;j (j-th split of I_m) | numeric V_{g1,n1}V_{g2,n2}/V_{g,n}, reference m^m (chi-m)^(chi-m)/chi^chi | statistic lhs/rhs",
        "cache-warm" => "budget | numeric total entries, reference new entries, statistic signatures | persists the cache when a cache directory is set",
        _ => return None,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Parse { what: "format", input: s.to_string() }),
        }
    }
}

/// Configuration values from one source; unset fields fall through to the
/// next source.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PartialConfig {
    pub budget: Option<u32>,
    pub digits: Option<u32>,
    pub cache_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub gmin: Option<u32>,
    pub gmax: Option<u32>,
    pub nmin: Option<u32>,
    pub nmax: Option<u32>,
    pub a: Option<Rat>,
    pub c: Option<Rat>,
    pub u: Option<Rat>,
    pub l: Option<CutoffLength>,
    pub format: Option<Format>,
}

fn parse_num<T: FromStr>(what: &'static str, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse { what, input: s.to_string() })
}

impl PartialConfig {
    /// Reads flat `key = value` text. Blank lines and lines starting with
    /// `#` are skipped.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut out = PartialConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |msg: String| Error::Malformed { path: path.to_path_buf(), line: i + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| malformed(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "budget" => out.budget = Some(parse_num("budget", value)?),
                "digits" => out.digits = Some(parse_num("digits", value)?),
                "cache_dir" => out.cache_dir = Some(PathBuf::from(value)),
                "threads" => out.threads = Some(parse_num("threads", value)?),
                "seed" => out.seed = Some(parse_num("seed", value)?),
                "gmin" => out.gmin = Some(parse_num("gmin", value)?),
                "gmax" => out.gmax = Some(parse_num("gmax", value)?),
                "nmin" => out.nmin = Some(parse_num("nmin", value)?),
                "nmax" => out.nmax = Some(parse_num("nmax", value)?),
                "a" => out.a = Some(parse_rat(value)?),
                "C" | "c" => out.c = Some(parse_rat(value)?),
                "u" => out.u = Some(parse_rat(value)?),
                "L" | "l" => out.l = Some(value.parse()?),
                "format" => out.format = Some(value.parse()?),
                _ => return Err(malformed(format!("unknown key {key:?}"))),
            }
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?, path)
    }

    /// Fields of `self` win over those of `lower`.
    pub fn or(self, lower: PartialConfig) -> PartialConfig {
        PartialConfig {
            budget: self.budget.or(lower.budget),
            digits: self.digits.or(lower.digits),
            cache_dir: self.cache_dir.or(lower.cache_dir),
            threads: self.threads.or(lower.threads),
            seed: self.seed.or(lower.seed),
            gmin: self.gmin.or(lower.gmin),
            gmax: self.gmax.or(lower.gmax),
            nmin: self.nmin.or(lower.nmin),
            nmax: self.nmax.or(lower.nmax),
            a: self.a.or(lower.a),
            c: self.c.or(lower.c),
            u: self.u.or(lower.u),
            l: self.l.or(lower.l),
            format: self.format.or(lower.format),
        }
    }
}

/// Grid bounds. Unset bounds default to everything within the budget, and
/// points beyond the budget are then skipped. When both `gmax` and `nmax`
/// are set the grid is strict and a point beyond the budget is an error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Grid {
    pub gmin: Option<u32>,
    pub gmax: Option<u32>,
    pub nmin: Option<u32>,
    pub nmax: Option<u32>,
}

impl Grid {
    pub fn strict(&self) -> bool {
        self.gmax.is_some() && self.nmax.is_some()
    }

    fn genera(&self, budget: u32) -> std::ops::RangeInclusive<u32> {
        self.gmin.unwrap_or(0)..=self.gmax.unwrap_or(budget / 3 + 1)
    }

    fn punctures(&self, budget: u32) -> std::ops::RangeInclusive<u32> {
        self.nmin.unwrap_or(0)..=self.nmax.unwrap_or(budget + 3)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabConfig {
    pub budget: u32,
    pub digits: u32,
    pub cache_dir: Option<PathBuf>,
    pub threads: usize,
    /// Carried for sampling runs; no current experiment draws random numbers.
    pub seed: u64,
    pub grid: Grid,
    pub a: Rat,
    pub c: Rat,
    pub u: Rat,
    pub l: Option<CutoffLength>,
    pub format: Format,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            budget: DEFAULT_BUDGET,
            digits: DEFAULT_DIGITS,
            cache_dir: None,
            threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            seed: 0,
            grid: Grid::default(),
            a: rat(4, 1),
            c: rat(1, 10),
            u: rat(1, 20),
            l: None,
            format: Format::Csv,
        }
    }
}

impl LabConfig {
    /// Merges the sources with precedence flag > file > environment >
    /// default and validates the result.
    pub fn resolve(flags: PartialConfig, file: Option<PartialConfig>, env_cache: Option<String>) -> Result<Self> {
        let env = PartialConfig { cache_dir: env_cache.filter(|s| !s.is_empty()).map(PathBuf::from), ..Default::default() };
        let p = flags.or(file.unwrap_or_default()).or(env);
        let d = LabConfig::default();
        let cfg = LabConfig {
            budget: p.budget.unwrap_or(d.budget),
            digits: p.digits.unwrap_or(d.digits),
            cache_dir: p.cache_dir,
            threads: p.threads.unwrap_or(d.threads),
            seed: p.seed.unwrap_or(d.seed),
            grid: Grid { gmin: p.gmin, gmax: p.gmax, nmin: p.nmin, nmax: p.nmax },
            a: p.a.unwrap_or(d.a),
            c: p.c.unwrap_or(d.c),
            u: p.u.unwrap_or(d.u),
            l: p.l,
            format: p.format.unwrap_or(d.format),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.digits < MIN_DIGITS {
            return Err(out_of_range("digits", format!("{} < {MIN_DIGITS}", self.digits)));
        }
        if self.threads == 0 {
            return Err(out_of_range("threads", "0"));
        }
        for (what, q) in [("a", &self.a), ("C", &self.c), ("u", &self.u)] {
            if q.is_negative() {
                return Err(out_of_range(what, q.to_string()));
            }
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.budget > BUDGET_WARN_ABOVE {
            w.push(format!("budget {} is above {BUDGET_WARN_ABOVE}; the bracket closure may take hours", self.budget));
        }
        w
    }

    pub fn cache_path(&self) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|d| d.join(CACHE_FILE))
    }

    fn cutoff(&self) -> Result<CutoffLength> {
        match &self.l {
            Some(l) => Ok(l.clone()),
            None => CutoffLength::times_pi(&self.c * rat(2, 1)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub input: Vec<u32>,
    pub exact: String,
    pub numeric: String,
    pub reference: String,
    pub deviation: String,
    pub statistic: String,
    pub status: Status,
    pub warnings: Vec<String>,
}

impl ExperimentRow {
    fn new(input: Vec<u32>) -> Self {
        ExperimentRow {
            input,
            exact: String::new(),
            numeric: String::new(),
            reference: String::new(),
            deviation: String::new(),
            statistic: String::new(),
            status: Status::Pass,
            warnings: Vec::new(),
        }
    }
}

/// The flat record written to CSV and JSON.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record<'a> {
    pub experiment: &'a str,
    pub input: String,
    pub exact: &'a str,
    pub numeric: &'a str,
    pub reference: &'a str,
    pub deviation: &'a str,
    pub statistic: &'a str,
    pub status: Status,
    pub warnings: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub experiment: &'static str,
    pub input_names: &'static [&'static str],
    pub rows: Vec<ExperimentRow>,
    /// Run information that is not part of the artifact, such as timings.
    pub notes: Vec<String>,
}

impl Artifact {
    pub fn records(&self) -> Vec<Record<'_>> {
        self.rows
            .iter()
            .map(|r| Record {
                experiment: self.experiment,
                input: self
                    .input_names
                    .iter()
                    .zip(&r.input)
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(";"),
                exact: &r.exact,
                numeric: &r.numeric,
                reference: &r.reference,
                deviation: &r.deviation,
                statistic: &r.statistic,
                status: r.status,
                warnings: r.warnings.join(" | "),
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record(["experiment", "input", "exact", "numeric", "reference", "deviation", "statistic", "status", "warnings"])?;
        }
        for r in self.records() {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.records())? + "\n")
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.status == Status::Pass)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status == Status::Fail).count()
    }
}

fn dec(x: impl Into<PiPoly>, digits: u32) -> Result<String> {
    Ok(eval_numeric(x, digits)?.to_decimal(digits))
}

fn num_f64(x: f64) -> String {
    format!("{x:e}")
}

fn to_f64(q: &Rat) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `floor(a sqrt(g))`, computed exactly.
pub fn punctures_for(a: &Rat, g: u32) -> u32 {
    let target = a * a * Rat::from_integer(g.into());
    let mut n: u32 = 0;
    while Rat::from_integer(((n + 1) * (n + 1)).into()) <= target {
        n += 1;
    }
    n
}

struct Ctx<'a> {
    e: &'a BracketEngine,
    cfg: &'a LabConfig,
}

impl Ctx<'_> {
    fn need(&self, g: u32, n: u32) -> Result<()> {
        self.e.check_budget(g, n)?;
        let dim = dimension(g, n);
        if dim > i64::from(self.cfg.budget) {
            return Err(Error::BudgetExceeded { g, n, dim: dim as u32, budget: self.cfg.budget });
        }
        Ok(())
    }
}

type PointFn<'a> = dyn Fn(&Ctx, &[u32]) -> Result<Vec<ExperimentRow>> + Sync + 'a;

/// Loads the persisted cache into `e` when the configuration names one.
pub fn load_cache(cfg: &LabConfig, e: &BracketEngine) -> Result<usize> {
    match cfg.cache_path() {
        Some(p) if p.exists() => e.cache().load(&p),
        _ => Ok(0),
    }
}

pub fn run_experiment(name: &str, cfg: &LabConfig) -> Result<Artifact> {
    let name = canonical(name)?;
    let e = BracketEngine::with_budget(cfg.budget);
    load_cache(cfg, &e)?;
    run_with_engine(name, cfg, &e)
}

fn canonical(name: &str) -> Result<&'static str> {
    EXPERIMENTS.iter().copied().find(|x| *x == name).ok_or_else(|| Error::UnknownExperiment {
        name: name.to_string(),
        valid: EXPERIMENTS.join(", "),
    })
}

/// Computes every bracket within the configured budget and saves the cache
/// when a cache directory is configured.
pub fn cache_warm(cfg: &LabConfig, e: &BracketEngine) -> Result<(WarmStats, Option<PathBuf>)> {
    if let Some(dir) = &cfg.cache_dir {
        fs::create_dir_all(dir)?;
    }
    let stats = e.warm(cfg.budget, cfg.threads)?;
    let saved = match cfg.cache_path() {
        Some(p) => {
            e.cache().save(&p)?;
            Some(p)
        }
        None => None,
    };
    Ok((stats, saved))
}

/// Runs `name` against an existing engine. Grid points are reachable when
/// they fit both the configured budget and the engine's own budget.
pub fn run_with_engine(name: &str, cfg: &LabConfig, e: &BracketEngine) -> Result<Artifact> {
    let name = canonical(name)?;
    let ctx = Ctx { e, cfg };
    let budget = e.budget().map_or(cfg.budget, |b| b.min(cfg.budget));
    let signatures: Vec<Vec<u32>> = cfg
        .grid
        .genera(budget)
        .flat_map(|g| cfg.grid.punctures(budget).map(move |n| vec![g, n]))
        .filter(|p| is_stable(p[0], p[1]))
        .collect();
    let with_n_ge = |k: u32| signatures.iter().filter(|p| p[1] >= k).cloned().collect::<Vec<_>>();
    let (names, points, f): (&'static [&'static str], Vec<Vec<u32>>, Box<PointFn>) = match name {
        "volume-table" => (&["g", "n"], signatures.clone(), Box::new(volume_row)),
        "mz-ratio" => (&["g", "n"], with_n_ge(1), Box::new(mz_row)),
        "ratio-R" => (
            &["g", "n"],
            signatures.iter().filter(|p| p[1] >= 1 && is_stable(p[0], p[1] - 1)).cloned().collect(),
            Box::new(ratio_row),
        ),
        "identity" => (&["g", "n"], signatures.clone(), Box::new(identity_row)),
        "poisson-moments" => {
            let gs = cfg.grid.genera(budget).filter(|&g| g >= 1);
            let pts = gs.map(|g| vec![g, punctures_for(&cfg.a, g)]).filter(|p| p[1] >= 2).collect();
            (&["g", "n", "r"], pts, Box::new(poisson_rows))
        }
        "second-moment" => (
            &["g", "n"],
            signatures.iter().filter(|p| p[1] >= 4 && is_stable(p[0], p[1] - 2)).cloned().collect(),
            Box::new(second_moment_row),
        ),
        "cheeger-upper" => (&["g", "n"], signatures.iter().filter(|p| euler(p[0], p[1]) >= 2).cloned().collect(), Box::new(cheeger_row)),
        "pvol2" => (&["g", "n"], signatures.iter().filter(|p| euler(p[0], p[1]) >= 2).cloned().collect(), Box::new(pvol2_row)),
        "two-curve" => (&["g", "n"], signatures.iter().filter(|p| p[0] >= 1).cloned().collect(), Box::new(two_curve_row)),
        "geometry-constants" => (&["k"], vec![vec![]], Box::new(geometry_rows)),
        "lratio" => (&["g", "n", "m", "j"], signatures.iter().filter(|p| euler(p[0], p[1]) >= 2).cloned().collect(), Box::new(lratio_rows)),
        "cache-warm" => {
            let (stats, saved) = cache_warm(cfg, e)?;
            let mut row = ExperimentRow::new(vec![cfg.budget]);
            row.exact = "bracket cache".to_string();
            row.numeric = stats.total_entries.to_string();
            row.reference = stats.new_entries.to_string();
            row.statistic = stats.signatures.to_string();
            let mut notes = vec![format!("warmed in {:.3} s", stats.elapsed.as_secs_f64())];
            if let Some(p) = saved {
                notes.push(format!("saved {}", p.display()));
            }
            return Ok(Artifact { experiment: "cache-warm", input_names: &["budget"], rows: vec![row], notes });
        }
        _ => unreachable!("canonical name"),
    };
    let strict = cfg.grid.strict() || name == "geometry-constants";
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.max(1))
        .build()
        .map_err(|err| out_of_range("thread pool", err.to_string()))?;
    let results: Vec<Result<Vec<ExperimentRow>>> = pool.install(|| points.par_iter().map(|p| f(&ctx, p)).collect());
    let mut rows = Vec::new();
    for r in results {
        match r {
            Ok(v) => rows.extend(v),
            Err(Error::BudgetExceeded { .. }) if !strict => {}
            Err(err) => return Err(err),
        }
    }
    rows.sort_by(|a, b| a.input.cmp(&b.input));
    Ok(Artifact { experiment: name, input_names: names, rows, notes: Vec::new() })
}

fn volume_row(ctx: &Ctx, p: &[u32]) -> Result<Vec<ExperimentRow>> {
    let (g, n) = (p[0], p[1]);
    ctx.need(g, n)?;
    let v = volume(ctx.e, g, n)?;
    let mut row = ExperimentRow::new(p.to_vec());
    row.exact = v.to_string();
    row.numeric = dec(v.clone(), ctx.cfg.digits)?;
    row.statistic = num_f64(cor1_bound_check(ctx.e, g, n)?);
    row.status = Status::from_bool(v.coeff().is_positive());
    Ok(vec![row])
}

fn four_pi_sq() -> PiScalar {
    PiScalar::new(rat(4, 1), 2)
}

fn mz_row(ctx: &Ctx, p: &[u32]) -> Result<Vec<ExperimentRow>> {
    let (g, n) = (p[0], p[1]);
    ctx.need(g, n + 1)?;
    let mz = mz_ratio(ctx.e, g, n)?;
    let scaled = &mz * &four_pi_sq();
    let dev = eval_numeric(&PiPoly::from(scaled.clone()) - &PiPoly::one(), ctx.cfg.digits)?;
    let dev_f = dev.to_f64().abs();
    let mut row = ExperimentRow::new(p.to_vec());
    row.exact = mz.to_string();
    row.numeric = dec(scaled, ctx.cfg.digits)?;
    row.reference = "1".to_string();
    row.deviation = num_f64(dev_f);
    let chi = euler(g, n) as f64;
    row.statistic = num_f64(dev_f / (4.0 * std::f64::consts::PI.powi(2)) * chi / n as f64);
    row.status = Status::from_bool(mz.coeff().is_positive());
    Ok(vec![row])
}

fn ratio_row(ctx: &Ctx, p: &[u32]) -> Result<Vec<ExperimentRow>> {
    let (g, n) = (p[0], p[1]);
    ctx.need(g, n + 1)?;
    let r = ratio_r(ctx.e, g, n)?;
    let lower = {
        let mut q = PiPoly::rational(rat(1, 2));
        q.add_term(&PiScalar::frac(-1, 20, 2));
        q
    };
    let rp = PiPoly::rational(r.clone());
    let above = compare(&rp, &lower)? != Ordering::Less;
    let below = r <= rat(1, 1);
    let lower_f = eval_numeric(lower.clone(), ctx.cfg.digits)?.to_f64();
    let rf = to_f64(&r);
    let mut row = ExperimentRow::new(p.to_vec());
    row.exact = r.to_string();
    row.numeric = dec(rp, ctx.cfg.digits)?;
    row.reference = dec(lower, ctx.cfg.digits)?;
    row.deviation = num_f64((lower_f - rf).max(rf - 1.0).max(0.0));
    row.status = Status::from_bool(above && below);
    Ok(vec![row])
}

fn identity_row(ctx: &Ctx, p: &[u32]) -> Result<Vec<ExperimentRow>> {
    let (g, n) = (p[0], p[1]);
    ctx.need(g, n + 1)?;
    let c = identity_check(ctx.e, g, n)?;
    let mut row = ExperimentRow::new(p.to_vec());
    row.exact = c.lhs.to_string();
    row.numeric = dec(c.lhs.clone(), ctx.cfg.digits)?;
    row.reference = dec(c.rhs.clone(), ctx.cfg.digits)?;
    row.deviation = if c.holds() { "0".to_string() } else { c.residual.to_string() };
    row.status = Status::from_bool(c.holds());
    Ok(vec![row])
}

fn poisson_rows(ctx: &Ctx, p: &[u32]) -> Result<Vec<ExperimentRow>> {
    let (g, n) = (p[0], p[1]);
    ctx.need(g, n)?;
    let l = ctx.cfg.cutoff()?;
    let lambda = poisson_lambda(to_f64(&ctx.cfg.a), to_f64(&ctx.cfg.c))?;
    let mut rows = Vec::new();
    for r in 1..=3u32 {
        if n < 2 * r || !is_stable(g, n - r) {
            continue;
        }
        let m = factorial_moment(ctx.e, g, n, r, &l)?;
        let exact = m.exact.clone().expect("exact cut-off");
        let mut row = ExperimentRow::new(vec![g, n, r]);
        row.exact = exact.to_string();
        row.numeric = dec(exact, ctx.cfg.digits)?;
        row.reference = num_f64(m.main_term);
        row.deviation = num_f64(m.rel_deviation);
        row.statistic = num_f64(lambda.value.powi(r as i32));
        row.status = Status::from_bool(m.numeric.to_f64() >= 0.0 && m.rel_deviation.is_finite());
        row.warnings = m.warnings;
        row.warnings.extend(lambda.warnings.iter().cloned());
        rows.push(row);
    }
    Ok(rows)
}

fn second_moment_row(ctx: &Ctx, p: &[u32]) -> Result<Vec<ExperimentRow>> {
    let (g, n) = (p[0], p[1]);
    ctx.need(g, n)?;
    let s = second_moment_bound(ctx.e, g, n, &ctx.cfg.cutoff()?)?;
    let exact_ok = s.second_moment == &s.mean + &s.second_factorial;
    let target = to_f64(&s.target);
    let mut row = ExperimentRow::new(p.to_vec());
    row.exact = s.second_moment.to_string();
    row.numeric = num_f64(s.bound);
    row.reference = dec(PiPoly::rational(s.target.clone()), ctx.cfg.digits)?;
    row.deviation = num_f64((s.bound - target).abs());
    row.statistic = num_f64(eval_numeric(s.mean.clone(), ctx.cfg.digits)?.to_f64());
    row.status = Status::from_bool(exact_ok && (0.0..=1.0).contains(&s.bound));
    row.warnings = s.warnings;
    Ok(vec![row])
}

fn cheeger_row(ctx: &Ctx, p: &[u32]) -> Result<Vec<ExperimentRow>> {
    let (g, n) = (p[0], p[1]);
    ctx.need(g, n)?;
    let v = cheeger_prob_upper(ctx.e, g, n, to_f64(&ctx.cfg.c))?;
    let mut row = ExperimentRow::new(p.to_vec());
    row.exact = format!("C={}", ctx.cfg.c);
    row.numeric = num_f64(v.value);
    row.reference = num_f64(cheeger_regime_limit());
    row.status = Status::from_bool(v.value.is_finite());
    row.warnings = v.warnings;
    Ok(vec![row])
}

fn pvol2_row(ctx: &Ctx, p: &[u32]) -> Result<Vec<ExperimentRow>> {
    let (g, n) = (p[0], p[1]);
    ctx.need(g, n)?;
    let v = pvol2_sum(ctx.e, g, n, to_f64(&ctx.cfg.u))?;
    let mut row = ExperimentRow::new(p.to_vec());
    row.exact = format!("u={}", ctx.cfg.u);
    row.numeric = num_f64(v);
    row.statistic = num_f64(v * (g as f64).sqrt());
    row.status = Status::from_bool(v.is_finite());
    Ok(vec![row])
}

fn two_curve_row(ctx: &Ctx, p: &[u32]) -> Result<Vec<ExperimentRow>> {
    let (g, n) = (p[0], p[1]);
    ctx.need(g, n)?;
    if !is_stable(g - 1, n + 1) {
        return Ok(Vec::new());
    }
    let b = two_curve_expectation_bound(ctx.e, g, n, &ctx.cfg.c)?;
    let mut row = ExperimentRow::new(p.to_vec());
    row.exact = b.exact.to_string();
    row.numeric = dec(b.exact.clone(), ctx.cfg.digits)?;
    row.statistic = num_f64(b.scaled);
    row.status = Status::from_bool(b.value.is_finite() && b.value >= 0.0);
    Ok(vec![row])
}

fn check_row(k: u32, label: String, value: f64, reference: f64, tol: f64) -> ExperimentRow {
    let mut row = ExperimentRow::new(vec![k]);
    let dev = (value - reference).abs();
    row.exact = label;
    row.numeric = num_f64(value);
    row.reference = num_f64(reference);
    row.deviation = num_f64(dev);
    row.statistic = num_f64(tol);
    row.status = Status::from_bool(dev <= tol);
    row
}

fn geometry_rows(_: &Ctx, _: &[u32]) -> Result<Vec<ExperimentRow>> {
    use std::f64::consts::{LN_2, PI};
    let consts = regime_constants()?;
    let closed = [
        LN_2 / (4.0 * PI * (LN_2 + PI)).sqrt(),
        0.25 * (LN_2 / (LN_2 + 2.0 * PI)).powi(2),
        LN_2 / (2.0 * PI),
        LN_2 / (LN_2 + 2.0 * PI),
    ];
    let mut rows = Vec::new();
    for (k, (c, reference)) in consts.all().into_iter().zip(closed).enumerate() {
        rows.push(check_row(k as u32, format!("{} = {}", c.name, c.decimal), c.value(), reference, 1e-15));
    }
    for (i, h) in [0.05, 0.11, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let grid = phi_grid_min(h, 5.0, 1e-4)?;
        rows.push(check_row(4 + i as u32, format!("phi grid minimum, H = {h}"), grid, phi_min(h)?, 1e-6));
    }
    let fixed = collar_halfwidth(2.0 * 1f64.asinh())?;
    rows.push(check_row(9, "collar half-width at 2 arcsinh 1".to_string(), fixed, 1f64.asinh(), 1e-12));
    let ratio = sphere_h_upper(400)? / sphere_h_upper(100)?;
    rows.push(check_row(10, "sphere bound ratio n = 400 vs 100".to_string(), ratio, 0.5, 0.01));
    Ok(rows)
}

fn lratio_rows(ctx: &Ctx, p: &[u32]) -> Result<Vec<ExperimentRow>> {
    let (g, n) = (p[0], p[1]);
    ctx.need(g, n)?;
    let mut rows = Vec::new();
    for m in 1..=(euler(g, n) / 2) as u32 {
        for (j, s) in enumerate_splits(m, g, n)?.into_iter().enumerate() {
            let r = lratio_check(ctx.e, m, &s, g, n)?;
            let mut row = ExperimentRow::new(vec![g, n, m, j as u32]);
            row.exact = format!("{s}: {}", r.exact_lhs);
            row.numeric = num_f64(r.lhs);
            row.reference = num_f64(r.rhs);
            row.statistic = num_f64(r.lhs / r.rhs);
            row.status = Status::from_bool(r.lhs > 0.0 && r.rhs > 0.0 && !r.exact_rhs.is_zero());
            rows.push(row);
        }
    }
    Ok(rows)
}
