//! The `negen` command line: parameter sweeps, F searches, density maps and
//! oracle verification.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fmt;
use std::io;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use negen_core::energy::{default_window, density_profile, ModeGeometry};
use negen_core::families::f_sigma;
use negen_core::optimizer::{multi_start, SearchConfig, SearchSpace};
use negen_core::verify::{run_verify, VerifyConfig, VerifySummary, IDENTITY_TOL};
use negen_core::{Error, FamilyKind, Moments};
use rayon::prelude::*;
use serde_json::json;

pub mod output;

use output::{json_bytes, json_document, write_output, Cell, Format, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Sweep-only pseudo family: `f(σ)` of the entangled coherent state.
pub const ECS_F: &str = "ecs-f";

#[derive(Parser, Debug)]
#[command(
    name = "negen",
    version,
    about = "Negative energy density of one- and two-mode field states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate n, R and F = R − n along one parameter.
    Sweep(SweepArgs),
    /// Multi-start gradient ascent of F.
    Search(SearchArgs),
    /// Energy density on a space-time grid and its minimum.
    Density(DensityArgs),
    /// Compare closed forms with number-basis sums.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub family: String,
    /// Fixed parameter, `key=value`; values may be written as multiples of pi (`0.99pi`).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// `key=lo:hi:steps`; emits steps + 1 rows.
    #[arg(long, value_name = "KEY=LO:HI:STEPS")]
    pub sweep: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long)]
    pub family: String,
    /// Pins a parameter and removes it from the search.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Overrides the search interval of a free parameter.
    #[arg(long = "bound", value_name = "KEY=LO:HI")]
    pub bound: Vec<String>,
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// `traveling:w1:w2:cosangle` or `standing:w1:w2`.
    #[arg(long)]
    pub geometry: String,
    /// Extent of both the spatial coordinate and time; one slow period by default.
    #[arg(long)]
    pub window: Option<f64>,
    /// Grid intervals per axis (at least 16).
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Comma-separated family names; all when absent.
    #[arg(long, value_delimiter = ',')]
    pub families: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Smallest single-mode cutoff; grown until the tail mass is negligible.
    #[arg(long, default_value_t = 64)]
    pub cutoff: usize,
    /// Smallest per-mode cutoff for two-mode states.
    #[arg(long, default_value_t = 32)]
    pub cutoff_two: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(io::Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(m) => CliError::Usage(m),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Search(a) => search(a),
        Command::Density(a) => density(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("negen: {e}");
            e.code()
        }
    }
}

// ---------------------------------------------------------------------------
// argument parsing

/// A number, or a multiple of pi: `pi`, `-pi`, `0.99pi`, `0.5*pi`.
pub fn parse_value(s: &str) -> CliResult<f64> {
    let s = s.trim();
    let bad = || usage(format!("cannot read '{s}' as a number"));
    let v = if let Some(coef) = s.strip_suffix("pi") {
        let coef = coef.trim_end_matches('*');
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        c * PI
    } else {
        s.parse::<f64>().map_err(|_| bad())?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn split_key(s: &str) -> CliResult<(&str, &str)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| usage(format!("expected key=value, got '{s}'")))
}

pub fn parse_family(name: &str) -> CliResult<FamilyKind> {
    name.parse::<FamilyKind>().map_err(|_| {
        let names: Vec<&str> = FamilyKind::ALL.iter().map(|k| k.name()).collect();
        usage(format!(
            "unknown family '{name}'; expected one of {}",
            names.join(", ")
        ))
    })
}

fn param_slot(kind: FamilyKind, key: &str) -> CliResult<usize> {
    kind.param_index(key).ok_or_else(|| {
        usage(format!(
            "{kind} has no parameter '{key}'; parameters are {}",
            kind.param_names().join(", ")
        ))
    })
}

fn parse_sets(sets: &[String]) -> CliResult<Vec<(String, f64)>> {
    sets.iter()
        .map(|s| {
            let (k, v) = split_key(s)?;
            Ok((k.to_string(), parse_value(v)?))
        })
        .collect()
}

fn family_values(kind: FamilyKind, sets: &[String]) -> CliResult<Vec<f64>> {
    let mut values = kind.default_values();
    for (k, v) in parse_sets(sets)? {
        values[param_slot(kind, &k)?] = v;
    }
    Ok(values)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRange {
    pub key: String,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|i| {
                if i == self.steps {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / self.steps as f64
                }
            })
            .collect()
    }
}

pub fn parse_sweep(s: &str) -> CliResult<SweepRange> {
    let (key, range) = split_key(s)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        return Err(usage(format!("expected key=lo:hi:steps, got '{s}'")));
    };
    let steps: usize = steps
        .trim()
        .parse()
        .map_err(|_| usage(format!("steps must be a positive integer, got '{steps}'")))?;
    if steps == 0 {
        return Err(usage("steps must be at least 1"));
    }
    Ok(SweepRange {
        key: key.to_string(),
        lo: parse_value(lo)?,
        hi: parse_value(hi)?,
        steps,
    })
}

pub fn parse_geometry(s: &str) -> CliResult<ModeGeometry> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> CliResult<f64> {
        parts
            .get(i)
            .ok_or_else(|| usage(format!("geometry '{s}' is missing fields")))
            .and_then(|p| parse_value(p))
    };
    let g = match parts[0] {
        "traveling" => {
            let cos = if parts.len() > 3 { num(3)? } else { 1.0 };
            if parts.len() > 4 {
                return Err(usage(format!("geometry '{s}' has too many fields")));
            }
            ModeGeometry::traveling_at_angle(num(1)?, num(2)?, cos)?
        }
        "standing" => {
            if parts.len() > 4 {
                return Err(usage(format!("geometry '{s}' has too many fields")));
            }
            ModeGeometry::standing(num(1)?, num(2)?)?
        }
        other => {
            return Err(usage(format!(
                "geometry kind must be traveling or standing, got '{other}'"
            )))
        }
    };
    Ok(g)
}

fn emit(out: &OutputArgs, table: &Table, doc: serde_json::Value) -> CliResult<()> {
    let bytes = match out.format {
        Format::Csv => table.to_csv()?,
        Format::Json => json_bytes(&doc),
    };
    write_output(out.out.as_deref(), &bytes)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep

fn moment_cells(m: &Moments, depth: Option<f64>) -> Vec<Cell> {
    match m {
        Moments::One(m) => vec![m.n.into(), m.amp.into(), depth.into()],
        Moments::Two(m) => {
            let mut cells: Vec<Cell> = vec![m.n1.into(), m.n2.into()];
            cells.extend(m.amp.iter().map(|x| Cell::Num(*x)));
            cells.push(depth.into());
            cells
        }
    }
}

pub fn sweep(args: SweepArgs) -> CliResult<i32> {
    let plan = parse_sweep(&args.sweep)?;
    let xs = plan.values();
    let (table, family_name) = if args.family == ECS_F {
        if plan.key != "sigma" {
            return Err(usage(format!("{ECS_F} sweeps sigma, not '{}'", plan.key)));
        }
        if !args.set.is_empty() {
            return Err(usage(format!("{ECS_F} takes no fixed parameters")));
        }
        let mut t = Table::new(["sigma", "f"]);
        for x in &xs {
            let f = f_sigma(*x);
            t.push(vec![(*x).into(), Cell::from(f.is_finite().then_some(f))]);
        }
        (t, ECS_F.to_string())
    } else {
        let kind = parse_family(&args.family)?;
        let base = family_values(kind, &args.set)?;
        let slot = param_slot(kind, &plan.key)?;
        let mut header = vec![plan.key.clone()];
        let width = if kind.is_two_mode() {
            header.extend(["n1", "n2", "R1", "R2", "R3", "R4", "F"].map(String::from));
            7
        } else {
            header.extend(["n", "R", "F"].map(String::from));
            3
        };
        let rows: Vec<Vec<Cell>> = xs
            .par_iter()
            .map(|x| {
                let mut v = base.clone();
                v[slot] = *x;
                let mut row = vec![Cell::Num(*x)];
                // F is left empty where R − n is swamped by rounding
                let evaluated = kind
                    .build(&v)
                    .and_then(|p| Ok((p.moments()?, p.depth().ok())));
                match evaluated {
                    Ok((m, f)) if m.as_two_mode().is_finite() => row.extend(moment_cells(&m, f)),
                    _ => row.extend(std::iter::repeat_n(Cell::Empty, width)),
                }
                row
            })
            .collect();
        let mut t = Table::new(header);
        rows.into_iter().for_each(|r| t.push(r));
        (t, kind.name().to_string())
    };
    if table
        .rows
        .iter()
        .all(|r| r[1..].iter().all(|c| *c == Cell::Empty))
    {
        return Err(CliError::Numeric(
            "no sweep point could be evaluated".into(),
        ));
    }
    let config = json!({
        "family": family_name,
        "set": parse_sets(&args.set)?.into_iter().collect::<std::collections::BTreeMap<_, _>>(),
        "sweep": { "key": plan.key, "lo": plan.lo, "hi": plan.hi, "steps": plan.steps },
    });
    let doc = json_document("sweep", None, config, "rows", table.json_rows());
    emit(&args.output, &table, doc)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// search

pub fn search_space(
    kind: FamilyKind,
    sets: &[String],
    bounds: &[String],
) -> CliResult<SearchSpace> {
    let mut space = SearchSpace::default_for(kind);
    for (k, v) in parse_sets(sets)? {
        param_slot(kind, &k)?;
        space = space.with_fixed(&k, v)?;
    }
    for b in bounds {
        let (k, range) = split_key(b)?;
        let (lo, hi) = range
            .split_once(':')
            .ok_or_else(|| usage(format!("expected key=lo:hi, got '{b}'")))?;
        space = space.with_bounds(k, parse_value(lo)?, parse_value(hi)?)?;
    }
    if space.dim_count() == 0 {
        return Err(usage("every parameter is fixed; nothing to search"));
    }
    Ok(space)
}

pub fn search(args: SearchArgs) -> CliResult<i32> {
    let kind = parse_family(&args.family)?;
    let space = search_space(kind, &args.set, &args.bound)?;
    let cfg = SearchConfig {
        starts: args.starts,
        seed: args.seed,
        max_iters: args.max_iters,
        ..Default::default()
    };
    cfg.validate()?;
    let report = multi_start(&space, &cfg)?;

    let names = space.names();
    let mut header: Vec<String> = [
        "cluster",
        "F",
        "n",
        "R",
        "gamma",
        "grad_norm",
        "iterations",
        "converged",
        "hits",
    ]
    .map(String::from)
    .to_vec();
    header.extend(names.iter().cloned());
    let mut table = Table::new(header);
    for (i, c) in report.extrema.iter().enumerate() {
        let e = &c.extremum;
        let mut row: Vec<Cell> = vec![
            i.into(),
            e.f.into(),
            e.n.into(),
            e.amp.into(),
            e.gamma.into(),
            e.grad_norm.into(),
            e.iterations.into(),
            e.converged.into(),
            c.hits.into(),
        ];
        row.extend(e.params.iter().map(|x| Cell::Num(*x)));
        table.push(row);
    }
    let config = json!({
        "family": kind.name(),
        "search": cfg,
        "space": space,
        "failed_starts": report.failed_starts,
    });
    let body = serde_json::to_value(&report.extrema).expect("serializable");
    let doc = json_document("search", Some(args.seed), config, "extrema", body);
    emit(&args.output, &table, doc)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// density

pub fn density(args: DensityArgs) -> CliResult<i32> {
    let kind = parse_family(&args.family)?;
    let values = family_values(kind, &args.set)?;
    let g = parse_geometry(&args.geometry)?;
    let m = kind.build(&values)?.moments()?.as_two_mode();
    let window = args.window.unwrap_or_else(|| default_window(&g));
    let profile = density_profile(&m, &g, window, args.grid)?;

    let mut table = Table::new(["kind", "x", "y", "z", "t", "rho"]);
    let mut push = |label: &str, p: &negen_core::energy::SpacetimePoint, rho: f64| {
        table.push(vec![
            label.into(),
            p.x[0].into(),
            p.x[1].into(),
            p.x[2].into(),
            p.t.into(),
            rho.into(),
        ]);
    };
    for s in &profile.samples {
        push("grid", &s.point, s.rho);
    }
    push("min", &profile.min_found.point, profile.min_found.rho);

    let config = json!({
        "family": kind.name(),
        "params": kind.param_names().iter().zip(&values).map(|(k, v)| (k.to_string(), *v)).collect::<std::collections::BTreeMap<_, _>>(),
        "geometry": g,
        "window": window,
        "grid": args.grid,
        "moments": m,
    });
    let mut doc = json_document("density", None, config, "rows", table.json_rows());
    doc["min_found"] = serde_json::to_value(profile.min_found).expect("serializable");
    emit(&args.output, &table, doc)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// verify

pub fn verify_table(s: &VerifySummary) -> Table {
    let mut t = Table::new([
        "check",
        "name",
        "at",
        "value",
        "reference",
        "deviation",
        "tolerance",
        "pass",
    ]);
    for f in &s.families {
        t.push(vec![
            "family".into(),
            f.family.name().into(),
            format!("draws={}", f.draws).into(),
            Cell::Empty,
            Cell::Empty,
            f.max_deviation.into(),
            f.tolerance.into(),
            f.pass.into(),
        ]);
    }
    for c in &s.identities {
        t.push(vec![
            "identity".into(),
            c.name.as_str().into(),
            format!("r={}", c.r).into(),
            c.closed.re.into(),
            c.oracle.re.into(),
            c.deviation.into(),
            IDENTITY_TOL.into(),
            c.pass.into(),
        ]);
    }
    for a in &s.adjudication {
        t.push(vec![
            "adjudication".into(),
            "tanh squared denominator".into(),
            format!("r={}", a.r).into(),
            a.tanh_squared_form.into(),
            a.oracle.into(),
            a.deviation_tanh_squared.into(),
            IDENTITY_TOL.into(),
            a.pass.into(),
        ]);
        t.push(vec![
            "adjudication".into(),
            "linear tanh denominator".into(),
            format!("r={}", a.r).into(),
            a.linear_tanh_form.into(),
            a.oracle.into(),
            a.deviation_linear_tanh.into(),
            Cell::Num(1e-3),
            a.pass.into(),
        ]);
    }
    for c in &s.series {
        t.push(vec![
            "series".into(),
            format!("partial sum, {} terms", c.terms).into(),
            format!("r={}", c.r).into(),
            c.partial_sum.into(),
            c.limit.into(),
            c.deviation.into(),
            IDENTITY_TOL.into(),
            c.pass.into(),
        ]);
    }
    for d in &s.discrepancies {
        t.push(vec![
            "discrepancy".into(),
            d.label.as_str().into(),
            d.at.as_str().into(),
            d.printed.into(),
            d.oracle.into(),
            d.deviation.into(),
            Cell::Empty,
            Cell::Empty,
        ]);
    }
    t
}

pub fn verify(args: VerifyArgs) -> CliResult<i32> {
    let families = if args.families.is_empty() {
        FamilyKind::ALL.to_vec()
    } else {
        args.families
            .iter()
            .map(|f| parse_family(f))
            .collect::<CliResult<_>>()?
    };
    let cfg = VerifyConfig {
        families,
        draws: args.draws,
        seed: args.seed,
        cutoff_one: args.cutoff,
        cutoff_two: args.cutoff_two,
    };
    let summary = run_verify(&cfg)?;
    let table = verify_table(&summary);
    let doc = json_document(
        "verify",
        Some(args.seed),
        &cfg,
        "report",
        serde_json::to_value(&summary).expect("serializable"),
    );
    emit(&args.output, &table, doc)?;
    let failed: Vec<String> = summary
        .families
        .iter()
        .filter(|f| !f.pass)
        .map(|f| f.family.name().to_string())
        .collect();
    if summary.pass {
        eprintln!("verify: all checks passed");
        Ok(EXIT_OK)
    } else {
        eprintln!("verify: FAILED (families: {})", failed.join(", "));
        Ok(EXIT_VERIFY)
    }
}
