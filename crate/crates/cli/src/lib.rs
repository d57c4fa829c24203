//! Command-line front end for the `isochrone` toolkit.
//!
//! [`run`] takes an argument vector and returns the process exit code:
//! 0 on success, 1 on a numeric or I/O error, 2 when `--expect-isochronous`
//! is set and a certificate says otherwise, 64 on a usage error (the
//! configuration schema is printed to stderr).

pub mod config;
pub mod output;

use clap::{Parser, Subcommand};
use config::*;
use isochrone::period::{self, Criterion, Grid, Verdict};
use isochrone::potential::CATALOG;
use isochrone::schrodinger::oracle_spectrum;
use isochrone::series::{self, TruncSeries};
use isochrone::wkb::wkb_spectrum;
use isochrone::{Error, Exec};
use output::{fmt_f64, to_json, Table};
use serde::Serialize;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_ISOCHRONOUS: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "ISOCHRONE_MAX_THREADS";

#[derive(Parser, Debug)]
#[command(name = "isochrone", version, about = "Isochronous potentials: periods, certificates, WKB and quantum spectra")]
struct Cli {
    #[command(subcommand)]
    cmd: Option<Sub>,
    /// Run the configuration in this JSON file instead of a subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the run configuration as JSON and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    /// Print the configuration JSON schema and exit.
    #[arg(long)]
    schema: bool,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// List the potential catalog.
    Families,
    /// Period and period derivative on an energy grid.
    Period(PeriodArgs),
    /// Isochronicity certificates.
    Certify(CertifyArgs),
    /// The involution A(x) and its slope at given points.
    Involution(InvolutionArgs),
    /// Exact series recursions.
    Series(SeriesArgs),
    /// Semiclassical spectrum.
    Wkb(WkbArgs),
    /// Finite-difference quantum spectrum.
    #[command(subcommand)]
    Oracle(OracleSub),
    /// WKB levels against the quantum oracle.
    Compare(CompareArgs),
}

#[derive(Subcommand, Debug)]
enum OracleSub {
    Spectrum(OracleArgs),
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Parse and execute; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                isochrone::exec::set_max_threads(n);
            }
            _ => {
                let _ = writeln!(stderr, "usage error: {THREADS_ENV} must be a positive integer, got {v:?}");
                return EXIT_USAGE;
            }
        }
    }
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            return usage(stderr, &e.to_string());
        }
    };
    if cli.schema {
        let _ = writeln!(stdout, "{}", schema_json());
        return EXIT_OK;
    }
    let cfg = match resolve(cli, stdout) {
        Ok(Some(c)) => c,
        Ok(None) => return EXIT_OK,
        Err(Failure::Usage(m)) => return usage(stderr, &m),
        Err(e) => return report(stderr, e),
    };
    match execute(&cfg, stdout) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => usage(stderr, &m),
        Err(e) => report(stderr, e),
    }
}

fn usage(stderr: &mut dyn Write, msg: &str) -> i32 {
    let msg = msg.trim_end();
    let _ = writeln!(stderr, "usage error: {}", msg.strip_prefix("error: ").unwrap_or(msg));
    let _ = writeln!(stderr, "run configuration schema:\n{}", schema_json());
    EXIT_USAGE
}

fn report(stderr: &mut dyn Write, f: Failure) -> i32 {
    let _ = match f {
        Failure::Numeric(e) => writeln!(stderr, "error: {}: {e}", e.kind()),
        Failure::Io(m) => writeln!(stderr, "error: IoError: {m}"),
        Failure::Usage(m) => writeln!(stderr, "usage error: {m}"),
    };
    EXIT_ERROR
}

/// Build the [`RunConfig`]; `None` when only the configuration was printed.
fn resolve(cli: Cli, stdout: &mut dyn Write) -> Result<Option<RunConfig>, Failure> {
    let mut cfg = match (&cli.config, cli.cmd) {
        (Some(_), Some(_)) => return Err(Failure::Usage("--config and a subcommand are exclusive".into())),
        (None, None) => return Err(Failure::Usage("no subcommand given".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        (None, Some(sub)) => RunConfig {
            command: match sub {
                Sub::Families => Command::Families,
                Sub::Period(a) => Command::Period(a),
                Sub::Certify(a) => Command::Certify(a),
                Sub::Involution(a) => Command::Involution(a),
                Sub::Series(a) => Command::Series(a),
                Sub::Wkb(a) => Command::Wkb(a),
                Sub::Oracle(OracleSub::Spectrum(a)) => Command::Oracle(a),
                Sub::Compare(a) => Command::Compare(a),
            },
            format: Format::default(),
            output: None,
        },
    };
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if cli.output.is_some() {
        cfg.output = cli.output;
    }
    if cli.dump_config {
        let mut text = serde_json::to_string_pretty(&cfg).map_err(|e| Failure::Io(e.to_string()))?;
        text.push('\n');
        match &cfg.output {
            Some(p) => std::fs::write(p, text)?,
            None => stdout.write_all(text.as_bytes())?,
        }
        return Ok(None);
    }
    Ok(Some(cfg))
}

/// Execute a configuration, writing to `cfg.output` or `stdout`.
fn execute(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let exec = Exec::Parallel;
    let mut code = EXIT_OK;
    let (json, table): (Vec<u8>, Table) = match &cfg.command {
        Command::Families => families(),
        Command::Period(a) => {
            let p = a.potential.build()?;
            let es = energies(&a.energies)?;
            let rows = period::period_table(&p, &es, exec)?;
            let ode = if a.ode {
                Some(isochrone::exec::try_map(exec, &es, |&e| period::ode_period_oracle(&p, e))?)
            } else {
                None
            };
            period_output(&p.name(), &rows, ode.as_deref())?
        }
        Command::Certify(a) => {
            let p = a.potential.build()?;
            let criteria = if a.criteria.is_empty() {
                Criterion::ALL.to_vec()
            } else {
                a.criteria.iter().map(|s| Criterion::parse(s)).collect::<Result<Vec<_>, _>>()?
            };
            let grid = match &a.points {
                Some(xs) => Grid::Points(xs.clone()),
                None => Grid::Energies(energies(&a.energies)?),
            };
            let reports = criteria
                .iter()
                .map(|&c| period::certify(&p, c, &grid, a.tol, exec))
                .collect::<Result<Vec<_>, _>>()?;
            if a.expect_isochronous && reports.iter().any(|r| r.verdict == Verdict::NotIsochronous) {
                code = EXIT_NOT_ISOCHRONOUS;
            }
            certify_output(&p.name(), &reports)?
        }
        Command::Involution(a) => {
            let p = a.potential.build()?;
            involution_output(&p, &a.points)?
        }
        Command::Series(a) => series_output(&a.op)?,
        Command::Wkb(a) => {
            let p = a.potential.build()?;
            let r = wkb_spectrum(&p, a.hbar, a.order, a.levels.max(1) - 1, a.route.into(), exec)?;
            let mut t = Table::new(&["n", "E"]);
            for l in &r.levels {
                t.push(vec![l.n.to_string(), fmt_f64(l.energy)]);
            }
            (to_json(&Named { potential: p.name(), report: &r })?, t)
        }
        Command::Oracle(a) => {
            let p = a.potential.build()?;
            let r = oracle_spectrum(&p, &a.settings(), exec)?;
            let mut t = Table::new(&["n", "E", "E_coarse", "E_fine"]);
            for (n, e) in r.levels.iter().enumerate() {
                let fine = r.fine.as_ref().map(|f| fmt_f64(f[n])).unwrap_or_default();
                t.push(vec![n.to_string(), fmt_f64(*e), fmt_f64(r.coarse[n]), fine]);
            }
            (to_json(&Named { potential: p.name(), report: &r })?, t)
        }
        Command::Compare(a) => compare_output(a, exec)?,
    };
    let bytes = match cfg.format {
        Format::Json => json,
        Format::Csv => table.to_csv()?,
    };
    match &cfg.output {
        Some(path) => std::fs::write(path, bytes)?,
        None => stdout.write_all(&bytes)?,
    }
    Ok(code)
}

#[derive(Serialize)]
struct Named<'a, T> {
    potential: String,
    report: &'a T,
}

fn energies(a: &EnergyArgs) -> Result<Vec<f64>, Failure> {
    if !(a.emin > 0.0 && a.emax >= a.emin) || a.n == 0 {
        return Err(Failure::Numeric(Error::ParameterDomain(format!(
            "energy grid needs 0 < emin <= emax and n >= 1, got [{}, {}] n = {}",
            a.emin, a.emax, a.n
        ))));
    }
    Ok(period::energy_grid(a.emin, a.emax, a.n))
}

type Out = (Vec<u8>, Table);

fn families() -> Out {
    #[derive(Serialize)]
    struct Entry {
        id: &'static str,
        description: &'static str,
    }
    let entries: Vec<Entry> = CATALOG.iter().map(|&(id, description)| Entry { id, description }).collect();
    let mut t = Table::new(&["id", "description"]);
    for e in &entries {
        t.push(vec![e.id.into(), e.description.into()]);
    }
    (to_json(&entries).expect("catalog serialises"), t)
}

fn period_output(name: &str, rows: &[period::PeriodRow], ode: Option<&[f64]>) -> Result<Out, Failure> {
    #[derive(Serialize)]
    struct Row {
        #[serde(rename = "E")]
        e: f64,
        #[serde(rename = "T")]
        t: f64,
        #[serde(rename = "T_prime")]
        tp: f64,
        #[serde(rename = "T_ode", skip_serializing_if = "Option::is_none")]
        ode: Option<f64>,
    }
    let mut header = vec!["E", "T", "T_prime"];
    if ode.is_some() {
        header.push("T_ode");
    }
    let mut t = Table::new(&header);
    let mut out = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let o = ode.map(|v| v[i]);
        let mut cells = vec![fmt_f64(r.energy), fmt_f64(r.period), fmt_f64(r.derivative)];
        if let Some(v) = o {
            cells.push(fmt_f64(v));
        }
        t.push(cells);
        out.push(Row { e: r.energy, t: r.period, tp: r.derivative, ode: o });
    }
    #[derive(Serialize)]
    struct Doc<'a> {
        potential: &'a str,
        rows: Vec<Row>,
    }
    Ok((to_json(&Doc { potential: name, rows: out })?, t))
}

/// One column per criterion when all reports share their samples,
/// otherwise one row per (criterion, sample).
fn certify_output(name: &str, reports: &[period::CertReport]) -> Result<Out, Failure> {
    #[derive(Serialize)]
    struct Doc<'a> {
        potential: &'a str,
        reports: &'a [period::CertReport],
    }
    let json = to_json(&Doc { potential: name, reports })?;
    let shared = reports.windows(2).all(|w| w[0].samples == w[1].samples);
    let table = if shared && !reports.is_empty() {
        let mut header = vec!["x".to_string()];
        header.extend(reports.iter().map(|r| r.criterion.id().to_string()));
        let mut t = Table { header, rows: Vec::new() };
        for (i, x) in reports[0].samples.iter().enumerate() {
            let mut row = vec![fmt_f64(*x)];
            row.extend(reports.iter().map(|r| fmt_f64(r.residuals[i])));
            t.push(row);
        }
        t
    } else {
        let mut t = Table::new(&["criterion", "sample", "residual"]);
        for r in reports {
            for (x, v) in r.samples.iter().zip(&r.residuals) {
                t.push(vec![r.criterion.id().into(), fmt_f64(*x), fmt_f64(*v)]);
            }
        }
        t
    };
    Ok((json, table))
}

fn involution_output(p: &isochrone::PotentialSpec, xs: &[f64]) -> Result<Out, Failure> {
    #[derive(Serialize)]
    struct Row {
        x: f64,
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "A_prime")]
        slope: f64,
        landau_residual: f64,
    }
    let mut rows = Vec::new();
    let mut t = Table::new(&["x", "A", "A_prime", "landau_residual"]);
    for &x in xs {
        let a = p.involution(x)?;
        let slope = period::involution_slope(p, x)?;
        let res = (x - a - x.signum() * 2.0 * (2.0 * p.value(x)?).sqrt()).abs();
        t.push(vec![fmt_f64(x), fmt_f64(a), fmt_f64(slope), fmt_f64(res)]);
        rows.push(Row { x, a, slope, landau_residual: res });
    }
    Ok((to_json(&rows)?, t))
}

fn series_output(op: &SeriesOp) -> Result<Out, Failure> {
    let parse = |cs: &[String]| cs.iter().map(|s| series::parse_rational(s)).collect::<Result<Vec<_>, _>>();
    let mut map = serde_json::Map::new();
    let mut t = Table::new(&["key", "value"]);
    let mut put = |k: String, v: serde_json::Value, cell: String| {
        t.push(vec![k.clone(), cell]);
        map.insert(k, v);
    };
    match op {
        SeriesOp::OddFromEven { coeffs } => {
            let odd = series::odd_from_even(&parse(coeffs)?)?;
            for (i, c) in odd.iter().enumerate() {
                let s = c.to_string();
                put(format!("a{}", 2 * i + 3), s.clone().into(), s);
            }
        }
        SeriesOp::GFromF { coeffs, order } => {
            let g = series::g_from_f(&parse(coeffs)?, *order)?;
            for (k, c) in g.coeffs().iter().enumerate() {
                let s = c.to_string();
                put(format!("c{k}"), s.clone().into(), s);
            }
        }
        SeriesOp::UrabeH { coeffs } => {
            let u = series::urabe_h(&TruncSeries::new(parse(coeffs)?))?;
            for (k, c) in u.h.coeffs().iter().enumerate() {
                let s = c.to_string();
                put(format!("h{k}"), s.clone().into(), s);
            }
            put("odd".into(), u.is_odd().into(), u.is_odd().to_string());
        }
    }
    Ok((to_json(&map)?, t))
}

fn compare_output(a: &CompareArgs, exec: Exec) -> Result<Out, Failure> {
    let p = a.potential.build()?;
    let w = wkb_spectrum(&p, a.hbar, a.order, a.levels.max(1) - 1, a.route.into(), exec)?;
    let o = oracle_spectrum(&p, &isochrone::schrodinger::OracleSettings::new(a.hbar, a.levels, a.grid), exec)?;
    #[derive(Serialize)]
    struct Row {
        n: usize,
        wkb: f64,
        oracle: f64,
        diff: f64,
    }
    let mut rows = Vec::new();
    let mut t = Table::new(&["n", "wkb", "oracle", "diff"]);
    for (l, e) in w.levels.iter().zip(&o.levels) {
        let d = l.energy - e;
        t.push(vec![l.n.to_string(), fmt_f64(l.energy), fmt_f64(*e), fmt_f64(d)]);
        rows.push(Row { n: l.n, wkb: l.energy, oracle: *e, diff: d });
    }
    #[derive(Serialize)]
    struct Doc {
        potential: String,
        hbar: f64,
        order: u8,
        levels: Vec<Row>,
        wkb_gaps: isochrone::wkb::GapStats,
        oracle_gaps: isochrone::wkb::GapStats,
    }
    let doc = Doc { potential: p.name(), hbar: a.hbar, order: a.order, levels: rows, wkb_gaps: w.gaps, oracle_gaps: o.gaps };
    Ok((to_json(&doc)?, t))
}
