use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use whitham::config::{ConfigError, Instance, RunConfig};
use whitham::hierarchy::{
    closed_form_f_monomial, dtoda_reduce, dtoda_residual, free_energy, invert_period_map,
    period_map, period_times, string_residual, HierarchyError, InvertOptions, PeriodData,
    TimeTarget,
};
use whitham::verify::{run_suite_with, CheckKind, CheckParams, SuiteReport, VerifyError};
use whitham::{Laurent, C64};

#[derive(Parser)]
#[command(name = "whitham", version, about = "Genus-zero universal Whitham hierarchy toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Inversion tolerance for `invert`; a tolerance for every check in `verify`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Exponents `ν0,ν1,…` of monomial generating functions.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    monomial: Option<Vec<i32>>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Times, duals and marked-point potentials of the configured tuple.
    Periods,
    /// Solve for the tuple whose times are the configured `times`.
    Invert,
    /// The free energy, with its closed form under `--monomial`.
    FreeEnergy,
    /// Lax and Orlov–Schulman series of the dispersionless Toda reduction.
    ReduceDtoda,
    /// Run the configured checks; exit status 1 when any fails.
    Verify,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Config(String),
    Numerical(HierarchyError),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<HierarchyError> for Failure {
    fn from(e: HierarchyError) -> Self {
        Failure::Numerical(e)
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Config(c) => c.into(),
            other => Failure::Config(format!("config: checks: {other}")),
        }
    }
}

/// Tabular rows `(family, a, n, value)`.
type Rows = Vec<(String, usize, i64, C64)>;

struct Output {
    json: Value,
    rows: Rows,
    passed: bool,
}

fn pair(c: C64) -> Value {
    json!([c.re, c.im])
}

fn period_rows(p: &PeriodData) -> Rows {
    let mut rows: Rows = vec![("t".into(), 0, 0, p.t00)];
    rows.extend(p.t0.iter().enumerate().map(|(i, &c)| ("t".into(), 0, i as i64 + 1, c)));
    for (a, ta) in p.ta.iter().enumerate() {
        rows.extend(ta.iter().enumerate().map(|(n, &c)| ("t".into(), a + 1, n as i64, c)));
    }
    rows.extend(p.v0.iter().enumerate().map(|(i, &c)| ("v".into(), 0, i as i64 + 1, c)));
    for (a, va) in p.va.iter().enumerate() {
        if let Some(&v) = p.va0.get(a) {
            rows.push(("v".into(), a + 1, 0, v));
        }
        rows.extend(va.iter().enumerate().map(|(i, &c)| ("v".into(), a + 1, i as i64 + 1, c)));
    }
    rows.extend(p.phia.iter().enumerate().map(|(a, &c)| ("phi".into(), a + 1, 0, c)));
    rows
}

fn series_json(l: &Laurent) -> Value {
    json!({
        "k_min": l.k_min(),
        "coeffs": l.coeffs().iter().map(|&c| pair(c)).collect::<Vec<_>>(),
    })
}

fn series_rows(family: &str, l: &Laurent) -> Rows {
    (l.k_min()..=l.k_max())
        .map(|k| (family.to_string(), 0, k as i64, l.coeff(k)))
        .collect()
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Failure::Config("config: --config is required".into()))?;
    Ok(RunConfig::load(path)?)
}

fn periods(cfg: &RunConfig) -> Result<Output, Failure> {
    let Instance { lax, h } = cfg.instance()?;
    let p = period_map(&lax, &h, cfg.nt)?;
    Ok(Output {
        json: serde_json::to_value(&p).expect("period data serializes"),
        rows: period_rows(&p),
        passed: true,
    })
}

fn invert(cfg: &RunConfig, tol: Option<f64>) -> Result<Output, Failure> {
    let Instance { lax, h } = cfg.instance()?;
    let start = TimeTarget::from_periods(&period_times(&lax, &h, cfg.nt)?);
    let target = cfg
        .target(&start)
        .ok_or_else(|| Failure::Config("config: times: required by invert".into()))?;
    let mut opts = InvertOptions::default();
    if let Some(t) = tol {
        opts.tol = t;
    }
    let inv = invert_period_map(&h, &target, &lax, &opts)?;
    let p = period_map(&inv.lax, &h, cfg.nt)?;
    let residuals = string_residual(&inv.lax, &h, &p);

    let mut rows = Rows::new();
    for (a, (d, tail)) in inv.lax.disks.iter().zip(&inv.lax.tails).enumerate() {
        rows.push(("q".into(), a + 1, 0, d.q));
        rows.extend(d.u.iter().enumerate().map(|(j, &c)| ("u".into(), a + 1, j as i64, c)));
        rows.extend(tail.iter().enumerate().map(|(k, &c)| ("tail".into(), a + 1, k as i64 + 1, c)));
    }
    rows.extend(period_rows(&p));
    for (a, r) in residuals.iter().enumerate() {
        rows.push(("string_zeta0".into(), a + 1, 0, C64::new(r.zeta0, 0.0)));
        rows.push(("string_zetaa".into(), a + 1, 0, C64::new(r.zetaa, 0.0)));
    }
    Ok(Output {
        json: json!({
            "lax": inv.lax,
            "periods": p,
            "string_residual": residuals,
            "newton_iterations": inv.newton_iterations,
            "residual": inv.residual,
        }),
        rows,
        passed: true,
    })
}

fn free_energy_cmd(cfg: &RunConfig, monomial: Option<&[i32]>) -> Result<Output, Failure> {
    let Instance { lax, h } = cfg.instance()?;
    let p = period_map(&lax, &h, cfg.nt)?;
    let f = free_energy(&lax, &h, &p)?;
    let mut json = json!({ "F": pair(f) });
    let mut rows: Rows = vec![("F".into(), 0, 0, f)];
    if let Some(nu) = monomial {
        if nu.len() != cfg.m + 1 {
            return Err(Failure::Config(format!(
                "config: --monomial: {} exponents for M = {}",
                nu.len(),
                cfg.m
            )));
        }
        let closed = closed_form_f_monomial(&p, nu);
        json["closed_form"] = pair(closed);
        rows.push(("closed_form".into(), 0, 0, closed));
    }
    Ok(Output {
        json,
        rows,
        passed: true,
    })
}

fn reduce_dtoda(cfg: &RunConfig) -> Result<Output, Failure> {
    let Instance { lax, h } = cfg.instance()?;
    let p = period_map(&lax, &h, cfg.nt)?;
    let s = dtoda_reduce(&lax, &p)?;
    let (r1, r2) = dtoda_residual(&lax, &h, &s)?;
    let mut rows = series_rows("L", &s.l);
    rows.extend(series_rows("L_tilde", &s.l_tilde));
    rows.extend(series_rows("M", &s.m));
    rows.extend(series_rows("M_tilde", &s.m_tilde));
    Ok(Output {
        json: json!({
            "shift": pair(s.shift),
            "L": series_json(&s.l),
            "L_tilde": series_json(&s.l_tilde),
            "M": series_json(&s.m),
            "M_tilde": series_json(&s.m_tilde),
            "residual": [r1, r2],
        }),
        rows,
        passed: true,
    })
}

fn suite_rows(report: &SuiteReport) -> Rows {
    let mut rows = Rows::new();
    for c in &report.checks {
        rows.push((c.name.clone(), 0, 0, C64::new(c.max_error, c.tolerance)));
        rows.extend(
            c.details
                .iter()
                .enumerate()
                .map(|(i, (_, e))| (c.name.clone(), 0, i as i64 + 1, C64::new(*e, 0.0))),
        );
    }
    rows
}

fn verify(cfg: &RunConfig, tol: Option<f64>, monomial: Option<&[i32]>) -> Result<Output, Failure> {
    let mut params = CheckParams::from_config(cfg);
    if let Some(t) = tol {
        for k in CheckKind::ALL {
            params.tolerances.insert(k.name().to_string(), t);
        }
    }
    params.monomial = monomial.map(<[i32]>::to_vec);
    let report = run_suite_with(cfg, &params)?;
    Ok(Output {
        json: serde_json::to_value(&report).expect("report serializes"),
        rows: suite_rows(&report),
        passed: report.overall,
    })
}

fn render(out: &Output, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).expect("json renders");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("family,a,n,re,im\n");
            for (family, a, n, c) in &out.rows {
                writeln!(s, "{family},{a},{n},{:e},{:e}", c.re, c.im).expect("string write");
            }
            s
        }
    }
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("io: {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let cfg = load(cli)?;
    let monomial = cli.monomial.as_deref();
    let out = match cli.command {
        Command::Periods => periods(&cfg)?,
        Command::Invert => invert(&cfg, cli.tol)?,
        Command::FreeEnergy => free_energy_cmd(&cfg, monomial)?,
        Command::ReduceDtoda => reduce_dtoda(&cfg)?,
        Command::Verify => verify(&cfg, cli.tol, monomial)?,
    };
    emit(&render(&out, cli.format), cli.out.as_deref())?;
    Ok(out.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("{}: {e}", e.kind());
            ExitCode::from(3)
        }
    }
}
