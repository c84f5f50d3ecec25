//! Command-line front end: SKT checks, flows, verification suites and sweeps.

mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pluriclosed::almost_abelian::{self, ReducedMode};
use pluriclosed::catalog::{self, Entry};
use pluriclosed::flow::{EventKind, IntegratorConfig};
use pluriclosed::nilpotent::{self, Normalization};
use pluriclosed::random::{self, AaSample};
use pluriclosed::{hermitian, io as pio};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "pluriclosed", version, about = "Pluriclosed bracket flow on Lie groups")]
struct Cli {
    /// Worker threads for parallel work; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the SKT condition and report soliton and classification data.
    Check(CheckArgs),
    /// Integrate the flow and write a diagnostics CSV.
    Flow(FlowArgs),
    /// Run a verification suite; exits nonzero if any check fails.
    Verify(VerifyArgs),
    /// List the example catalog or print one entry as input JSON.
    Catalog {
        name: Option<String>,
        /// Print every entry with its data and expected verdicts as JSON.
        #[arg(long, conflicts_with = "name")]
        json: bool,
    },
    /// Classify random almost-abelian data and write one CSV row per item.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Source {
    /// Input JSON file.
    #[arg(required_unless_present = "catalog", conflicts_with = "catalog")]
    input: Option<PathBuf>,
    /// Catalog entry instead of a file, e.g. `shrink10` or `s_ab:1,0.5`.
    #[arg(long)]
    catalog: Option<String>,
}

impl Source {
    fn load(&self) -> Result<Entry> {
        match (&self.input, &self.catalog) {
            (_, Some(name)) => catalog::by_name(name).ok_or_else(|| anyhow!("unknown catalog entry `{name}`")),
            (Some(path), None) => pio::read_input(path).with_context(|| format!("reading {}", path.display())),
            (None, None) => bail!("no input given"),
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Exit with status 2 when the input is not SKT.
    #[arg(long)]
    require_skt: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FlowMode {
    Unnormalized,
    ANormFixed,
    UnitNorm,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value_t = FlowMode::Unnormalized)]
    mode: FlowMode,
    #[arg(long, default_value_t = 1e3)]
    horizon: f64,
    /// Record this many evenly spaced times instead of every step.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    /// Fixed-point threshold on the field norm; 0 disables it. Defaults to 0
    /// for almost-abelian data, so stationary solutions run to the horizon,
    /// and to 1e-12 for nilpotent brackets.
    #[arg(long)]
    fixedpoint_tol: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Appendix,
    Identities,
    Table1,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random items; each suite has its own default.
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SampleKind {
    Skt,
    Normal,
    Generic,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// Even dimension of the `J₁`-invariant block; the group has dimension `m + 2`.
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, value_enum, default_value_t = SampleKind::Skt)]
    kind: SampleKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check(args: &CheckArgs) -> Result<ExitCode> {
    let entry = args.source.load()?;
    let (doc, skt) = match &entry {
        Entry::AlmostAbelian(d) => {
            let verdict = almost_abelian::skt_verdict(d, args.tol)?;
            let skt = verdict.is_skt;
            let (soliton, classification, gk) = if skt {
                (
                    Some(almost_abelian::soliton_certificate(d, args.tol)?),
                    Some(almost_abelian::classify(d, args.tol)?),
                    Some(almost_abelian::generalized_kahler_check(d, args.tol)),
                )
            } else {
                (None, None, None)
            };
            let doc = json!({
                "family": "almost_abelian",
                "skt": verdict,
                "soliton": soliton,
                "classification": classification,
                "generalized_kahler": gk,
            });
            (doc, skt)
        }
        Entry::Nilpotent(mu, frame) => {
            let scale = mu.max_abs().powi(2).max(f64::MIN_POSITIVE);
            let (skt, residual) = hermitian::is_skt_general(mu, frame, args.tol * scale);
            let soliton = nilpotent::soliton_limit_certificate(mu, frame, args.tol).ok();
            let doc = json!({
                "family": "nilpotent",
                "skt": { "is_skt": skt, "residual": residual },
                "nijenhuis_residual": hermitian::nijenhuis_residual(mu, frame),
                "jacobi_residual": mu.jacobi_residual(),
                "soliton": soliton,
            });
            (doc, skt)
        }
    };
    let mut w = output(&args.out)?;
    writeln!(w, "{}", pio::to_json_string(&doc)?)?;
    w.flush()?;
    Ok(if args.require_skt && !skt { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn flow_config(args: &FlowArgs, base: IntegratorConfig, fixedpoint_default: f64) -> Result<IntegratorConfig> {
    if !(args.horizon > 0.0 && args.horizon.is_finite()) {
        bail!("horizon must be positive and finite");
    }
    let sample_times = match args.samples {
        Some(0) => bail!("--samples must be positive"),
        Some(1) => Some(vec![args.horizon]),
        Some(n) => Some((0..n).map(|i| args.horizon * i as f64 / (n - 1) as f64).collect()),
        None => None,
    };
    Ok(IntegratorConfig {
        horizon: args.horizon,
        rel_tol: args.rel_tol,
        abs_tol: args.abs_tol,
        fixedpoint_norm: args.fixedpoint_tol.unwrap_or(fixedpoint_default),
        sample_times,
        ..base
    })
}

/// Serialized name of a unit enum variant.
pub(crate) fn label<T: Serialize>(x: T) -> String {
    serde_json::to_value(x).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn summary(kind: EventKind, t: f64, steps: usize) -> String {
    format!("{} t={t:.6e} steps={steps}", label(kind))
}

fn flow(args: &FlowArgs) -> Result<ExitCode> {
    let entry = args.source.load()?;
    let mut w = output(&args.out)?;
    let line = match &entry {
        Entry::AlmostAbelian(d) => {
            let mode = match args.mode {
                FlowMode::Unnormalized => ReducedMode::Unnormalized,
                FlowMode::ANormFixed => ReducedMode::ANormFixed,
                FlowMode::UnitNorm => bail!("unit-norm applies to nilpotent brackets; use a-norm-fixed"),
            };
            let cfg = flow_config(args, almost_abelian::reduced_config(args.horizon), 0.0)?;
            let run = almost_abelian::integrate_reduced_flow(d, mode, &cfg)?;
            pio::write_aa_csv(&mut w, &run.diagnostics)?;
            let tr = &run.trajectory;
            let end = tr.terminal();
            let mut line = summary(end.kind, end.t, tr.stats.accepted);
            if let Some(t_est) = tr.blowup_time {
                line += &format!(" T_est={t_est:.4}");
            }
            if mode == ReducedMode::ANormFixed {
                let cert = almost_abelian::soliton_certificate(&run.final_data(), args.tol.max(1e-6))?;
                line += &format!(" soliton={} residual={:.3e}", label(cert.kind), cert.residual);
            }
            line
        }
        Entry::Nilpotent(mu, frame) => {
            let norm = match args.mode {
                FlowMode::Unnormalized => Normalization::None,
                FlowMode::UnitNorm => Normalization::UnitNorm,
                FlowMode::ANormFixed => bail!("a-norm-fixed applies to almost-abelian data; use unit-norm"),
            };
            let cfg = flow_config(args, IntegratorConfig::default(), 1e-12)?;
            let run = nilpotent::integrate_nil_flow(mu, frame, norm, &cfg)?;
            pio::write_nil_csv(&mut w, &run.diagnostics)?;
            let tr = &run.trajectory;
            let end = tr.terminal();
            let mut line = summary(end.kind, end.t, tr.stats.accepted);
            if let Some(t_est) = tr.blowup_time {
                line += &format!(" T_est={t_est:.4}");
            }
            if end.kind == EventKind::FixedPoint || norm == Normalization::UnitNorm {
                let limit = match &run.refined_limit {
                    Some((nu, _)) => nu.clone(),
                    None => run.bracket_at(tr.states.len() - 1),
                };
                let cert = nilpotent::soliton_limit_certificate(&limit, frame, args.tol.max(1e-6))?;
                line += &format!(" soliton={} alpha={:.6} residual={:.3e}", label(cert.kind), cert.alpha, cert.residual);
            }
            line
        }
    };
    w.flush()?;
    eprintln!("{line}");
    Ok(ExitCode::SUCCESS)
}

fn list_catalog(name: &Option<String>, full: bool) -> Result<ExitCode> {
    let mut out = io::stdout().lock();
    if full {
        let entries = catalog::NAMES
            .iter()
            .map(|&n| -> Result<serde_json::Value> {
                let entry = catalog::by_name(n).ok_or_else(|| anyhow!("catalog entry `{n}` missing"))?;
                let data: serde_json::Value = serde_json::from_str(&pio::entry_to_json(&entry)?)?;
                Ok(json!({ "name": n, "data": data, "expected": catalog::expected(n) }))
            })
            .collect::<Result<Vec<_>>>()?;
        writeln!(out, "{}", pio::to_json_string(&entries)?)?;
        return Ok(ExitCode::SUCCESS);
    }
    match name {
        None => {
            for n in catalog::NAMES {
                writeln!(out, "{n}")?;
            }
        }
        Some(n) => {
            let entry = catalog::by_name(n).ok_or_else(|| anyhow!("unknown catalog entry `{n}`"))?;
            writeln!(out, "{}", pio::entry_to_json(&entry)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SweepRow {
    index: usize,
    is_skt: bool,
    k: usize,
    table_case: String,
    unimodular: String,
    c: f64,
    soliton: String,
    error: String,
}

fn sweep_row(args: &SweepArgs, kind: AaSample, index: usize) -> SweepRow {
    let mut rng = random::item_rng(args.seed, index as u64);
    let d = random::almost_abelian_data(&mut rng, args.m, kind);
    let mut row = SweepRow {
        index,
        is_skt: false,
        k: 0,
        table_case: String::new(),
        unimodular: String::new(),
        c: f64::NAN,
        soliton: String::new(),
        error: String::new(),
    };
    let result = (|| -> pluriclosed::Result<()> {
        let v = almost_abelian::skt_verdict(&d, args.tol)?;
        row.is_skt = v.is_skt;
        row.k = v.k;
        if v.is_skt {
            let rep = almost_abelian::classify(&d, args.tol)?;
            let cert = almost_abelian::soliton_certificate(&d, args.tol)?;
            row.table_case = label(rep.table_case);
            row.unimodular = rep.unimodular.to_string();
            row.c = cert.alpha;
            row.soliton = label(cert.kind);
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.error = e.to_string();
    }
    row
}

fn sweep(args: &SweepArgs) -> Result<ExitCode> {
    if args.m == 0 || args.m % 2 == 1 {
        bail!("--m must be even and positive");
    }
    let kind = match args.kind {
        SampleKind::Skt => AaSample::Skt,
        SampleKind::Normal => AaSample::NormalGeneric,
        SampleKind::Generic => AaSample::Generic,
    };
    // indexed collect keeps the output order independent of scheduling
    let rows: Vec<SweepRow> = (0..args.count).into_par_iter().map(|i| sweep_row(args, kind, i)).collect();
    let mut w = csv::Writer::from_writer(output(&args.out)?);
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    let skt = rows.iter().filter(|r| r.is_skt).count();
    let errors = rows.iter().filter(|r| !r.error.is_empty()).count();
    eprintln!("{} items, {skt} SKT, {errors} errors", rows.len());
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global().context("starting thread pool")?;
    match &cli.command {
        Command::Check(a) => check(a),
        Command::Flow(a) => flow(a),
        Command::Verify(a) => verify::run(a.suite, a.seed, a.count),
        Command::Catalog { name, json } => list_catalog(name, *json),
        Command::Sweep(a) => sweep(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
