//! `chancf`: command-line laboratory for the base-m continued-fraction
//! dynamical system. Results go to stdout (or `--out`); a run manifest with
//! the full parameter set goes to `<out>.manifest.json`, or stderr when no
//! output file is given, so result bytes stay reproducible.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use chan_cf::*;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "chancf", version, about = "Base-m continued-fraction laboratory")]
struct Cli {
    /// Write results to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cap the worker-thread count
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Start {
    Lebesgue,
    Omega,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Digit expansion of a point, exact (p/q input) or validated (decimal)
    Expand(ExpandArgs),
    /// Per-m table of the derived constants
    Constants(ConstantsArgs),
    /// Gauss-Kuzmin functional iteration error table
    Kuzmin(KuzminArgs),
    /// Monte-Carlo pushforward of an initial measure
    Simulate(SimulateArgs),
    /// Random Fibonacci growth experiment
    Fib(FibArgs),
    /// Mellin-type zeta integrals in the critical strip
    Zeta(ZetaArgs),
}

#[derive(Args, Debug, Serialize)]
struct ExpandArgs {
    #[arg(long)]
    m: u32,
    /// Point in [0,1): decimal (`0.7`) or exact fraction (`7/10`)
    #[arg(long)]
    x: String,
    #[arg(long, default_value_t = 10)]
    digits: usize,
}

#[derive(Args, Debug, Serialize)]
struct ConstantsArgs {
    /// Emit one row per base from 2 up to this value
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct KuzminArgs {
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 4097)]
    grid: usize,
    #[arg(long, default_value_t = 40)]
    iters: usize,
    #[arg(long, value_enum, default_value_t = Start::Lebesgue)]
    start: Start,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 12)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Start::Lebesgue)]
    start: Start,
}

#[derive(Args, Debug, Serialize)]
struct FibArgs {
    #[arg(long)]
    m: u32,
    /// Recurrence length
    #[arg(long, default_value_t = 200_000)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct ZetaArgs {
    /// Evaluate the classical Gauss-map identity instead of Z_m
    #[arg(long, conflicts_with = "m")]
    classical: bool,
    #[arg(long)]
    m: Option<u32>,
    /// Strip point: `0.5` or `0.25+0.75i`
    #[arg(long)]
    s: String,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    args: serde_json::Value,
    format: Format,
    seed: Option<u64>,
    precision_bits: u64,
    version: String,
    wall_time_secs: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 2 on usage errors; keep help/version at 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("warning: thread pool already initialized; --threads ignored");
        }
    }
    let started = Instant::now();
    let result = run(&cli);
    match result {
        Ok((output, name, args_json, seed)) => {
            let manifest = RunManifest {
                command: name,
                args: args_json,
                format: cli.format,
                seed,
                precision_bits: precision_bits(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                wall_time_secs: started.elapsed().as_secs_f64(),
            };
            let manifest_json =
                serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &output) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(3);
                    }
                    let mpath = format!("{}.manifest.json", path.display());
                    if let Err(e) = std::fs::write(&mpath, &manifest_json) {
                        eprintln!("error: cannot write {mpath}: {e}");
                        return ExitCode::from(3);
                    }
                }
                None => {
                    print!("{output}");
                    eprintln!("{manifest_json}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for domain/usage problems, 3 for numerical failure.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_)
        | Error::TerminatedOrbit
        | Error::EmptyDigits
        | Error::EmptySample
        | Error::DegenerateDigits { .. } => 2,
        Error::PrecisionExhausted { .. }
        | Error::GridTooCoarse { .. }
        | Error::MonotonicityViolation { .. }
        | Error::DegenerateFit(_)
        | Error::QuadratureFailure { .. } => 3,
    }
}

fn precision_bits() -> u64 {
    std::env::var("CHAN_CF_PRECISION_BITS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_PRECISION_BITS)
}

type CmdOutput = (String, String, serde_json::Value, Option<u64>);

fn run(cli: &Cli) -> Result<CmdOutput> {
    fn j<T: Serialize>(v: &T) -> serde_json::Value {
        serde_json::to_value(v).expect("args serialize")
    }
    match &cli.cmd {
        Cmd::Expand(a) => Ok((cmd_expand(a, cli.format)?, "expand".into(), j(a), None)),
        Cmd::Constants(a) => Ok((cmd_constants(a, cli.format)?, "constants".into(), j(a), None)),
        Cmd::Kuzmin(a) => Ok((cmd_kuzmin(a, cli.format)?, "kuzmin".into(), j(a), None)),
        Cmd::Simulate(a) => {
            Ok((cmd_simulate(a, cli.format)?, "simulate".into(), j(a), Some(a.seed)))
        }
        Cmd::Fib(a) => Ok((cmd_fib(a, cli.format)?, "fib".into(), j(a), Some(a.seed))),
        Cmd::Zeta(a) => Ok((cmd_zeta(a, cli.format)?, "zeta".into(), j(a), None)),
    }
}

/// 17 significant digits, plain `.` decimal.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn cmd_expand(a: &ExpandArgs, format: Format) -> Result<String> {
    let params = ChanParams::new(a.m)?;
    if a.digits == 0 {
        return Err(Error::Domain("--digits must be >= 1".into()));
    }
    let seq = match parse_point(&a.x)? {
        Point::Exact(r) => expand_rational(&r, a.digits, &params)?,
        Point::Float(x) => expand_with_precision(x, a.digits, &params, precision_bits())?,
    };
    let recon = if seq.digits.is_empty() {
        UnitRational::new(BigUint::from(0u32), BigUint::from(1u32))?
    } else {
        evaluate_cf_rational(&seq.digits, &params)?
    };
    let target = match parse_point(&a.x)? {
        Point::Exact(r) => r.to_f64(),
        Point::Float(x) => x,
    };
    let err = (recon.to_f64() - target).abs();
    let digits_str: Vec<String> = seq.digits.iter().map(u32::to_string).collect();
    match format {
        Format::Csv => {
            let mut out = String::new();
            writeln!(out, "digits,terminated,reliable_count,reconstruction_error").unwrap();
            writeln!(
                out,
                "[{}],{},{},{}",
                digits_str.join(" "),
                seq.terminated,
                seq.reliable_count,
                num(err)
            )
            .unwrap();
            Ok(out)
        }
        Format::Json => Ok(format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "digits": seq.digits,
                "terminated": seq.terminated,
                "reliable_count": seq.reliable_count,
                "mode": seq.mode,
                "reconstruction_error": err,
            }))
            .unwrap()
        )),
    }
}

enum Point {
    Exact(UnitRational),
    Float(f64),
}

fn parse_point(s: &str) -> Result<Point> {
    if let Some((p, q)) = s.split_once('/') {
        let p: BigUint = p
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad numerator in {s:?}")))?;
        let q: BigUint = q
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad denominator in {s:?}")))?;
        return Ok(Point::Exact(UnitRational::new(p, q)?));
    }
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Domain(format!("cannot parse {s:?} as a number")))?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{x} outside [0,1]")));
    }
    Ok(Point::Float(x))
}

fn cmd_constants(a: &ConstantsArgs, format: Format) -> Result<String> {
    if a.m < 2 {
        return Err(Error::Domain("need --m >= 2".into()));
    }
    let mut rows = Vec::new();
    for m in 2..=a.m {
        let p = ChanParams::new(m)?;
        let q = q_bound(&p, a.tol);
        let chi = khinchin_chi(&p, a.tol);
        let growth = levy_growth(&p, a.tol)?;
        let bound = levy_growth_bound(&p);
        let ent = entropy(&p, (a.tol * 100.0).max(1e-9))?;
        rows.push((m, p.k_m(), q, chi.value, growth.value, bound, ent));
    }
    match format {
        Format::Csv => {
            let mut out = String::new();
            writeln!(
                out,
                "m,k_m,q_m,q_exceeds_one,chi,levy_growth,levy_growth_bound,entropy_quadrature,entropy_identity"
            )
            .unwrap();
            for (m, k, q, chi, g, b, e) in &rows {
                writeln!(
                    out,
                    "{m},{},{},{},{},{},{},{},{}",
                    num(*k),
                    num(*q),
                    q >= &1.0,
                    num(*chi),
                    num(*g),
                    num(*b),
                    num(e.quadrature.value),
                    num(e.identity.value)
                )
                .unwrap();
            }
            Ok(out)
        }
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|(m, k, q, chi, g, b, e)| {
                    json!({
                        "m": m,
                        "k_m": k,
                        "q_m": q,
                        "q_exceeds_one": *q >= 1.0,
                        "chi": chi,
                        "levy_growth": g,
                        "levy_growth_bound": b,
                        "entropy_quadrature": e.quadrature.value,
                        "entropy_identity": e.identity.value,
                    })
                })
                .collect();
            Ok(format!("{}\n", serde_json::to_string_pretty(&items).unwrap()))
        }
    }
}

fn cmd_kuzmin(a: &KuzminArgs, format: Format) -> Result<String> {
    let p = ChanParams::new(a.m)?;
    let start = match a.start {
        Start::Lebesgue => KuzminStart::Lebesgue,
        Start::Omega => KuzminStart::Omega,
    };
    let rep = kuzmin_run(&p, a.grid, a.iters, start)?;
    // rate fit over the conventional window once enough iterations exist
    let rate = if a.iters >= 15 {
        estimate_rate(&rep.sup_errors, (5, 15), 1e-14).ok()
    } else {
        None
    };
    match format {
        Format::Csv => {
            let mut out = String::new();
            writeln!(out, "n,sup_error").unwrap();
            for (n, e) in rep.sup_errors.iter().enumerate() {
                writeln!(out, "{n},{}", num(*e)).unwrap();
            }
            if let Some(r) = &rate {
                writeln!(out, "# fitted_rate={} window={}..{}", num(r.fitted_rate), r.window.0, r.window.1).unwrap();
            }
            Ok(out)
        }
        Format::Json => Ok(format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "sup_errors": rep.sup_errors,
                "rate": rate,
            }))
            .unwrap()
        )),
    }
}

fn cmd_simulate(a: &SimulateArgs, format: Format) -> Result<String> {
    let p = ChanParams::new(a.m)?;
    let initial = match a.start {
        Start::Lebesgue => MeasureSpec::Lebesgue,
        Start::Omega => MeasureSpec::Gamma,
    };
    let cfg = SimulationConfig::new(p, a.samples, a.iters, a.seed, initial);
    let rep = simulate_pushforward(&cfg)?;
    match format {
        Format::Csv => {
            let mut out = String::new();
            writeln!(out, "n,ks").unwrap();
            for (n, ks) in rep.ks_per_iteration.iter().enumerate() {
                writeln!(out, "{n},{}", num(*ks)).unwrap();
            }
            Ok(out)
        }
        Format::Json => Ok(format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "ks_per_iteration": rep.ks_per_iteration,
            }))
            .unwrap()
        )),
    }
}

fn cmd_fib(a: &FibArgs, format: Format) -> Result<String> {
    let p = ChanParams::new(a.m)?;
    let rep = random_fibonacci(&p, a.n, a.seed, a.seeds)?;
    match format {
        Format::Csv => {
            let mut out = String::new();
            writeln!(out, "seed_index,log_growth").unwrap();
            for (i, g) in rep.per_seed.iter().enumerate() {
                writeln!(out, "{i},{}", num(*g)).unwrap();
            }
            writeln!(out, "# mean={} std_error={}", num(rep.mean), num(rep.std_error)).unwrap();
            Ok(out)
        }
        Format::Json => Ok(format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "per_seed": rep.per_seed,
                "mean": rep.mean,
                "std_error": rep.std_error,
            }))
            .unwrap()
        )),
    }
}

fn cmd_zeta(a: &ZetaArgs, format: Format) -> Result<String> {
    let s = parse_strip_point(&a.s)?;
    let (label, r) = if a.classical {
        ("classical".to_string(), gauss_map_zeta(s, a.tol)?)
    } else {
        let m = a.m.ok_or_else(|| Error::Domain("need --m or --classical".into()))?;
        let p = ChanParams::new(m)?;
        (format!("Z_{m}"), chan_zeta(s, &p, a.tol)?)
    };
    match format {
        Format::Csv => {
            let mut out = String::new();
            writeln!(out, "function,s_re,s_im,value_re,value_im,error").unwrap();
            writeln!(
                out,
                "{label},{},{},{},{},{}",
                num(s.re),
                num(s.im),
                num(r.value.re),
                num(r.value.im),
                num(r.error)
            )
            .unwrap();
            Ok(out)
        }
        Format::Json => Ok(format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "function": label,
                "s": { "re": s.re, "im": s.im },
                "value": { "re": r.value.re, "im": r.value.im },
                "error": r.error,
            }))
            .unwrap()
        )),
    }
}

/// `0.5`, `0.25+0.75i` or `0.25-0.75i`.
fn parse_strip_point(s: &str) -> Result<ComplexPoint> {
    let s = s.trim();
    let bad = || Error::Domain(format!("cannot parse {s:?} as a strip point"));
    if let Some(body) = s.strip_suffix('i') {
        // split at the sign of the imaginary part (skip a leading sign)
        let split = body[1..]
            .rfind(['+', '-'])
            .map(|k| k + 1)
            .ok_or_else(bad)?;
        let re: f64 = body[..split].parse().map_err(|_| bad())?;
        let im: f64 = body[split..].parse().map_err(|_| bad())?;
        ComplexPoint::new(re, im)
    } else {
        let re: f64 = s.parse().map_err(|_| bad())?;
        ComplexPoint::new(re, 0.0)
    }
}
