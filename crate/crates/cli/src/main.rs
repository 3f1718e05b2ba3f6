mod cache;
mod commands;
mod error;
mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cache::Cache;
use commands::Context;
use error::CliError;
use report::{CommandEcho, ReportDocument};

#[derive(Parser, Debug)]
#[command(name = "ordist", version)]
#[command(about = "Level subgroups of the universal ordinary distribution of an imaginary quadratic field")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunConfig {
    /// Cache directory.
    #[arg(long, global = true, env = "ORDIST_CACHE")]
    cache_dir: Option<PathBuf>,

    /// Do not read or write the cache.
    #[arg(long, global = true)]
    no_cache: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Cache and progress notes on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    /// Allow moduli of norm above the default limit.
    #[arg(long, global = true)]
    slow: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Discriminant, w_K and class group of Q(sqrt(-d)).
    Field(FieldArgs),
    /// Ray class group of a modulus.
    Rayclass(ModulusArgs),
    /// Torsion of the level quotient Δ_m/U(m), cross-checked two ways.
    Torsion(ModulusArgs),
    /// Explicit torsion certificate for three primes.
    Certify(CertifyArgs),
    /// Prime triples satisfying the certificate hypotheses.
    Search(SearchArgs),
    /// Synthetic parity-law sweep over Sylow frames.
    ToralgSweep(SweepArgs),
}

#[derive(Args, Debug)]
struct FieldArgs {
    /// Squarefree d > 0 for K = Q(sqrt(-d)).
    #[arg(short)]
    d: u64,
}

#[derive(Args, Debug)]
struct ModulusArgs {
    #[arg(short)]
    d: u64,
    /// Comma-separated prime specs with optional exponents, e.g. p:7,p:11:0^2.
    #[arg(short)]
    m: String,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(short)]
    d: u64,
    /// Prime spec or rational prime; give exactly three.
    #[arg(short, required = true)]
    p: Vec<String>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(short)]
    d: u64,
    /// Largest prime norm considered.
    #[arg(long, default_value_t = 50)]
    bound: u64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    ell: u64,
    #[arg(long, default_value_t = 4)]
    max_m: usize,
    /// Exponents r to sweep; defaults to those with ℓ^r dividing some w_K.
    #[arg(long)]
    r: Vec<u32>,
}

fn echo(command: &Command) -> CommandEcho {
    let mut args = BTreeMap::new();
    let name = match command {
        Command::Field(a) => {
            args.insert("d".into(), json!(a.d));
            "field"
        }
        Command::Rayclass(a) | Command::Torsion(a) => {
            args.insert("d".into(), json!(a.d));
            args.insert("m".into(), json!(a.m));
            if matches!(command, Command::Rayclass(_)) {
                "rayclass"
            } else {
                "torsion"
            }
        }
        Command::Certify(a) => {
            args.insert("d".into(), json!(a.d));
            args.insert("p".into(), json!(a.p));
            "certify"
        }
        Command::Search(a) => {
            args.insert("d".into(), json!(a.d));
            args.insert("bound".into(), json!(a.bound));
            "search"
        }
        Command::ToralgSweep(a) => {
            args.insert("ell".into(), json!(a.ell));
            args.insert("max_m".into(), json!(a.max_m));
            args.insert("r".into(), json!(a.r));
            "toralg-sweep"
        }
    };
    CommandEcho { name: name.into(), args }
}

fn default_cache_dir() -> Option<PathBuf> {
    if let Some(x) = std::env::var_os("XDG_CACHE_HOME") {
        return Some(PathBuf::from(x).join("ordist"));
    }
    std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("ordist"))
}

fn open_cache(run: &RunConfig) -> Option<Cache> {
    if run.no_cache {
        return None;
    }
    let dir = run.cache_dir.clone().or_else(default_cache_dir)?;
    let cache = Cache::open(&dir);
    if run.verbose > 0 {
        match &cache {
            Some(c) => eprintln!("ordist: cache at {}", c.root().display()),
            None => eprintln!("ordist: cache directory {} is not writable; caching disabled", dir.display()),
        }
    }
    cache
}

/// Fails a finished torsion report whose bounds do not hold.
fn check_bounds(v: &Value) -> Option<CliError> {
    let b = &v["bounds"];
    if b.get("skipped").is_some() {
        return None;
    }
    let ok = b["exponent_divides_product"] == json!(true) && b["order_divides_borne"] == json!(true);
    (!ok).then(|| CliError::Internal("torsion bounds do not hold".into()))
}

fn run(ctx: &Context, command: &Command, doc: &mut ReportDocument) -> Result<Option<CliError>, CliError> {
    let k = match command {
        Command::Field(a) => Some(a.d),
        Command::Rayclass(a) | Command::Torsion(a) => Some(a.d),
        Command::Certify(a) => Some(a.d),
        Command::Search(a) => Some(a.d),
        Command::ToralgSweep(_) => None,
    }
    .map(commands::field)
    .transpose()?;
    if let Some(k) = &k {
        doc.field = Some(report::field(k));
    }
    let (value, failed) = match (command, &k) {
        (Command::Field(_), Some(k)) => (commands::cmd_field(k), None),
        (Command::Rayclass(a), Some(k)) => (commands::cmd_rayclass(ctx, k, &a.m)?, None),
        (Command::Torsion(a), Some(k)) => {
            let v = commands::cmd_torsion(ctx, k, &a.m)?;
            let failed = check_bounds(&v);
            (v, failed)
        }
        (Command::Certify(a), Some(k)) => commands::cmd_certify(k, &a.p)?,
        (Command::Search(a), Some(k)) => (commands::cmd_search(k, a.bound), None),
        (Command::ToralgSweep(a), None) => commands::cmd_toralg_sweep(a.ell, a.max_m, &a.r)?,
        _ => unreachable!("field is built for every field command"),
    };
    doc.result = Some(value);
    Ok(failed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let ctx = Context { cache: open_cache(&cli.run), slow: cli.run.slow, verbose: cli.run.verbose };
    let mut doc = ReportDocument::new(echo(&cli.command));
    let start = Instant::now();
    let failure = match run(&ctx, &cli.command, &mut doc) {
        Ok(f) => f,
        Err(e) => Some(e),
    };
    doc.timing_ms = start.elapsed().as_millis() as u64;
    let code = match &failure {
        Some(e) => {
            doc.error = Some(json!({ "kind": e.kind(), "message": e.message(), "exit_code": e.exit_code() }));
            eprintln!("ordist: {} error: {e}", e.kind());
            e.exit_code()
        }
        None => 0,
    };
    match cli.run.format {
        Format::Json => println!("{}", doc.to_json()),
        Format::Text => print!("{}", doc.to_text()),
    }
    ExitCode::from(code as u8)
}
