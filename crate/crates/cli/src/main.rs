//! Command line front end: ingest an instance, run one operation, emit a
//! single JSON report with certificates.

mod ingest;
mod run;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use run::{build_report, execute, verify_report, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "regdecomp", version, about = "Certified regularity decompositions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct CommonArgs {
    /// Instance file (CSV or JSON matrix; JSON for hypercube and multi runs)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format: csv, json, or auto (by extension)
    #[arg(long, default_value = "auto")]
    format: String,
    /// Structured-set family: rectangles, symmetric-rectangles, intervals,
    /// or algebra:i,j|k,l (cells of a partition, flattened indices)
    #[arg(long, default_value = "rectangles")]
    semiring: String,
    /// Norm exponent in (1, 2]
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Error budget for the decomposition loop
    #[arg(long)]
    sigma: Option<f64>,
    /// Uniformity parameter for partition runs
    #[arg(long)]
    eta: Option<f64>,
    /// Regularity parameter for graphon and hypercube runs
    #[arg(long)]
    eps: Option<f64>,
    /// Growth function: succ, affine:a,b, prop42:eta, cor45:h=recip
    #[arg(long, default_value = "succ")]
    growth: String,
    /// Witness search mode: exact or best-effort
    #[arg(long, default_value = "exact")]
    mode: String,
    /// Absolute tolerance for certificate comparisons
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for best-effort witness search
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap overrides, comma separated: allow-large=1, cut-base=N
    #[arg(long)]
    caps: Option<String>,
    /// Report destination (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Omit timings so identical runs produce byte-identical reports
    #[arg(long)]
    stable_output: bool,
}

#[derive(Args)]
struct BoundArgs {
    /// Difference piece count of the semiring
    #[arg(long)]
    k: u64,
    /// Number of simultaneous functions
    #[arg(long, default_value_t = 1)]
    ell: u64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Report to re-verify
    #[arg(long)]
    report: PathBuf,
    /// Input file override (defaults to the path echoed in the report)
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Split a function into structured, small, and uniform parts
    Decompose(CommonArgs),
    /// Simultaneously decompose a list of functions over one family
    Multi(CommonArgs),
    /// Partition the space so most cells see the function as uniform
    Uniform(CommonArgs),
    /// Regular partition of a subset of words over a finite alphabet
    Hypercube(CommonArgs),
    /// Strong regularity decomposition of a symmetric kernel
    GraphonStrong(CommonArgs),
    /// Weak regularity partition of a symmetric kernel
    GraphonWeak(CommonArgs),
    /// Structured-set uniformity norm of a function, with witness
    Norm(CommonArgs),
    /// Iteration count bounds for the decomposition recursion
    Bounds(BoundArgs),
    /// Re-run a report's operation and check its certificates
    Verify(VerifyArgs),
}

fn to_config(op: &str, a: &CommonArgs, k: Option<u64>, ell: Option<u64>) -> RunConfig {
    RunConfig {
        operation: op.to_string(),
        input: a.input.as_ref().map(|p| p.display().to_string()),
        format: a.format.clone(),
        semiring: a.semiring.clone(),
        p: a.p,
        sigma: a.sigma,
        eta: a.eta,
        eps: a.eps,
        growth: a.growth.clone(),
        mode: a.mode.clone(),
        tol: a.tol,
        seed: a.seed,
        caps: a.caps.clone(),
        k,
        ell,
    }
}

fn run_and_emit(cfg: RunConfig, output: &Option<PathBuf>, stable: bool) -> Result<(), CliError> {
    let start = Instant::now();
    let (outputs, certificates) = execute(&cfg)?;
    let elapsed = (!stable).then(|| start.elapsed().as_millis());
    let report = build_report(&cfg, outputs, certificates, elapsed);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match output {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (op, args, k, ell) = match &cli.cmd {
        Cmd::Decompose(a) => ("decompose", a, None, None),
        Cmd::Multi(a) => ("multi", a, None, None),
        Cmd::Uniform(a) => ("uniform", a, None, None),
        Cmd::Hypercube(a) => ("hypercube", a, None, None),
        Cmd::GraphonStrong(a) => ("graphon-strong", a, None, None),
        Cmd::GraphonWeak(a) => ("graphon-weak", a, None, None),
        Cmd::Norm(a) => ("norm", a, None, None),
        Cmd::Bounds(b) => ("bounds", &b.common, Some(b.k), Some(b.ell)),
        Cmd::Verify(v) => {
            verify_report(&v.report, v.input.as_deref())?;
            println!("verified: all certificates reproduce");
            return Ok(());
        }
    };
    run_and_emit(to_config(op, args, k, ell), &args.output, args.stable_output)
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code() as i32);
    }
}
