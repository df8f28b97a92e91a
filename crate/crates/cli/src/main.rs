#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use bessel_forge::{emit_csv, run, Command, RunSpec};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bessel-forge",
    version,
    about = "Bessel pair certification and Hardy/Rellich checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Certify a Bessel pair (W, H) by the integral criterion.
    Certify(Common),
    /// Solve the radial quasilinear equation.
    Ode(Common),
    /// Sweep the Picone identities over random test functions.
    Picone(Common),
    /// Hardy inequality checks: radial, group, consistency, search, sweep.
    Hardy(Common),
    /// Rellich constants, supersolution hypothesis and inequality checks.
    Rellich(Common),
    /// Vector-field, gauge and dilation identities of a geometry.
    GeometryCheck(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run spec.
    #[arg(long)]
    spec: PathBuf,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit the named curve (solution, phi, sweep) as CSV instead of the report.
    #[arg(long)]
    csv: Option<String>,
}

fn threads_from_env() -> Result<(), String> {
    let Ok(raw) = std::env::var("BESSEL_FORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("BESSEL_FORGE_THREADS must be a positive integer, got `{raw}`"))?;
    if n == 0 {
        return Err("BESSEL_FORGE_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Certify(a) => (Command::Certify, a),
        Sub::Ode(a) => (Command::Ode, a),
        Sub::Picone(a) => (Command::Picone, a),
        Sub::Hardy(a) => (Command::Hardy, a),
        Sub::Rellich(a) => (Command::Rellich, a),
        Sub::GeometryCheck(a) => (Command::GeometryCheck, a),
    };
    match execute(command, &args) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("bessel-forge: {msg}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command, args: &Common) -> Result<u8, String> {
    threads_from_env()?;
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| format!("cannot read {}: {e}", args.spec.display()))?;
    let spec = RunSpec::parse(command, &text).map_err(|e| format!("invalid spec: {e}"))?;
    let start = Instant::now();
    let report = run(&spec);
    eprintln!(
        "bessel-forge: {command} finished in {:.3} s",
        start.elapsed().as_secs_f64()
    );
    if let Some(e) = &report.error {
        eprintln!("bessel-forge: {e}");
    }
    let body = match &args.csv {
        Some(curve) => emit_csv(&report, curve).map_err(|e| e.to_string())?,
        None => report.to_json(),
    };
    match &args.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{body}"),
    }
    Ok(report.status.exit_code() as u8)
}
